"""Discrete-time PID laws and the dynamic-compute gain scheduler.

Two control laws share one mutable state record:

    classical:  u = kp*e + ki*I + kd*de/dt
    improved:   u = kp*e + (ki/tau)*I + tau*kd*de/dt,  saturated to [u_min, u_max]

where I is the rectangular (Euler) running integral of the error, clamped to
[-i_max, +i_max], and de/dt is the backward difference of the error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional


class NonFiniteError(ValueError):
    """Raised when a controller is fed a NaN or infinite value."""


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteError(f"{name} must be finite, got {value!r}")
    return value


def clamp(value: float, lo: float, hi: float) -> float:
    return lo if value < lo else hi if value > hi else value


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            _check_finite(name, getattr(self, name))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.kp, self.ki, self.kd)


@dataclass
class PidState:
    """Mutable history of one controller instance.

    ``prev_error`` is ``None`` until the first step; the first step then uses
    its own error as the previous one so the derivative term starts at zero.
    """

    dt: float
    i_max: float = 1e3
    integral_acc: float = 0.0
    prev_error: Optional[float] = None
    prev_control: float = 0.0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be a positive finite number, got {self.dt!r}")
        if not self.i_max > 0:
            raise ValueError(f"i_max must be > 0, got {self.i_max!r}")


@dataclass(frozen=True)
class ImprovedPidConfig:
    tau: float = 1.0
    i_max: float = 1e3
    u_min: float = -math.inf
    u_max: float = math.inf

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be a positive finite number, got {self.tau!r}")
        if not self.i_max > 0:
            raise ValueError(f"i_max must be > 0, got {self.i_max!r}")
        if not self.u_min < self.u_max:
            raise ValueError(f"u_min must be < u_max, got [{self.u_min}, {self.u_max}]")


@dataclass(frozen=True)
class PidTerms:
    """Per-term breakdown of one step, kept for replay and decomposition checks."""

    proportional: float
    integral: float
    derivative: float
    integral_acc: float
    error_rate: float
    control: float = field(default=0.0)


def _advance(state: PidState, error: float, i_max: float) -> tuple[float, float]:
    """Return (new integral accumulator, error rate) without mutating state."""
    prev = error if state.prev_error is None else state.prev_error
    acc = clamp(state.integral_acc + error * state.dt, -i_max, i_max)
    rate = (error - prev) / state.dt
    return acc, rate


def _commit(state: PidState, error: float, acc: float, u: float) -> None:
    state.integral_acc = acc
    state.prev_error = error
    state.prev_control = u


def classical_pid_terms(state: PidState, gains: PidGains, error: float) -> PidTerms:
    error = _check_finite("error", error)
    acc, rate = _advance(state, error, state.i_max)
    p = gains.kp * error
    i = gains.ki * acc
    d = gains.kd * rate
    u = p + i + d
    if not math.isfinite(u):
        raise NonFiniteError(f"classical PID produced non-finite output {u!r}")
    _commit(state, error, acc, u)
    return PidTerms(p, i, d, acc, rate, u)


def classical_pid_step(state: PidState, gains: PidGains, error: float) -> float:
    """One step of the textbook PID law; updates ``state`` in place."""
    return classical_pid_terms(state, gains, error).control


def improved_pid_terms(
    state: PidState, gains: PidGains, cfg: ImprovedPidConfig, error: float
) -> PidTerms:
    error = _check_finite("error", error)
    acc, rate = _advance(state, error, cfg.i_max)
    p = gains.kp * error
    i = (gains.ki / cfg.tau) * acc
    d = cfg.tau * gains.kd * rate
    u = p + i + d
    if not math.isfinite(u):
        raise NonFiniteError(f"improved PID produced non-finite output {u!r}")
    u = clamp(u, cfg.u_min, cfg.u_max)
    _commit(state, error, acc, u)
    return PidTerms(p, i, d, acc, rate, u)


def improved_pid_step(
    state: PidState, gains: PidGains, cfg: ImprovedPidConfig, error: float
) -> float:
    """PID step with the integral gain divided by tau and the derivative gain
    multiplied by tau, followed by output saturation."""
    return improved_pid_terms(state, gains, cfg, error).control


def dynamic_compute(
    rho, baseline: PidGains, delta_eps: float, dt: float
) -> PidGains:
    """Shift each baseline gain by ``rho_x * delta_eps / dt``, floored at zero.

    ``rho`` is any 3-sequence ordered (p, i, d).
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    delta_eps = _check_finite("delta_eps", delta_eps)
    rho_p, rho_i, rho_d = (_check_finite("rho", r) for r in rho)
    slope = delta_eps / dt
    return PidGains(
        kp=max(0.0, baseline.kp + rho_p * slope),
        ki=max(0.0, baseline.ki + rho_i * slope),
        kd=max(0.0, baseline.kd + rho_d * slope),
    )

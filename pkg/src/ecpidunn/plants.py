"""Continuous-time plant models.

All derivative functions are pure: they take a state (any sequence in the
field order of the matching NamedTuple), parameters and held inputs, and
return the time derivative as a float array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# tan(phi) guard margin below pi/2
TAN_GUARD = 1e-3


class AckermannState(NamedTuple):
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    phi: float = 0.0


class LongitudinalState(NamedTuple):
    v_car: float = 0.0


class PanTiltState(NamedTuple):
    theta: float = 0.0
    theta_dot: float = 0.0
    phi: float = 0.0
    phi_dot: float = 0.0


@dataclass(frozen=True)
class AckermannParams:
    wheelbase: float = 2.5
    phi_max: float = 0.6

    def __post_init__(self):
        if not self.wheelbase > 0:
            raise ValueError(f"wheelbase must be > 0, got {self.wheelbase}")
        if not 0 < self.phi_max < math.pi / 2 - TAN_GUARD:
            raise ValueError(f"phi_max must be in (0, pi/2), got {self.phi_max}")


@dataclass(frozen=True)
class LongitudinalParams:
    mass: float = 1200.0
    drag_coefficient: float = 0.3
    area: float = 2.2
    air_density: float = 1.225
    f_max: float = 4000.0

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be > 0, got {self.mass}")
        for name in ("drag_coefficient", "area", "air_density", "f_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def drag_factor(self) -> float:
        """k in F_drag = k * v**2."""
        return 0.5 * self.drag_coefficient * self.area * self.air_density

    def terminal_velocity(self, force: float) -> float:
        return math.sqrt(force / self.drag_factor)


@dataclass(frozen=True)
class PanTiltParams:
    I_theta: float = 0.05
    I_phi: float = 0.05
    b_theta: float = 0.1
    b_phi: float = 0.1
    torque_max: float = 2.0

    def __post_init__(self):
        if not (self.I_theta > 0 and self.I_phi > 0):
            raise ValueError("moments of inertia must be > 0")
        if self.b_theta < 0 or self.b_phi < 0:
            raise ValueError("damping coefficients must be >= 0")
        if not self.torque_max > 0:
            raise ValueError(f"torque_max must be > 0, got {self.torque_max}")


def ackermann_derivatives(s, p: AckermannParams, u1: float, u2: float) -> np.ndarray:
    """Kinematic car: (x', y', theta', phi') = (u1 cos th, u1 sin th, u1 tan(phi)/L, u2).

    ``u1`` is the forward speed. The steering rate is zeroed when it would
    push phi past the actuator limit.
    """
    _, _, theta, phi = s
    assert abs(phi) < math.pi / 2 - TAN_GUARD, f"steering angle {phi} too close to pi/2"
    phi_dot = u2
    if (phi >= p.phi_max and u2 > 0) or (phi <= -p.phi_max and u2 < 0):
        phi_dot = 0.0
    return np.array(
        [
            u1 * math.cos(theta),
            u1 * math.sin(theta),
            u1 * math.tan(phi) / p.wheelbase,
            phi_dot,
        ]
    )


def drag_force(v: float, p: LongitudinalParams) -> float:
    return p.drag_factor * v * v


def longitudinal_derivative(s, p: LongitudinalParams, force: float) -> np.ndarray:
    """v' = (F - 0.5 Cd A rho v^2) / m."""
    (v,) = s
    return np.array([(force - drag_force(v, p)) / p.mass])


def pan_tilt_derivatives(s, p: PanTiltParams, tau_theta: float, tau_phi: float) -> np.ndarray:
    _, theta_dot, _, phi_dot = s
    return np.array(
        [
            theta_dot,
            (tau_theta - p.b_theta * theta_dot) / p.I_theta,
            phi_dot,
            (tau_phi - p.b_phi * phi_dot) / p.I_phi,
        ]
    )


def pan_tilt_desired_angles(target, z: float) -> tuple[float, float]:
    """Pan/tilt angles that centre a target at planar offset (x, y) and depth z."""
    if not z > 0:
        raise ValueError(f"depth z must be > 0, got {z}")
    x_t, y_t = target
    return math.atan(x_t / z), math.atan(y_t / z)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]; for reporting only."""
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w

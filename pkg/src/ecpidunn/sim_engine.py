"""Fixed-step integration and closed-loop scenario wiring.

The controller runs at the integration rate. Each tick records the loop
signals, computes the control, then advances the plant one step with the
control held constant (zero-order hold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import plants
from .config import ExperimentConfig
from .control_core import PidGains, PidState, classical_pid_step, clamp
from .ec_pidunn import PRNG_ALGORITHM, ParamVector, make_controller

DIVERGENCE_LIMIT = 1e9
COLUMNS = ("t", "setpoint", "output", "error", "control", "kp", "ki", "kd", "rho_p", "rho_i", "rho_d")


class DivergenceError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(f"t={t:.6g}s: {message}")
        self.t = t


def integrate_step(deriv: Callable, state, dt: float, method: str = "rk4") -> np.ndarray:
    """Advance ``state`` by ``dt`` under ``deriv(state)``.

    Controls must be bound into ``deriv`` by the caller so every stage of a
    step sees the same value.
    """
    s = np.asarray(state, dtype=float)
    if method == "euler":
        return s + dt * np.asarray(deriv(s))
    if method == "rk4":
        k1 = np.asarray(deriv(s))
        k2 = np.asarray(deriv(s + 0.5 * dt * k1))
        k3 = np.asarray(deriv(s + 0.5 * dt * k2))
        k4 = np.asarray(deriv(s + dt * k3))
        return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    raise ValueError(f"unknown integrator {method!r}")


def _guarded_step(deriv, state, dt, method, t):
    try:
        new = integrate_step(deriv, state, dt, method)
    except (OverflowError, FloatingPointError, ValueError) as err:
        raise DivergenceError(f"integration failed: {err}", t) from err
    if not np.all(np.isfinite(new)):
        raise DivergenceError(f"non-finite state {new}", t)
    if np.max(np.abs(new)) > DIVERGENCE_LIMIT:
        raise DivergenceError(f"state magnitude exceeded {DIVERGENCE_LIMIT:g}: {new}", t)
    return new


class ClassicalController:
    """Textbook PID wrapped with the same actuator clamp the plant applies."""

    def __init__(self, gains: PidGains, dt: float, i_max: float = 1e3,
                 u_min: float = -math.inf, u_max: float = math.inf):
        self.gains = gains
        self.state = PidState(dt=dt, i_max=i_max)
        self.u_min, self.u_max = u_min, u_max
        self.rho = ParamVector()

    def step(self, error: float) -> float:
        return clamp(classical_pid_step(self.state, self.gains, error), self.u_min, self.u_max)


@dataclass
class LoopTrace:
    name: str
    data: np.ndarray  # shape (n, len(COLUMNS))

    def __getitem__(self, column: str) -> np.ndarray:
        return self.data[:, COLUMNS.index(column)]

    def __len__(self) -> int:
        return self.data.shape[0]


@dataclass
class Trajectory:
    loops: dict[str, LoopTrace]
    metadata: dict = field(default_factory=dict)
    final_state: Optional[np.ndarray] = None


def build_controller(cfg: ExperimentConfig, loop: str, u_min: float, u_max: float):
    """Controller instance for one loop. Every loop of a run gets the same
    tau, rho0 and topology; baselines, limits and (if overridden) the network
    seed are per loop."""
    c = cfg.controller
    g = getattr(c.loops, loop)
    gains = PidGains(g.kp, g.ki, g.kd)
    seed = c.seed if g.seed is None else g.seed
    dt = cfg.sim.dt
    if c.kind == "classical":
        return ClassicalController(gains, dt, c.i_max, u_min, u_max)
    return make_controller(
        gains, dt, tau=c.tau, rho0=c.rho0, rho_scale=c.rho_scale, seed=seed,
        topology=c.topology, activation=c.activation, i_max=c.i_max,
        u_min=u_min, u_max=u_max, delta_mode=c.delta_mode,
    )


def _construction_record(cfg: ExperimentConfig, ctrl) -> dict:
    # must be taken before the first step: rho and gains are live state
    c = cfg.controller
    rec = {"kind": c.kind, "baseline": list(ctrl.gains.as_tuple())}
    if c.kind == "ec_pidunn":
        rec.update(
            baseline=list(ctrl.baseline.as_tuple()),
            tau=ctrl.cfg.tau,
            rho0=list(ctrl.rho),
            seed=ctrl.net.seed,
            topology=list(ctrl.net.layer_sizes),
            rho_scale=ctrl.net.rho_scale,
        )
    return rec


def _metadata(cfg: ExperimentConfig, controllers: dict) -> dict:
    c = cfg.controller
    plant = cfg.plant.vehicle if cfg.scenario.name == "vehicle" else cfg.plant.pan_tilt
    return {
        "scenario": cfg.scenario.name,
        "controller": c.kind,
        "dt": cfg.sim.dt,
        "duration": cfg.sim.duration,
        "integrator": cfg.sim.integrator,
        "tau": c.tau,
        "rho0": list(c.rho0),
        "rho_scale": c.rho_scale,
        "seed": c.seed,
        "topology": list(c.topology),
        "activation": c.activation,
        "delta_mode": c.delta_mode,
        "prng": PRNG_ALGORITHM,
        "plant": plant.model_dump(mode="json"),
        "loops": {name: _construction_record(cfg, ctrl) for name, ctrl in controllers.items()},
    }


def _record(buf: np.ndarray, i: int, t: float, setpoint: float, output: float,
            error: float, control: float, ctrl) -> None:
    g = ctrl.gains
    rho = ctrl.rho
    buf[i] = (t, setpoint, output, error, control, g.kp, g.ki, g.kd, rho[0], rho[1], rho[2])


def run_vehicle_scenario(cfg: ExperimentConfig) -> Trajectory:
    """Speed loop (force -> longitudinal dynamics) and steering loop
    (steering rate -> Ackermann kinematics) coupled through the live speed."""
    sc = cfg.scenario.vehicle
    pv = cfg.plant.vehicle
    ack = plants.AckermannParams(wheelbase=pv.wheelbase, phi_max=pv.phi_max)
    lon = plants.LongitudinalParams(pv.mass, pv.drag_coefficient, pv.area, pv.air_density, pv.f_max)
    dt, n, method = cfg.sim.dt, cfg.sim.n_steps, cfg.sim.integrator
    heading = sc.steering_mode == "heading"

    controllers = {
        "speed": build_controller(cfg, "speed", 0.0, pv.f_max),
        "steering": build_controller(cfg, "steering", -pv.steer_rate_max, pv.steer_rate_max),
    }
    speed_ctrl, steer_ctrl = controllers["speed"], controllers["steering"]
    meta = _metadata(cfg, controllers)
    bufs = {name: np.empty((n + 1, len(COLUMNS))) for name in controllers}

    # state: x, y, theta, phi, v
    state = np.array([0.0, 0.0, 0.0, 0.0, sc.v0])
    for i in range(n + 1):
        t = i * dt
        v = state[4]
        e_v = sc.v_target - v
        force = clamp(speed_ctrl.step(e_v), 0.0, lon.f_max)
        _record(bufs["speed"], i, t, sc.v_target, v, e_v, force, speed_ctrl)

        steer_out = state[2] if heading else state[3]
        e_s = sc.steering_target - steer_out
        u2 = clamp(steer_ctrl.step(e_s), -pv.steer_rate_max, pv.steer_rate_max)
        _record(bufs["steering"], i, t, sc.steering_target, steer_out, e_s, u2, steer_ctrl)

        if i == n:
            break

        def deriv(s, force=force, u2=u2):
            d_ack = plants.ackermann_derivatives(s[:4], ack, s[4], u2)
            d_lon = plants.longitudinal_derivative(s[4:], lon, force)
            return np.concatenate([d_ack, d_lon])

        state = _guarded_step(deriv, state, dt, method, t)
        state[3] = clamp(state[3], -pv.phi_max, pv.phi_max)

    loops = {name: LoopTrace(name, buf) for name, buf in bufs.items()}
    return Trajectory(loops, meta, state)


def target_position(cfg: ExperimentConfig, t: float) -> tuple[float, float]:
    pt = cfg.scenario.pan_tilt
    if pt.target == "step":
        return pt.step_target
    if pt.target == "sinusoid":
        r = pt.resolved_radius
        return r * math.sin(pt.omega * t), r * math.cos(pt.omega * t)
    x0, y0 = pt.line_start
    vx, vy = pt.line_velocity
    return x0 + vx * t, y0 + vy * t


def run_pan_tilt_scenario(cfg: ExperimentConfig) -> Trajectory:
    """Two independent axis loops tracking a target in the image plane."""
    pt = cfg.scenario.pan_tilt
    pp = cfg.plant.pan_tilt
    params = plants.PanTiltParams(pp.I_theta, pp.I_phi, pp.b_theta, pp.b_phi, pp.torque_max)
    dt, n, method = cfg.sim.dt, cfg.sim.n_steps, cfg.sim.integrator
    lim = pp.torque_max

    controllers = {
        "pan": build_controller(cfg, "pan", -lim, lim),
        "tilt": build_controller(cfg, "tilt", -lim, lim),
    }
    pan_ctrl, tilt_ctrl = controllers["pan"], controllers["tilt"]
    meta = _metadata(cfg, controllers)
    bufs = {name: np.empty((n + 1, len(COLUMNS))) for name in controllers}

    state = np.zeros(4)
    for i in range(n + 1):
        t = i * dt
        theta_d, phi_d = plants.pan_tilt_desired_angles(target_position(cfg, t), pt.z)
        e_th = theta_d - state[0]
        e_ph = phi_d - state[2]
        tq_th = clamp(pan_ctrl.step(e_th), -lim, lim)
        tq_ph = clamp(tilt_ctrl.step(e_ph), -lim, lim)
        _record(bufs["pan"], i, t, theta_d, state[0], e_th, tq_th, pan_ctrl)
        _record(bufs["tilt"], i, t, phi_d, state[2], e_ph, tq_ph, tilt_ctrl)
        if i == n:
            break

        def deriv(s, a=tq_th, b=tq_ph):
            return plants.pan_tilt_derivatives(s, params, a, b)

        state = _guarded_step(deriv, state, dt, method, t)

    loops = {name: LoopTrace(name, buf) for name, buf in bufs.items()}
    meta["depth_z"] = pt.z
    meta["target"] = pt.target
    return Trajectory(loops, meta, state)


def run_scenario(cfg: ExperimentConfig) -> Trajectory:
    if cfg.scenario.name == "vehicle":
        return run_vehicle_scenario(cfg)
    return run_pan_tilt_scenario(cfg)

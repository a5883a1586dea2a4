import math

import numpy as np
import pytest

from ecpidunn import plants
from ecpidunn.plants import LongitudinalParams, longitudinal_derivative
from ecpidunn.sim_engine import (
    COLUMNS,
    DivergenceError,
    integrate_step,
    run_pan_tilt_scenario,
    run_scenario,
    run_vehicle_scenario,
)


def test_zero_dynamics_unchanged():
    s = np.array([1.0, -2.0])
    for m in ("euler", "rk4"):
        assert np.array_equal(integrate_step(lambda x: np.zeros(2), s, 0.1, m), s)


def test_euler_unit_slope():
    assert integrate_step(lambda x: np.ones(1), [2.0], 0.1, "euler")[0] == pytest.approx(2.1)


def test_rk4_exponential():
    got = integrate_step(lambda x: x, [1.0], 0.1, "rk4")[0]
    assert got == pytest.approx(math.exp(0.1), abs=1e-7)
    # local truncation error of one step is O(dt^5)
    assert abs(got - math.exp(0.1)) < 1e-6 * 0.1


def test_unknown_integrator():
    with pytest.raises(ValueError):
        integrate_step(lambda x: x, [1.0], 0.1, "midpoint")


def _longitudinal_final(dt, t_end=20.0, force=4000.0):
    p = LongitudinalParams()
    s = np.array([0.0])
    for _ in range(int(round(t_end / dt))):
        s = integrate_step(lambda x: longitudinal_derivative(x, p, force), s, dt)
    return s[0]


def rk4_error_ratio(dt):
    ref = _longitudinal_final(dt / 100)
    return abs(_longitudinal_final(dt) - ref) / abs(_longitudinal_final(dt / 2) - ref)


def test_rk4_fourth_order():
    assert rk4_error_ratio(2.0) >= 12.0


def test_vehicle_zero_target_stays_at_rest(cfg_factory):
    cfg = cfg_factory(**{"scenario.vehicle.v_target": 0.0, "scenario.vehicle.steering_target": 0.0,
                         "sim.duration": 2.0})
    for kind in ("classical", "ec_pidunn"):
        traj = run_vehicle_scenario(cfg.with_overrides(**{"controller.kind": kind}))
        assert np.all(traj.loops["speed"]["control"] == 0)
        assert np.all(traj.loops["speed"]["output"] == 0)


def test_steering_angle_loop_is_first_order(cfg_factory):
    kp, dt, target = 2.0, 1e-3, 0.3
    cfg = cfg_factory(**{
        "controller.kind": "classical",
        "controller.loops.steering": {"kp": kp, "ki": 0.0, "kd": 0.0},
        "scenario.vehicle.steering_mode": "steering_angle",
        "scenario.vehicle.steering_target": target,
        "scenario.vehicle.v0": 5.0,
        "sim.duration": 3.0,
    })
    tr = run_vehicle_scenario(cfg).loops["steering"]
    t, y = tr["t"], tr["output"]
    k = np.flatnonzero(y >= (1 - math.exp(-1)) * target)[0]
    assert t[k] == pytest.approx(1 / kp, abs=2 * dt)


@pytest.mark.parametrize("scenario", ["vehicle", "pan_tilt"])
def test_collapse_end_to_end(cfg_factory, scenario):
    base = {"scenario.name": scenario, "sim.duration": 3.0, "controller.i_max": 1e12,
            "controller.tau": 1.0, "controller.rho_scale": 0.0}
    a = run_scenario(cfg_factory(**base, **{"controller.kind": "classical"}))
    b = run_scenario(cfg_factory(**base, **{"controller.kind": "ec_pidunn"}))
    for name in a.loops:
        for col in ("output", "control"):
            assert np.max(np.abs(a.loops[name][col] - b.loops[name][col])) <= 1e-9


def test_pan_tilt_centred_target_never_moves(cfg_factory):
    cfg = cfg_factory(**{"scenario.name": "pan_tilt", "scenario.pan_tilt.target": "step",
                         "scenario.pan_tilt.step_target": [0.0, 0.0], "sim.duration": 2.0})
    traj = run_pan_tilt_scenario(cfg)
    for name in ("pan", "tilt"):
        assert np.all(traj.loops[name]["control"] == 0)
        assert np.all(traj.loops[name]["output"] == 0)


def test_pan_tilt_settles_on_static_target(cfg_factory):
    cfg = cfg_factory(**{"scenario.name": "pan_tilt", "scenario.pan_tilt.target": "step",
                         "scenario.pan_tilt.z": 2.0, "scenario.pan_tilt.step_target": [2.0, 0.0],
                         "sim.duration": 15.0, "controller.kind": "classical"})
    traj = run_pan_tilt_scenario(cfg)
    assert traj.loops["pan"]["output"][-1] == pytest.approx(math.pi / 4, abs=1e-3)
    assert np.all(traj.loops["tilt"]["output"] == 0)


def test_trajectory_length_and_time_grid(cfg_factory):
    cfg = cfg_factory(**{"sim.dt": 0.01, "sim.duration": 1.234})
    traj = run_scenario(cfg)
    for tr in traj.loops.values():
        assert len(tr) == math.floor(1.234 / 0.01) + 1
        assert tr.data.shape[1] == len(COLUMNS)
        assert np.allclose(np.diff(tr["t"]), 0.01)
        assert np.all(np.diff(tr["t"]) > 0)


def test_same_config_same_trajectory(cfg_factory):
    cfg = cfg_factory(**{"sim.duration": 2.0, "controller.seed": 12})
    a, b = run_scenario(cfg), run_scenario(cfg)
    for name in a.loops:
        assert np.array_equal(a.loops[name].data, b.loops[name].data)


def test_zero_order_hold_across_rk4_stages(cfg_factory, monkeypatch):
    seen = []
    real = plants.pan_tilt_derivatives

    def spy(s, p, a, b):
        seen.append((a, b))
        return real(s, p, a, b)

    monkeypatch.setattr(plants, "pan_tilt_derivatives", spy)
    cfg = cfg_factory(**{"scenario.name": "pan_tilt", "sim.duration": 0.5})
    traj = run_pan_tilt_scenario(cfg)
    n = len(traj.loops["pan"]) - 1
    assert len(seen) == 4 * n
    for k in range(n):
        stages = seen[4 * k: 4 * k + 4]
        assert len(set(stages)) == 1
        assert stages[0] == (traj.loops["pan"]["control"][k], traj.loops["tilt"]["control"][k])


def test_vehicle_loops_share_tau_and_rho0(cfg_factory):
    cfg = cfg_factory(**{"controller.tau": 3.0, "controller.rho0": [0.01, -0.02, 0.0],
                         "sim.duration": 0.1})
    rec = run_vehicle_scenario(cfg).metadata["loops"]
    assert rec["speed"]["tau"] == rec["steering"]["tau"] == 3.0
    assert rec["speed"]["rho0"] == rec["steering"]["rho0"] == [0.01, -0.02, 0.0]
    assert rec["speed"]["seed"] == rec["steering"]["seed"]
    assert rec["speed"]["topology"] == rec["steering"]["topology"]


def test_per_loop_seed_override(cfg_factory):
    cfg = cfg_factory(**{"controller.seed": 1,
                         "controller.loops.steering": {"kp": 1.0, "ki": 0.0, "kd": 0.1, "seed": 9},
                         "sim.duration": 0.1})
    rec = run_vehicle_scenario(cfg).metadata["loops"]
    assert (rec["speed"]["seed"], rec["steering"]["seed"]) == (1, 9)


def test_speed_force_within_actuator_range(cfg_factory):
    cfg = cfg_factory(**{"scenario.vehicle.v_target": 30.0, "sim.duration": 5.0})
    f = run_vehicle_scenario(cfg).loops["speed"]["control"]
    assert f.min() >= 0 and f.max() <= cfg.plant.vehicle.f_max


def test_divergence_is_reported(cfg_factory):
    cfg = cfg_factory(**{
        "scenario.name": "pan_tilt", "controller.kind": "classical", "sim.integrator": "euler",
        "sim.dt": 0.1, "sim.duration": 50.0, "plant.pan_tilt.torque_max": 1e15,
        "controller.loops.pan": {"kp": 1e4, "ki": 0.0, "kd": 0.0},
    })
    with pytest.raises(DivergenceError) as exc:
        run_scenario(cfg)
    assert exc.value.t > 0
    assert "t=" in str(exc.value)

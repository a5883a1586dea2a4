"""Experiment configuration schema.

A config is a JSON object with the sections ``scenario``, ``controller``,
``plant``, ``sim``, ``sweep`` and ``report``. Every key has a default except
where noted; unknown keys are rejected so a typo never silently falls back to
a default.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .ec_pidunn import DEFAULT_TOPOLOGY, INPUT_WIDTH, OUTPUT_WIDTH

ControllerKind = Literal["classical", "ec_pidunn"]
U64_MAX = 2**64 - 1


class ConfigError(ValueError):
    """Config document failed validation. Messages carry dotted key paths."""


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LoopSettings(_Section):
    """Baseline gains of one loop, plus an optional network seed that replaces
    the shared ``controller.seed`` for this loop only."""

    kp: float = Field(ge=0, allow_inf_nan=False)
    ki: float = Field(ge=0, allow_inf_nan=False)
    kd: float = Field(ge=0, allow_inf_nan=False)
    seed: Optional[int] = Field(None, ge=0, le=U64_MAX)


# Baselines under which the classical law overshoots on every loop of the
# default plants.
class LoopsConfig(_Section):
    speed: LoopSettings = LoopSettings(kp=600.0, ki=150.0, kd=0.0)
    steering: LoopSettings = LoopSettings(kp=1.0, ki=0.0, kd=0.1)
    pan: LoopSettings = LoopSettings(kp=4.0, ki=8.0, kd=0.05)
    tilt: LoopSettings = LoopSettings(kp=4.0, ki=8.0, kd=0.05)


class VehicleScenario(_Section):
    v_target: float = Field(10.0, ge=0, allow_inf_nan=False)
    steering_target: float = Field(0.5, allow_inf_nan=False)
    steering_mode: Literal["heading", "steering_angle"] = "heading"
    v0: float = Field(0.0, ge=0, allow_inf_nan=False)


class PanTiltScenario(_Section):
    target: Literal["step", "sinusoid", "line"] = "sinusoid"
    z: float = Field(1.0, gt=0, allow_inf_nan=False)
    # sinusoid: x = R sin(wt), y = R cos(wt); radius defaults to z
    radius: Optional[float] = Field(None, allow_inf_nan=False)
    omega: float = Field(0.5, allow_inf_nan=False)
    step_target: tuple[float, float] = (1.0, 0.5)
    line_start: tuple[float, float] = (-1.0, -0.5)
    line_velocity: tuple[float, float] = (0.1, 0.05)

    @property
    def resolved_radius(self) -> float:
        return self.z if self.radius is None else self.radius


class ScenarioConfig(_Section):
    name: Literal["vehicle", "pan_tilt"] = "vehicle"
    vehicle: VehicleScenario = VehicleScenario()
    pan_tilt: PanTiltScenario = PanTiltScenario()


class ControllerConfig(_Section):
    kind: ControllerKind = "ec_pidunn"
    tau: float = Field(1.0, gt=0, allow_inf_nan=False)
    rho0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rho_scale: float = Field(0.1, ge=0, allow_inf_nan=False)
    seed: int = Field(0, ge=0, le=U64_MAX)
    topology: tuple[int, ...] = DEFAULT_TOPOLOGY
    activation: Literal["tanh", "sigmoid", "relu", "linear"] = "tanh"
    delta_mode: Literal["control", "error"] = "control"
    i_max: float = Field(1e3, gt=0, allow_inf_nan=False)
    loops: LoopsConfig = LoopsConfig()

    @model_validator(mode="after")
    def _topology(self):
        t = self.topology
        if len(t) < 2 or t[0] != INPUT_WIDTH or t[-1] != OUTPUT_WIDTH or min(t) < 1:
            raise ValueError(
                f"topology must start at {INPUT_WIDTH}, end at {OUTPUT_WIDTH}, widths >= 1; got {list(t)}"
            )
        return self


class VehiclePlant(_Section):
    mass: float = Field(1200.0, gt=0)
    drag_coefficient: float = Field(0.3, ge=0)
    area: float = Field(2.2, ge=0)
    air_density: float = Field(1.225, ge=0)
    wheelbase: float = Field(2.5, gt=0)
    f_max: float = Field(4000.0, gt=0)
    phi_max: float = Field(0.6, gt=0, lt=math.pi / 2 - 1e-3)
    steer_rate_max: float = Field(1.0, gt=0)


class PanTiltPlant(_Section):
    I_theta: float = Field(0.05, gt=0)
    I_phi: float = Field(0.05, gt=0)
    b_theta: float = Field(0.1, ge=0)
    b_phi: float = Field(0.1, ge=0)
    torque_max: float = Field(2.0, gt=0)


class PlantConfig(_Section):
    vehicle: VehiclePlant = VehiclePlant()
    pan_tilt: PanTiltPlant = PanTiltPlant()


class SimSettings(_Section):
    dt: float = Field(1e-3, gt=0, allow_inf_nan=False)
    duration: float = Field(20.0, gt=0, allow_inf_nan=False)
    integrator: Literal["euler", "rk4"] = "rk4"
    max_samples: int = Field(10_000_000, gt=0)

    @model_validator(mode="after")
    def _fits(self):
        if self.dt > self.duration:
            raise ValueError(f"dt ({self.dt}) must not exceed duration ({self.duration})")
        if self.duration / self.dt + 1 > self.max_samples:
            raise ValueError("duration/dt exceeds the record buffer (sim.max_samples)")
        return self

    @property
    def n_steps(self) -> int:
        return int(math.floor(self.duration / self.dt + 1e-9))


class SweepConfig(_Section):
    controllers: Optional[list[ControllerKind]] = Field(None, min_length=1)
    tau: Optional[list[float]] = Field(None, min_length=1)
    seed: Optional[list[int]] = Field(None, min_length=1)

    @model_validator(mode="after")
    def _values(self):
        if self.tau is not None and any(not (math.isfinite(t) and t > 0) for t in self.tau):
            raise ValueError("every tau must be > 0")
        if self.seed is not None and any(not 0 <= s <= U64_MAX for s in self.seed):
            raise ValueError("seeds must be unsigned 64-bit integers")
        return self


class ReportConfig(_Section):
    out_dir: str = "out"
    figures: bool = True
    rise_low: float = Field(0.1, gt=0, lt=1)
    rise_high: float = Field(0.9, gt=0, lt=1)
    settle_band: float = Field(0.02, gt=0, lt=1)
    ss_window: float = Field(0.05, gt=0, le=1)
    rms_warmup: float = Field(1.0, ge=0)

    @model_validator(mode="after")
    def _order(self):
        if not self.rise_low < self.rise_high:
            raise ValueError("rise_low must be < rise_high")
        return self


class ExperimentConfig(_Section):
    scenario: ScenarioConfig = ScenarioConfig()
    controller: ControllerConfig = ControllerConfig()
    plant: PlantConfig = PlantConfig()
    sim: SimSettings = SimSettings()
    sweep: SweepConfig = SweepConfig()
    report: ReportConfig = ReportConfig()

    def with_overrides(self, **paths) -> "ExperimentConfig":
        """Copy with dotted-path overrides, e.g. ``{"controller.tau": 2.0}``."""
        data = self.model_dump(mode="json")
        for path, value in paths.items():
            node = data
            *parents, leaf = path.split(".")
            for key in parents:
                node = node[key]
            node[leaf] = value
        return parse_config_dict(data)


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"])
        msg = e["msg"]
        if e["type"] == "extra_forbidden":
            msg = "unknown key"
        lines.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(lines)


def parse_config_dict(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"malformed config document: {err}") from None
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    return parse_config_dict(data)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def serialize_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True)


@dataclass(frozen=True)
class RunSpec:
    run_id: str
    config: ExperimentConfig


def enumerate_runs(cfg: ExperimentConfig) -> list[RunSpec]:
    """Cross product of the declared sweep axes in (controller, tau, seed)
    order; undeclared axes contribute the single base value."""
    sw = cfg.sweep
    ctrl = cfg.controller
    kinds = sw.controllers or [ctrl.kind]
    taus = sw.tau or [ctrl.tau]
    seeds = sw.seed or [ctrl.seed]
    runs = []
    for i, (kind, tau, seed) in enumerate(itertools.product(kinds, taus, seeds)):
        run_cfg = cfg.with_overrides(
            **{"controller.kind": kind, "controller.tau": tau, "controller.seed": seed}
        )
        run_id = f"{i:03d}_{cfg.scenario.name}_{kind}_tau{tau:g}_seed{seed}"
        runs.append(RunSpec(run_id, run_cfg))
    return runs

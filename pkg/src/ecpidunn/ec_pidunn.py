"""Error-centric PID driven by an untrained, fixed-seed MLP.

Each tick the controller forms the 6-vector [e_t, u_prev, delta_eps, rho_p,
rho_i, rho_d], pushes it through a randomly initialised network to get a new
rho, reschedules the PID gains from their baselines and evaluates the
tau-stabilised PID law. Weights are drawn once and never updated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .control_core import (
    ImprovedPidConfig,
    NonFiniteError,
    PidGains,
    PidState,
    dynamic_compute,
    improved_pid_terms,
)

INPUT_WIDTH = 6
OUTPUT_WIDTH = 3
DEFAULT_TOPOLOGY = (6, 16, 16, 3)
# Bit generator used for weight draws; recorded in run metadata.
PRNG_ALGORITHM = "numpy.random.PCG64"

ACTIVATIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
    "sigmoid": lambda z: 1.0 / (1.0 + np.exp(-z)),
    "relu": lambda z: np.maximum(z, 0.0),
    "linear": lambda z: z,
}


class ParamVector(NamedTuple):
    rho_p: float = 0.0
    rho_i: float = 0.0
    rho_d: float = 0.0


@dataclass(frozen=True)
class NetInput:
    e_t: float
    u_prev: float
    delta_eps: float
    rho: ParamVector

    def as_array(self) -> np.ndarray:
        return np.array([self.e_t, self.u_prev, self.delta_eps, *self.rho], dtype=float)


@dataclass
class MlpNetwork:
    layer_sizes: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: str = "tanh"
    rho_scale: float = 0.1
    seed: Optional[int] = None

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if not self.rho_scale >= 0:
            raise ValueError(f"rho_scale must be >= 0, got {self.rho_scale!r}")
        for w in self.weights:
            w.setflags(write=False)
        for b in self.biases:
            b.setflags(write=False)

    @property
    def squashed(self) -> bool:
        return math.isfinite(self.rho_scale)


def _check_sizes(layer_sizes: Sequence[int]) -> tuple[int, ...]:
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2:
        raise ValueError("need at least an input and an output width")
    if sizes[0] != INPUT_WIDTH or sizes[-1] != OUTPUT_WIDTH:
        raise ValueError(
            f"topology must start at {INPUT_WIDTH} and end at {OUTPUT_WIDTH}, got {list(sizes)}"
        )
    if any(s < 1 for s in sizes):
        raise ValueError(f"all layer widths must be >= 1, got {list(sizes)}")
    return sizes


def init_network(
    layer_sizes: Sequence[int] = DEFAULT_TOPOLOGY,
    seed: int = 0,
    activation: str = "tanh",
    rho_scale: float = 0.1,
) -> MlpNetwork:
    """Draw weights uniformly in +-1/sqrt(fan_in) from a seeded PCG64 stream.

    Biases are zero. Layers are drawn in order, each weight matrix shaped
    (fan_out, fan_in) and filled row-major.
    """
    sizes = _check_sizes(layer_sizes)
    if seed < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed}")
    rng = np.random.Generator(np.random.PCG64(seed))
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / math.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpNetwork(sizes, weights, biases, activation, rho_scale, seed)


def mlp_forward(net: MlpNetwork, x) -> np.ndarray:
    """Forward pass. Hidden layers use ``net.activation``; the output layer is
    tanh-squashed and multiplied by ``rho_scale``, or left linear when
    ``rho_scale`` is infinite."""
    h = np.asarray(x, dtype=float)
    if h.shape != (INPUT_WIDTH,):
        raise ValueError(f"network input must have length {INPUT_WIDTH}, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise NonFiniteError(f"network input must be finite, got {h}")
    act = ACTIVATIONS[net.activation]
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = w @ h + b
        h = act(z) if k < last else z
    if net.squashed:
        return net.rho_scale * np.tanh(h)
    return h


@dataclass
class StepTrace:
    """What one EC-PIDUNN tick saw and produced."""

    net_input: NetInput
    rho: ParamVector
    gains: PidGains
    control: float


@dataclass
class EcPidunnController:
    net: MlpNetwork
    baseline: PidGains
    cfg: ImprovedPidConfig
    pid_state: PidState
    rho: ParamVector = field(default_factory=ParamVector)
    delta_mode: str = "control"
    gains: Optional[PidGains] = None
    last_trace: Optional[StepTrace] = None

    def __post_init__(self):
        if self.delta_mode not in ("control", "error"):
            raise ValueError(f"delta_mode must be 'control' or 'error', got {self.delta_mode!r}")
        self.rho = ParamVector(*(float(r) for r in self.rho))
        if self.gains is None:
            self.gains = self.baseline

    @property
    def rho_scale(self) -> float:
        return self.net.rho_scale

    @property
    def u_prev(self) -> float:
        return self.pid_state.prev_control

    def step(self, error: float) -> float:
        return ec_pidunn_step(self, error)


def make_controller(
    baseline: PidGains,
    dt: float,
    *,
    tau: float = 1.0,
    rho0: Sequence[float] = (0.0, 0.0, 0.0),
    rho_scale: float = 0.1,
    seed: int = 0,
    topology: Sequence[int] = DEFAULT_TOPOLOGY,
    activation: str = "tanh",
    i_max: float = 1e3,
    u_min: float = -math.inf,
    u_max: float = math.inf,
    delta_mode: str = "control",
) -> EcPidunnController:
    net = init_network(topology, seed, activation, rho_scale)
    cfg = ImprovedPidConfig(tau=tau, i_max=i_max, u_min=u_min, u_max=u_max)
    return EcPidunnController(
        net=net,
        baseline=baseline,
        cfg=cfg,
        pid_state=PidState(dt=dt, i_max=i_max),
        rho=ParamVector(*rho0),
        delta_mode=delta_mode,
    )


def ec_pidunn_step(ctrl: EcPidunnController, error: float) -> float:
    if not math.isfinite(error):
        raise NonFiniteError(f"error must be finite, got {error!r}")
    state = ctrl.pid_state
    u_prev = state.prev_control
    if ctrl.delta_mode == "control":
        delta_eps = error - u_prev
    else:
        prev_e = error if state.prev_error is None else state.prev_error
        delta_eps = error - prev_e

    net_input = NetInput(error, u_prev, delta_eps, ctrl.rho)
    rho = ParamVector(*(float(r) for r in mlp_forward(ctrl.net, net_input.as_array())))
    gains = dynamic_compute(rho, ctrl.baseline, delta_eps, state.dt)
    u = improved_pid_terms(state, gains, ctrl.cfg, error).control

    ctrl.rho = rho
    ctrl.gains = gains
    ctrl.last_trace = StepTrace(net_input, rho, gains, u)
    return u

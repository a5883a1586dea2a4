"""Step-response and tracking metrics for recorded loop traces.

Conventions (all overridable): rise time between 10% and 90% of the step
span, settling band +-2% of the span, steady-state error averaged over the
final 5% of samples. Threshold crossings are located by linear
interpolation between samples. A metric whose threshold is never reached is
``None``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class ResponseMetrics:
    rise_time: Optional[float]
    settling_time: Optional[float]
    overshoot_pct: Optional[float]
    steady_state_error: float
    rms_tracking_error: Optional[float] = None

    def as_dict(self) -> dict:
        return asdict(self)


def _first_crossing(t: np.ndarray, progress: np.ndarray, level: float) -> Optional[float]:
    """Time at which ``progress`` first reaches ``level`` (interpolated)."""
    hit = np.flatnonzero(progress >= level)
    if hit.size == 0:
        return None
    k = hit[0]
    if k == 0:
        return float(t[0])
    p0, p1 = progress[k - 1], progress[k]
    frac = (level - p0) / (p1 - p0)
    return float(t[k - 1] + frac * (t[k] - t[k - 1]))


def compute_step_metrics(
    t,
    y,
    setpoint: float,
    initial: Optional[float] = None,
    *,
    rise_low: float = 0.1,
    rise_high: float = 0.9,
    settle_band: float = 0.02,
    ss_window: float = 0.05,
) -> ResponseMetrics:
    """Metrics of a step from ``initial`` (default ``y[0]``) to ``setpoint``.

    Times are measured from ``t[0]``'s origin, i.e. they are absolute sample
    times, so the step is assumed to be applied at t = 0.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size == 0 or t.shape != y.shape:
        raise ValueError("t and y must be non-empty and the same length")
    y0 = float(y[0]) if initial is None else float(initial)
    span = setpoint - y0
    if span == 0:
        raise ValueError("setpoint equals the initial output; step span is undefined")

    direction = np.sign(span)
    progress = (y - y0) / span

    t_lo = _first_crossing(t, progress, rise_low)
    t_hi = _first_crossing(t, progress, rise_high)
    rise = None if t_lo is None or t_hi is None else t_hi - t_lo

    outside = np.flatnonzero(np.abs(y - setpoint) > settle_band * abs(span))
    if outside.size == 0:
        settling = float(t[0])
    elif outside[-1] == y.size - 1:
        settling = None
    else:
        settling = float(t[outside[-1] + 1])

    peak = float(np.max(direction * (y - setpoint)))
    overshoot = max(0.0, peak / abs(span)) * 100.0

    n_tail = max(1, int(round(ss_window * y.size)))
    sse = float(np.mean(np.abs(setpoint - y[-n_tail:])))
    return ResponseMetrics(rise, settling, overshoot, sse)


def compute_rms_error(t, setpoint, output, warmup: float = 1.0) -> float:
    """Root-mean-square of (setpoint - output) over samples with t >= t[0] + warmup."""
    t = np.asarray(t, dtype=float)
    err = np.asarray(setpoint, dtype=float) - np.asarray(output, dtype=float)
    mask = t >= t[0] + warmup
    if not mask.any():
        raise ValueError(f"no samples after the {warmup}s warm-up window")
    return float(np.sqrt(np.mean(err[mask] ** 2)))


def loop_metrics(trace, report=None) -> ResponseMetrics:
    """Step metrics plus RMS tracking error for one recorded loop.

    For a time-varying setpoint the step metrics refer to the final setpoint.
    If the final setpoint equals the initial output the span is zero, so rise,
    settling and overshoot are ``None``.
    """
    kw = {}
    warmup = 1.0
    if report is not None:
        kw = dict(rise_low=report.rise_low, rise_high=report.rise_high,
                  settle_band=report.settle_band, ss_window=report.ss_window)
        warmup = report.rms_warmup
    t, sp, out = trace["t"], trace["setpoint"], trace["output"]
    try:
        rms = compute_rms_error(t, sp, out, warmup)
    except ValueError:
        rms = None
    final_sp = float(sp[-1])
    if final_sp == float(out[0]):
        n_tail = max(1, int(round(kw.get("ss_window", 0.05) * len(out))))
        sse = float(np.mean(np.abs(sp[-n_tail:] - out[-n_tail:])))
        return ResponseMetrics(None, None, None, sse, rms)
    m = compute_step_metrics(t, out, final_sp, **kw)
    return ResponseMetrics(m.rise_time, m.settling_time, m.overshoot_pct, m.steady_state_error, rms)

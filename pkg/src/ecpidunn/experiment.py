"""Batch execution of an experiment: enumerate runs, simulate, write artifacts."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__, artifacts
from .config import ExperimentConfig, RunSpec, enumerate_runs
from .metrics import loop_metrics
from .sim_engine import DivergenceError, Trajectory, run_scenario

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DIVERGED = 2
EXIT_IO = 3


@dataclass
class RunOutcome:
    spec: RunSpec
    trajectory: Optional[Trajectory] = None
    error: Optional[str] = None

    @property
    def status(self) -> str:
        return "ok" if self.trajectory is not None else "diverged"


@dataclass
class ExperimentResult:
    exit_code: int
    out_dir: Path
    outcomes: list[RunOutcome] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)


def execute_run(spec: RunSpec) -> RunOutcome:
    try:
        return RunOutcome(spec, run_scenario(spec.config))
    except DivergenceError as err:
        return RunOutcome(spec, error=str(err))


def _summary_rows(outcome: RunOutcome) -> list[dict]:
    c = outcome.spec.config
    base = {
        "run_id": outcome.spec.run_id,
        "scenario": c.scenario.name,
        "controller": c.controller.kind,
        "tau": c.controller.tau,
        "seed": c.controller.seed,
        "status": outcome.status,
    }
    if outcome.trajectory is None:
        loops = ("speed", "steering") if c.scenario.name == "vehicle" else ("pan", "tilt")
        return [dict(base, loop=name) for name in loops]
    rows = []
    for name, trace in outcome.trajectory.loops.items():
        rows.append(dict(base, loop=name, **loop_metrics(trace, c.report).as_dict()))
    return rows


def run_experiment(
    cfg: ExperimentConfig,
    out_dir=None,
    jobs: int = 1,
    figures: Optional[bool] = None,
) -> ExperimentResult:
    """Run every enumerated run and write CSVs, ``summary.csv``,
    ``metadata.json`` and (optionally) PNG figures under ``out_dir``.

    A diverged run is reported and skipped; its siblings still run. The
    exit code is 2 if any run diverged, 3 on an I/O failure, else 0.
    """
    out = Path(out_dir if out_dir is not None else cfg.report.out_dir)
    figures = cfg.report.figures if figures is None else figures
    specs = enumerate_runs(cfg)

    if jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(execute_run, specs))
    else:
        outcomes = [execute_run(s) for s in specs]

    result = ExperimentResult(EXIT_OK, out, outcomes)
    for o in outcomes:
        if o.error:
            log.error("run %s diverged: %s", o.spec.run_id, o.error)
            result.exit_code = EXIT_DIVERGED
        result.rows.extend(_summary_rows(o))

    try:
        out.mkdir(parents=True, exist_ok=True)
        for o in outcomes:
            if o.trajectory is not None:
                result.files += artifacts.write_trajectory(o.trajectory, out / o.spec.run_id)
        summary = out / "summary.csv"
        artifacts.write_summary(result.rows, summary, _settings(cfg))
        meta = out / "metadata.json"
        artifacts.write_metadata(meta, _metadata(cfg, outcomes))
        result.files += [summary, meta]
        if figures:
            result.files += _figures(cfg, outcomes, result.rows, out)
    except OSError as err:
        log.error("I/O failure writing %s: %s", getattr(err, "filename", None) or out, err)
        result.exit_code = EXIT_IO
    return result


def _settings(cfg: ExperimentConfig) -> dict:
    r = cfg.report
    return {
        "rise_band": [r.rise_low, r.rise_high],
        "settle_band": r.settle_band,
        "ss_window": r.ss_window,
        "rms_warmup": r.rms_warmup,
        "dt": cfg.sim.dt,
        "version": __version__,
    }


def _metadata(cfg: ExperimentConfig, outcomes: list[RunOutcome]) -> dict:
    return {
        "version": __version__,
        "config": cfg.model_dump(mode="json"),
        "runs": [
            {
                "run_id": o.spec.run_id,
                "status": o.status,
                "error": o.error,
                "controller": o.spec.config.controller.kind,
                "tau": o.spec.config.controller.tau,
                "seed": o.spec.config.controller.seed,
                "provenance": o.trajectory.metadata if o.trajectory is not None else None,
            }
            for o in outcomes
        ],
    }


def _figures(cfg, outcomes, rows, out: Path) -> list[Path]:
    from . import report

    paths = []
    done = [o for o in outcomes if o.trajectory is not None]
    for o in done:
        c = o.spec.config.controller
        title = f"{c.kind}  tau={c.tau:g}  seed={c.seed}"
        paths.append(report.plot_run(o.trajectory, out / o.spec.run_id / "response.png", title))
    if len(done) > 1:
        labelled = {_label(o): o.trajectory for o in done}
        for loop in done[0].trajectory.loops:
            paths.append(report.plot_comparison(labelled, loop, out / f"compare_{loop}.png"))
    if cfg.sweep.tau and len(cfg.sweep.tau) > 1:
        paths.append(report.plot_tau_sweep(rows, out / "tau_sweep.png"))
    return paths


def _label(o: RunOutcome) -> str:
    c = o.spec.config.controller
    if c.kind == "classical":
        return "classical"
    return f"ec_pidunn tau={c.tau:g} seed={c.seed}"

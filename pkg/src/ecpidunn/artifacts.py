"""On-disk formats: per-loop time-series CSVs, the summary table and the
metadata file.

Every CSV opens with ``# key = <json>`` provenance lines, followed by the
column header row and data rows. Numbers are written with 12 significant
digits so files are stable across runs and platforms.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .sim_engine import COLUMNS, LoopTrace, Trajectory

PROVENANCE_KEYS = ("scenario", "controller", "loop", "dt", "duration", "integrator", "tau", "rho0",
                   "rho_scale", "seed", "topology", "activation", "delta_mode", "prng", "plant",
                   "construction")
SUMMARY_COLUMNS = ("run_id", "scenario", "controller", "tau", "seed", "loop", "status",
                   "rise_time", "settling_time", "overshoot_pct", "steady_state_error",
                   "rms_tracking_error")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    return f"{float(x):.12g}"


def _header_lines(items: dict) -> list[str]:
    return [f"# {k} = {json.dumps(v, sort_keys=True)}" for k, v in items.items()]


def loop_provenance(traj: Trajectory, loop: str) -> dict:
    meta = traj.metadata
    prov = {k: meta[k] for k in PROVENANCE_KEYS if k in meta}
    prov["loop"] = loop
    prov["construction"] = meta["loops"][loop]
    # the loop's own seed wins over the shared one when overridden
    prov["seed"] = meta["loops"][loop].get("seed", meta["seed"])
    return {k: prov[k] for k in PROVENANCE_KEYS if k in prov}


def render_loop_csv(trace: LoopTrace, provenance: dict) -> str:
    buf = io.StringIO()
    for line in _header_lines(provenance):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in trace.data:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_trajectory(traj: Trajectory, run_dir: Path) -> list[Path]:
    run_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, trace in traj.loops.items():
        path = run_dir / f"{name}.csv"
        path.write_text(render_loop_csv(trace, loop_provenance(traj, name)))
        paths.append(path)
    return paths


def read_header(path) -> dict:
    """Parse the ``# key = value`` provenance block of a CSV written here."""
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition("=")
            out[key.strip()] = json.loads(value)
    return out


def read_loop_csv(path) -> tuple[dict, dict[str, np.ndarray]]:
    header = read_header(path)
    with open(path) as fh:
        rows = list(csv.reader(ln for ln in fh if not ln.startswith("#")))
    names, body = rows[0], np.array(rows[1:], dtype=float).reshape(-1, len(rows[0]))
    return header, {c: body[:, names.index(c)] for c in COLUMNS}


def write_summary(rows: Iterable[dict], path: Path, settings: dict) -> None:
    lines = _header_lines(settings)
    buf = io.StringIO()
    for line in lines:
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for r in rows:
        writer.writerow([fmt(r.get(c)) for c in SUMMARY_COLUMNS])
    path.write_text(buf.getvalue())


def read_summary(path) -> list[dict]:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def write_metadata(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def parse_optional(text: str) -> Optional[float]:
    return None if text == "" else float(text)

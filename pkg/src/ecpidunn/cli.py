"""Command line front end.

    ecpidunn run --config cfg.json [--out DIR] [--seed N] [--controller K] [--scenario S]
    ecpidunn tau-sweep --config cfg.json --tau 0.5 1 2 4 [--out DIR]

Exit codes: 0 success, 1 validation error, 2 a run diverged, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .experiment import EXIT_IO, EXIT_OK, EXIT_VALIDATION, run_experiment

log = logging.getLogger("ecpidunn")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="JSON experiment config")
    p.add_argument("--out", help="output directory (overrides report.out_dir)")
    p.add_argument("--seed", type=int, help="network seed (overrides controller.seed)")
    p.add_argument("--controller", choices=["classical", "ec_pidunn"],
                   help="controller kind (overrides controller.kind)")
    p.add_argument("--scenario", choices=["vehicle", "pan_tilt"],
                   help="scenario (overrides scenario.name)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecpidunn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="run a config (single run, comparison or sweep)"))
    sweep = sub.add_parser("tau-sweep", help="sweep the stabilizing factor")
    _common(sweep)
    sweep.add_argument("--tau", type=float, nargs="+", required=True, help="tau values")
    return parser


def _overrides(args) -> dict:
    ov = {}
    if args.seed is not None:
        ov["controller.seed"] = args.seed
    if args.controller is not None:
        ov["controller.kind"] = args.controller
        ov["sweep.controllers"] = None
    if args.scenario is not None:
        ov["scenario.name"] = args.scenario
    if args.command == "tau-sweep":
        ov["sweep.tau"] = args.tau
        ov["controller.kind"] = "ec_pidunn"
        ov["sweep.controllers"] = None
    return ov


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        ov = _overrides(args)
        if ov:
            cfg = cfg.with_overrides(**ov)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"cannot read config: {err}", file=sys.stderr)
        return EXIT_IO

    result = run_experiment(cfg, out_dir=args.out, jobs=args.jobs,
                            figures=False if args.no_figures else None)
    for row in result.rows:
        print(_row_line(row))
    if result.exit_code == EXIT_OK:
        print(f"wrote {len(result.files)} files to {result.out_dir}")
    return result.exit_code


def _row_line(r: dict) -> str:
    def f(key, unit=""):
        v = r.get(key)
        return "-" if v is None else f"{v:.4g}{unit}"

    return (f"{r['run_id']:<40} {r['loop']:<9} {r['status']:<8} rise={f('rise_time', 's')} "
            f"settle={f('settling_time', 's')} overshoot={f('overshoot_pct', '%')} "
            f"sse={f('steady_state_error')} rms={f('rms_tracking_error')}")


if __name__ == "__main__":
    sys.exit(main())

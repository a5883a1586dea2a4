"""Figures rendered next to the CSV output.

Uses the non-interactive Agg backend; nothing is ever shown on screen.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

UNITS = {
    "speed": ("speed [m/s]", "force [N]"),
    "steering": ("steering output [rad]", "steering rate [rad/s]"),
    "pan": ("pan angle [rad]", "torque [N m]"),
    "tilt": ("tilt angle [rad]", "torque [N m]"),
}

STYLE = {
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "font.size": 9,
}


def plot_run(traj, path: Path, title: str = "") -> Path:
    """Output vs. setpoint (top row) and control (bottom row), one column per loop."""
    names = list(traj.loops)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, len(names), figsize=(4.2 * len(names), 5.2),
                                 sharex=True, squeeze=False)
        for j, name in enumerate(names):
            tr = traj.loops[name]
            ylab, ulab = UNITS.get(name, ("output", "control"))
            ax = axes[0, j]
            ax.plot(tr["t"], tr["setpoint"], "--", color="0.4", lw=1, label="setpoint")
            ax.plot(tr["t"], tr["output"], color="C0", lw=1.3, label="output")
            ax.set_title(name)
            ax.set_ylabel(ylab)
            ax.legend(loc="best")
            axes[1, j].plot(tr["t"], tr["control"], color="C3", lw=1)
            axes[1, j].set_ylabel(ulab)
            axes[1, j].set_xlabel("t [s]")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_comparison(trajs: dict, loop: str, path: Path) -> Path:
    """Overlay one loop's response from several runs (keyed by label)."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.4, 3.8))
        first = next(iter(trajs.values())).loops[loop]
        ax.plot(first["t"], first["setpoint"], "--", color="0.4", lw=1, label="setpoint")
        for k, (label, traj) in enumerate(trajs.items()):
            tr = traj.loops[loop]
            ax.plot(tr["t"], tr["output"], color=f"C{k}", lw=1.2, label=label)
        ax.set_xlabel("t [s]")
        ax.set_ylabel(UNITS.get(loop, ("output",))[0])
        ax.set_title(f"{loop} response")
        ax.legend(loc="best", fontsize=7)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_tau_sweep(rows: list[dict], path: Path) -> Path:
    """Overshoot and settling time against tau, one line per loop."""
    loops = sorted({r["loop"] for r in rows})
    with plt.rc_context(STYLE):
        fig, (ax_os, ax_st) = plt.subplots(1, 2, figsize=(8.4, 3.4))
        for k, loop in enumerate(loops):
            pts = sorted((r["tau"], r["overshoot_pct"], r["settling_time"])
                         for r in rows if r["loop"] == loop and r["status"] == "ok")
            taus = [p[0] for p in pts]
            ax_os.plot(taus, [p[1] if p[1] is not None else float("nan") for p in pts],
                       "o-", color=f"C{k}", label=loop)
            ax_st.plot(taus, [p[2] if p[2] is not None else float("nan") for p in pts],
                       "o-", color=f"C{k}", label=loop)
        for ax in (ax_os, ax_st):
            ax.set_xscale("log", base=2)
            ax.set_xlabel("tau")
            ax.legend()
        ax_os.set_ylabel("overshoot [%]")
        ax_st.set_ylabel("settling time [s]")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path

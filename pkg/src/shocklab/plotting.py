"""Figures drawn from the CSV artifacts of a run directory.

matplotlib is an optional dependency; without it ``render_figures`` returns
an empty list and the CSV files remain the plot data.
"""
from __future__ import annotations

from pathlib import Path

from .harness.io import read_columns


def have_matplotlib() -> bool:
    try:
        import matplotlib  # noqa: F401
    except ImportError:
        return False
    return True


def _pyplot():
    try:
        import matplotlib
    except ImportError:
        return None
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def render_figures(directory) -> list[Path]:
    plt = _pyplot()
    if plt is None:
        return []
    d = Path(directory)
    made = []

    def save(fig, name):
        p = d / name
        fig.tight_layout()
        fig.savefig(p, dpi=120)
        plt.close(fig)
        made.append(p)

    if (d / "trace.csv").exists():
        c = read_columns(d / "trace.csv")
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(c["t"], c["wre"])
        ax.set_xlabel("t")
        ax.set_ylabel("weighted relative entropy")
        save(fig, "wre_vs_t.png")
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(c["t"], c["X"], label="X(t)")
        if "sigma_t" in c:
            ax.plot(c["t"], c["static_shift"], label="sigma t + X(t)")
            ax.plot(c["t"], c["sigma_t"], "--", label="sigma t")
        ax.set_xlabel("t")
        ax.legend()
        save(fig, "shift_vs_t.png")
    if (d / "profile.csv").exists():
        c = read_columns(d / "profile.csv")
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(c["xi"], c["v"], label="v")
        ax.plot(c["xi"], c["h"], label="h")
        ax.set_xlabel("xi")
        ax.legend()
        save(fig, "profile.png")
    if (d / "sweep_X.csv").exists():
        c = read_columns(d / "sweep_X.csv")
        fig, ax = plt.subplots(figsize=(6, 4))
        for nu in sorted(set(c["nu"]), reverse=True):
            idx = [i for i, n in enumerate(c["nu"]) if n == nu]
            ax.plot([c["t"][i] for i in idx], [c["X_nu"][i] for i in idx], label=f"nu={nu:g}")
        ax.set_xlabel("t")
        ax.set_ylabel("X_nu")
        ax.legend()
        save(fig, "sweep_shift.png")
    if (d / "poincare_argmax.csv").exists():
        c = read_columns(d / "poincare_argmax.csv")
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(c["y"], c["W"])
        ax.set_xlabel("y")
        ax.set_ylabel("W")
        save(fig, "poincare_argmax.png")
    return made

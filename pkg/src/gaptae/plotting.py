"""Log-log error-curve figures written straight to file."""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "gap": dict(color="tab:red", lw=1.8, label="clipped bonus"),
    "unclipped": dict(color="tab:blue", lw=1.2, label="unclipped bonus"),
    "simulator": dict(color="tab:purple", lw=1.2, label="simulator, uniform"),
    "mab": dict(color="tab:orange", lw=1.2, label="bandit, uniform"),
}


def plot_error_curves(
    curves: dict[str, tuple[Sequence[float], Sequence[float]]],
    path,
    reference: Optional[tuple[Sequence[float], Sequence[float]]] = None,
    title: str = "planning error",
) -> Path:
    """Write an SVG of planning error against episodes, log-log.

    Zero errors cannot sit on a log axis and are dropped from the drawing
    (they stay in the CSV).
    """
    path = Path(path)
    plt.rcParams["svg.hashsalt"] = "gaptae"  # stable element ids across runs
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for name, (ks, errs) in curves.items():
        pts = [(k, e) for k, e in zip(ks, errs) if e > 0]
        if not pts:
            continue
        style = STYLE.get(name, dict(lw=1.2, label=name))
        ax.plot(*zip(*pts), marker="o", ms=3, **style)
    if reference is not None:
        ax.plot(reference[0], reference[1], ls=":", color="tab:green", lw=1.5, label=r"minimax $\propto 1/\sqrt{k}$")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("episodes $k$")
    ax.set_ylabel(r"$V^*_1(x_1) - V^{\pi}_1(x_1)$")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if ax.lines:
        ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path

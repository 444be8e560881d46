"""Matplotlib figures written next to the grid and domination outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dynamics import DominationReport, GridMode, GridResult  # noqa: E402

_MODE_LABEL = {
    GridMode.G_PLUS: r"$G^+$",
    GridMode.G_MINUS: r"$G^-$",
    GridMode.G_MAX: r"$\max(G^+, G^-)$",
    GridMode.K_MEMBERSHIP: "bounded orbits (1: forward, 2: backward, 3: both)",
}


def plot_grid(result: GridResult, path: str | Path, title: str | None = None, dpi: int = 120) -> Path:
    job = result.job
    cx, cy = job.center
    extent = (cx - job.width / 2, cx + job.width / 2, cy - job.height / 2, cy + job.height / 2)
    fig, ax = plt.subplots(figsize=(5.5, 4.8))
    cmap = "viridis" if job.mode is not GridMode.K_MEMBERSHIP else plt.get_cmap("Greys", 4)
    im = ax.imshow(result.values, origin="upper", extent=extent, cmap=cmap, interpolation="nearest")
    fig.colorbar(im, ax=ax, shrink=0.85, label=_MODE_LABEL[job.mode])
    ax.set_xlabel("s")
    ax.set_ylabel("t")
    ax.set_title(title or f"{job.mode.value}, budget {job.budget}")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_domination(reports: dict[str, DominationReport], path: str | Path, dpi: int = 120) -> Path:
    """Scatter of ``G+`` against ``G-`` for each sampled region, with the diagonal."""
    fig, ax = plt.subplots(figsize=(5, 5))
    hi = 0.0
    for region, rep in reports.items():
        gp, gm = rep.g_plus, rep.g_minus
        ax.scatter(gp, gm, s=9, label=f"{region}: {rep.certified}/{rep.samples} certified ({rep.expected})")
        hi = max(hi, float(np.max(gp)), float(np.max(gm)))
    ax.plot([0, hi], [0, hi], color="0.5", lw=0.8, ls="--")
    ax.set_xlabel(r"$G^+$")
    ax.set_ylabel(r"$G^-$")
    ax.legend(fontsize=8, loc="upper left")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=dpi, metadata={"Software": None})
    plt.close(fig)
    return path

"""Figures written next to CLI reports.

Figures are built on the object-oriented matplotlib API (no pyplot global
state) and saved without a software/date stamp, so identical inputs give
identical files.
"""

from __future__ import annotations

import io
import os
from collections.abc import Sequence

import numpy as np
from matplotlib.figure import Figure

from .fileio import atomic_write

FIGSIZE = (5.0, 3.4)
DPI = 120


def _save(fig: Figure, path: str) -> None:
    ext = os.path.splitext(path)[1].lstrip(".").lower() or "png"
    # Drop the software/date stamps that would make output bytes vary.
    metadata = {
        "png": {"Software": None},
        "pdf": {"Creator": None, "Producer": None, "CreationDate": None},
        "svg": {"Creator": None, "Date": None},
    }.get(ext)
    buf = io.BytesIO()
    fig.savefig(buf, format=ext, dpi=DPI, metadata=metadata)
    atomic_write(path, buf.getvalue())


def _axes(xlabel: str, ylabel: str):
    fig = Figure(figsize=FIGSIZE, layout="constrained")
    ax = fig.add_subplot()
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    return fig, ax


def mean_std_scatter(means: Sequence[float], stds: Sequence[float], path: str) -> None:
    """One point per document: sample mean against sample standard deviation."""
    fig, ax = _axes("sample mean", "sample std")
    ax.scatter(means, stds, s=4, alpha=0.4, linewidths=0)
    _save(fig, path)


def std_by_rank(ranks: Sequence[int], stds: Sequence[float], path: str) -> None:
    """Average score spread at each rank position, with the interquartile band."""
    ranks = np.asarray(ranks)
    stds = np.asarray(stds, dtype=np.float64)
    positions = np.unique(ranks)
    groups = [stds[ranks == r] for r in positions]
    fig, ax = _axes("rank", "sample std")
    ax.fill_between(
        positions,
        [np.percentile(g, 25) for g in groups],
        [np.percentile(g, 75) for g in groups],
        alpha=0.25,
        linewidth=0,
    )
    ax.plot(positions, [g.mean() for g in groups], linewidth=1.2)
    _save(fig, path)


def bound_curves(deltas: Sequence[float], confidences: np.ndarray, bound: float, path: str) -> None:
    """Confidence against input scale for each probed direction, with the ceiling."""
    fig, ax = _axes("input scale", "confidence")
    for row in np.atleast_2d(confidences):
        ax.plot(deltas, row, color="tab:blue", alpha=0.3, linewidth=0.8)
    ax.axhline(bound, color="tab:red", linestyle="--", linewidth=1.0)
    if min(deltas) > 0:
        ax.set_xscale("log")
    ax.set_ylim(0.45, 1.01)
    _save(fig, path)

"""Figures written next to the report tables."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (4.8, 3.2),
    "figure.dpi": 120,
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.bbox": "tight",
}


def ecdf(values: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    x = np.sort(np.asarray(values, dtype=float))
    return x, np.arange(1, x.size + 1) / max(x.size, 1)


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def count_cdf(counts: Mapping[str, Sequence[float]], path: Path, xlabel: str = "changepoints per trace") -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, values in sorted(counts.items()):
            if len(values) == 0:
                continue
            x, y = ecdf(values)
            ax.step(x, y, where="post", label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel("CDF")
        ax.set_ylim(0, 1.02)
        if ax.get_legend_handles_labels()[0]:
            ax.legend(frameon=False)
        return _save(fig, path)


def change_character(
    changes: Mapping[str, tuple[Sequence[float], Sequence[float]]], path: Path
) -> Path:
    """Level vs volatility difference of every detected change, one panel per method."""
    names = sorted(changes)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, max(len(names), 1), sharex=True, sharey=True,
                                 figsize=(3.2 * max(len(names), 1), 3.0), squeeze=False)
        for ax, name in zip(axes[0], names):
            level, vol = (np.asarray(v, dtype=float) for v in changes[name])
            if level.size:
                ax.hexbin(np.log10(level + 1), np.log10(vol + 1), gridsize=30, mincnt=1, cmap="viridis")
            ax.set_title(name)
            ax.set_xlabel("log10(1 + level diff / ms)")
        axes[0][0].set_ylabel("log10(1 + std diff / ms)")
        return _save(fig, path)


def precision_cdf(precisions: Mapping[str, Sequence[float]], path: Path) -> Path:
    return count_cdf(precisions, path, xlabel="share of path changes matched")

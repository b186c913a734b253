"""Matplotlib renderers for the report commands.

Each function writes one PNG next to the delimited output it
illustrates.  The Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .classify import PairScore
from .wavelet import BAND_LABELS

_SAVE_OPTS = {"dpi": 150, "bbox_inches": "tight"}


def save_correlation_heatmap(values: np.ndarray, path: str | Path, title: str = "") -> None:
    """Payload-band vs change-band correlation heatmap, fixed [-1, 1] scale."""
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    im = ax.imshow(values, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(12), BAND_LABELS, rotation=90, fontsize=7)
    ax.set_yticks(range(12), BAND_LABELS, fontsize=7)
    ax.set_xlabel("stego - cover difference sub-band")
    ax.set_ylabel("payload sub-band")
    if title:
        ax.set_title(title)
    fig.colorbar(im, ax=ax, label="Pearson correlation")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_pair_score_heatmap(table: list[PairScore], best: tuple[int, int], path: str | Path) -> None:
    """Mean CV accuracy per component pair on a 12x12 upper-triangle grid."""
    grid = np.full((12, 12), np.nan)
    for row in table:
        grid[row.i - 1, row.j - 1] = row.mean_acc
    fig, ax = plt.subplots(figsize=(6.4, 5.6))
    masked = np.ma.masked_invalid(grid)
    im = ax.imshow(masked, cmap="viridis")
    ax.set_xticks(range(12), [str(i) for i in range(1, 13)])
    ax.set_yticks(range(12), [str(i) for i in range(1, 13)])
    ax.set_xlabel("component j")
    ax.set_ylabel("component i")
    ax.set_title(f"pair grid search (best: {best[0]},{best[1]})")
    ax.plot(best[1] - 1, best[0] - 1, "r*", markersize=12)
    fig.colorbar(im, ax=ax, label="mean CV accuracy")
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_fold_accuracies(fold_accuracies: list[float], mean_accuracy: float, path: str | Path) -> None:
    """Per-fold accuracy bars with the mean as a reference line."""
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    folds = np.arange(1, len(fold_accuracies) + 1)
    ax.bar(folds, fold_accuracies, color="#4878a8")
    ax.axhline(mean_accuracy, color="#c44e52", linestyle="--", label=f"mean {mean_accuracy:.3f}")
    ax.set_xticks(folds)
    ax.set_xlabel("fold")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)

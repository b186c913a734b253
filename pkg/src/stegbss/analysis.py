"""Sub-band mixing analysis: embedding-change maps and their correlation
with the payload's sub-bands.

``correlation_matrix`` answers "which payload sub-bands leak into which
sub-bands of the stego image": rows are payload sub-bands, columns are
stego-minus-cover difference sub-bands, each entry the Pearson
correlation averaged over the supplied triplets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wavelet import BAND_LABELS, SubBandStack, haar_dwt


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Population Pearson correlation; zero-variance input yields 0.0."""
    return _pearson_flagged(x, y)[0]


def _pearson_flagged(x: np.ndarray, y: np.ndarray) -> tuple[float, bool]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = np.mean(dx * dx)
    vy = np.mean(dy * dy)
    if vx == 0.0 or vy == 0.0:
        return 0.0, True
    r = np.mean(dx * dy) / np.sqrt(vx * vy)
    return float(np.clip(r, -1.0, 1.0)), False


def embedding_changes(cover: np.ndarray, stego: np.ndarray) -> SubBandStack:
    """Band-wise difference dwt(stego) - dwt(cover)."""
    cover_stack = haar_dwt(cover)
    stego_stack = haar_dwt(stego)
    return SubBandStack(
        stego_stack.bands - cover_stack.bands,
        cover_stack.source_height,
        cover_stack.source_width,
    )


@dataclass
class CorrelationMatrix:
    """12x12 payload-band vs change-band correlations, averaged per entry.

    ``degenerate[r, c]`` marks entries where at least one contributing
    triplet had a zero-variance band (those contributions count as 0
    instead of NaN).
    """

    values: np.ndarray
    degenerate: np.ndarray
    row_labels: tuple[str, ...] = BAND_LABELS
    col_labels: tuple[str, ...] = BAND_LABELS


def correlation_matrix(
    triplets: list[tuple[np.ndarray, np.ndarray, np.ndarray]],
) -> CorrelationMatrix:
    """Average per-triplet correlation of payload bands vs change bands.

    ``triplets`` holds (cover, payload, stego) rasters of identical
    dimensions.  Correlations are computed per triplet and averaged
    entrywise, not pooled.
    """
    if not triplets:
        raise ValueError("need at least one triplet")
    total = np.zeros((12, 12))
    degenerate = np.zeros((12, 12), dtype=bool)
    shape = np.asarray(triplets[0][0]).shape
    for cover, payload, stego in triplets:
        cover = np.asarray(cover, dtype=np.float64)
        payload = np.asarray(payload, dtype=np.float64)
        stego = np.asarray(stego, dtype=np.float64)
        if cover.shape != shape or payload.shape != shape or stego.shape != shape:
            raise ValueError("all triplet images must share one shape")
        payload_rows = haar_dwt(payload).bands.reshape(12, -1)
        change_rows = embedding_changes(cover, stego).bands.reshape(12, -1)
        for r in range(12):
            for c in range(12):
                value, flag = _pearson_flagged(payload_rows[r], change_rows[c])
                total[r, c] += value
                degenerate[r, c] |= flag
    return CorrelationMatrix(total / len(triplets), degenerate)

"""Per-image PCA over the 12 sub-bands and FastICA on a component pair.

The 12 flattened sub-bands of one image are treated as 12 observed
mixtures (one row per band, one column per pixel position).  PCA orders
the mixture directions by explained variance; hiding schemes leave most
of their trace in the weak directions, so a pair of weak components is
projected out and separated into independent components with the
fixed-point FastICA iteration (logcosh contrast, symmetric
decorrelation).

Conventions used throughout:

* covariances use the population divisor N, matching the orthonormal
  wavelet energy bookkeeping;
* PCA component indices are 1-based with 1 = largest explained
  variance, so "components 9 and 11" denote the 9th and 11th largest;
* PCA loading signs are fixed so each loading's largest-magnitude entry
  is positive (ties broken by lowest index), making fits reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .wavelet import SubBandStack

N_BANDS = 12


@dataclass
class ObservationMatrix:
    """Mean-centered 12xN matrix of flattened sub-bands."""

    data: np.ndarray        # (12, N), rows centered
    row_means: np.ndarray   # (12,) means removed at centering time


@dataclass
class PCAModel:
    components: np.ndarray                  # (12, 12), one loading vector per row
    eigenvalues: np.ndarray                 # (12,) nonnegative, descending
    explained_variance_ratio: np.ndarray    # (12,) sums to 1 when variance > 0


@dataclass
class ICAParams:
    """Fixed-point iteration settings.

    Defaults: logcosh contrast (g = tanh), symmetric decorrelation,
    tolerance 1e-4, at most 200 iterations, seeded random orthogonal
    start.
    """

    contrast: str = "logcosh"
    tolerance: float = 1e-4
    max_iterations: int = 200
    seed: int = 0
    decorrelation: str = "symmetric"

    def __post_init__(self):
        if self.contrast != "logcosh":
            raise ValueError(f"unsupported contrast {self.contrast!r}")
        if self.decorrelation != "symmetric":
            raise ValueError(f"unsupported decorrelation {self.decorrelation!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class ComponentPair:
    """Two unit-variance independent components estimated from one image.

    ``unmixing`` maps the whitened projections to the components; rows
    follow the (c1, c2) order.  ``converged`` is False when the
    iteration stopped at ``max_iterations`` without meeting the
    tolerance; the last iterate is still returned because downstream
    moment features remain well-defined.
    """

    c1: np.ndarray
    c2: np.ndarray
    unmixing: np.ndarray
    selected_indices: tuple[int, int] | None = None
    converged: bool = True
    n_iter: int = 0


def build_observations(stack: SubBandStack) -> ObservationMatrix:
    """Flatten each sub-band row-major into one row and center the rows."""
    rows = stack.bands.reshape(N_BANDS, -1).astype(np.float64)
    means = rows.mean(axis=1)
    return ObservationMatrix(rows - means[:, None], means)


def pca_fit(obs: ObservationMatrix) -> PCAModel:
    """Eigendecompose the 12x12 sample covariance of the observations."""
    data = obs.data
    n = data.shape[1]
    if n < N_BANDS:
        raise ValueError(f"need at least {N_BANDS} samples per band, got {n}")
    if not np.all(np.isfinite(data)):
        raise ValueError("observations contain non-finite values")

    cov = data @ data.T / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.maximum(eigvals[order], 0.0)
    components = eigvecs[:, order].T.copy()

    # Deterministic sign: largest-magnitude entry of each loading positive.
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0

    total = eigvals.sum()
    ratio = eigvals / total if total > 0 else np.zeros(N_BANDS)
    return PCAModel(components, eigvals, ratio)


def pca_project(obs: ObservationMatrix, model: PCAModel, indices: tuple[int, int]) -> np.ndarray:
    """Project the centered observations onto two selected loadings.

    ``indices`` are 1-based PCA component indices (1 = largest
    variance).  Returns a 2xN matrix.
    """
    i, j = indices
    if i == j:
        raise ValueError(f"component indices must be distinct, got ({i}, {j})")
    for idx in (i, j):
        if not 1 <= idx <= N_BANDS:
            raise ValueError(f"component index {idx} out of range 1..{N_BANDS}")
    return model.components[[i - 1, j - 1]] @ obs.data


def _sym_decorrelation(w: np.ndarray) -> np.ndarray:
    """Return (w w^T)^(-1/2) w, the symmetric orthonormalization."""
    s, u = np.linalg.eigh(w @ w.T)
    return (u / np.sqrt(s)) @ u.T @ w


def fastica(x: np.ndarray, params: ICAParams, selected_indices: tuple[int, int] | None = None) -> ComponentPair:
    """Separate a 2xN mixture into two independent components.

    The mixture is whitened through the eigendecomposition of its 2x2
    covariance, then the symmetric fixed-point update with the logcosh
    contrast runs until the largest row-wise direction change falls
    below ``params.tolerance`` or ``params.max_iterations`` is reached.
    Components come back zero-mean with unit (population) variance.

    Raises ValueError("degenerate projection") when a row has zero
    variance or the two rows are numerically collinear, because
    whitening is then rank-deficient.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != 2:
        raise ValueError(f"expected a 2xN mixture matrix, got shape {x.shape}")
    n = x.shape[1]
    if n < 2:
        raise ValueError("need at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise ValueError("mixture contains non-finite values")

    xc = x - x.mean(axis=1, keepdims=True)
    cov = xc @ xc.T / n
    if cov[0, 0] == 0.0 or cov[1, 1] == 0.0:
        raise ValueError("degenerate projection: a mixture row has zero variance")
    d, e = np.linalg.eigh(cov)
    if d[0] <= d[1] * 1e-12:
        raise ValueError("degenerate projection: mixture rows are collinear")
    white = (e / np.sqrt(d)).T @ xc  # covariance of `white` is the identity

    rng = np.random.default_rng(params.seed)
    w = _sym_decorrelation(rng.standard_normal((2, 2)))

    converged = False
    n_iter = 0
    for n_iter in range(1, params.max_iterations + 1):
        wx = w @ white
        g = np.tanh(wx)
        g_prime_mean = (1.0 - g * g).mean(axis=1)
        w_new = _sym_decorrelation(g @ white.T / n - g_prime_mean[:, None] * w)
        delta = np.max(np.abs(np.abs(np.einsum("ij,ij->i", w_new, w)) - 1.0))
        w = w_new
        if delta < params.tolerance:
            converged = True
            break

    sources = w @ white
    return ComponentPair(
        c1=sources[0],
        c2=sources[1],
        unmixing=w,
        selected_indices=selected_indices,
        converged=converged,
        n_iter=n_iter,
    )

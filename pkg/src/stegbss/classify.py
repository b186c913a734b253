"""RBF-kernel SVM trained by sequential minimal optimization.

The solver works on the dual soft-margin problem and picks working
pairs by the maximal-violating-pair rule with ties broken by lowest
index, which makes training deterministic.  Convergence is declared
when every KKT violation is at most ``KKT_TOL``.  The numerical core is
self-contained on purpose so it can be audited end to end.

Also provides feature standardization, stratified k-fold cross
validation, and the grid search over PCA component pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import pipeline

#: KKT tolerance at which SMO declares convergence.
KKT_TOL = 1e-3

#: Default soft-margin penalty and RBF width for the 8 standardized
#: moment features (1 / n_features with unit feature variance).
DEFAULT_C = 1.0
DEFAULT_GAMMA = 0.125

LABEL_NAMES = ("cover", "stego")  # class 0 / class 1


@dataclass
class Standardizer:
    """Per-feature z-score parameters fitted on training rows only."""

    mean: np.ndarray
    scale: np.ndarray


def standardize_fit(features: np.ndarray) -> Standardizer:
    """Fit population mean/std per feature; zero-variance features get scale 1."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] < 2:
        raise ValueError("standardizer needs at least 2 training rows")
    mean = features.mean(axis=0)
    scale = features.std(axis=0)
    scale[scale == 0.0] = 1.0
    return Standardizer(mean, scale)


def standardize_apply(standardizer: Standardizer, features: np.ndarray) -> np.ndarray:
    return (np.asarray(features, dtype=np.float64) - standardizer.mean) / standardizer.scale


def identity_standardizer(n_features: int) -> Standardizer:
    return Standardizer(np.zeros(n_features), np.ones(n_features))


@dataclass
class TrainDiagnostics:
    kkt_violation: float
    n_iter: int
    converged: bool
    alpha: np.ndarray


@dataclass
class SVMModel:
    """Decision function  sum_i dual_i * exp(-gamma_k ||x - sv_i||^2) + bias.

    ``support_vectors`` live in standardized feature space; the stored
    standardizer is applied to raw inputs before kernel evaluation.
    """

    support_vectors: np.ndarray   # (M, d)
    dual_coefs: np.ndarray        # (M,) values alpha_i * y_i
    bias: float
    gamma_k: float
    C: float
    standardizer: Standardizer
    diagnostics: TrainDiagnostics | None = field(default=None, compare=False, repr=False)

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision_values(self, features: np.ndarray) -> np.ndarray:
        """Decision values for raw (unstandardized) feature rows."""
        x = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if x.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {x.shape[1]}")
        z = standardize_apply(self.standardizer, x)
        sq = (
            np.sum(z * z, axis=1)[:, None]
            + np.sum(self.support_vectors * self.support_vectors, axis=1)[None, :]
            - 2.0 * z @ self.support_vectors.T
        )
        return np.exp(-self.gamma_k * np.maximum(sq, 0.0)) @ self.dual_coefs + self.bias


def _rbf_gram(x: np.ndarray, gamma: float) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * x @ x.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


def svm_train(
    x: np.ndarray,
    y: np.ndarray,
    C: float = DEFAULT_C,
    gamma_k: float = DEFAULT_GAMMA,
    seed: int = 0,
    standardizer: Standardizer | None = None,
    max_iter: int | None = None,
) -> SVMModel:
    """Train on standardized features ``x`` with labels ``y`` in {-1, +1}.

    ``standardizer`` records how ``x`` was standardized so prediction
    can replay it on raw inputs; pass None when ``x`` is already in its
    final scale.  ``seed`` is accepted for interface stability: the
    maximal-violating-pair rule leaves nothing random, so any seed
    produces the same model.
    """
    del seed
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.ndim != 2 or y.shape != (x.shape[0],):
        raise ValueError("x must be (n, d) with one label per row")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite feature values")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be -1 or +1")
    if np.all(y > 0) or np.all(y < 0):
        raise ValueError("training data must contain both classes")
    if C <= 0 or gamma_k <= 0:
        raise ValueError("C and gamma_k must be > 0")

    n = x.shape[0]
    if max_iter is None:
        max_iter = max(10_000, 200 * n)
    gram = _rbf_gram(x, gamma_k)

    alpha = np.zeros(n)
    u = np.zeros(n)  # u_i = sum_j alpha_j y_j K_ij (decision without bias)
    pos = y > 0

    n_iter = 0
    m_up = m_low = 0.0
    for n_iter in range(1, max_iter + 1):
        neg_f = y - u  # -F_t; the violation criterion works on this
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (~pos & (alpha < C)) | (pos & (alpha > 0))

        up_vals = np.where(up, neg_f, -np.inf)
        low_vals = np.where(low, neg_f, np.inf)
        i = int(np.argmax(up_vals))
        j = int(np.argmin(low_vals))
        m_up = up_vals[i]
        m_low = low_vals[j]
        if m_up - m_low <= KKT_TOL:
            break

        s = y[i] * y[j]
        if s < 0:
            lo = max(0.0, alpha[j] - alpha[i])
            hi = min(C, C + alpha[j] - alpha[i])
        else:
            lo = max(0.0, alpha[i] + alpha[j] - C)
            hi = min(C, alpha[i] + alpha[j])

        eta = gram[i, i] + gram[j, j] - 2.0 * gram[i, j]
        slope = y[j] * ((u[i] - y[i]) - (u[j] - y[j]))  # y_j (F_i - F_j)
        if eta > 1e-12:
            aj_new = min(max(alpha[j] + slope / eta, lo), hi)
        else:
            # coincident points: the subproblem is linear, jump to a bound
            aj_new = hi if slope > 0 else lo
        ai_new = alpha[i] + s * (alpha[j] - aj_new)

        u += (ai_new - alpha[i]) * y[i] * gram[i] + (aj_new - alpha[j]) * y[j] * gram[j]
        alpha[i] = ai_new
        alpha[j] = aj_new
    converged = m_up - m_low <= KKT_TOL

    free = (alpha > 1e-8 * C) & (alpha < C * (1.0 - 1e-8))
    if np.any(free):
        bias = float(np.mean((y - u)[free]))
    else:
        bias = float((m_up + m_low) / 2.0)

    violation = _kkt_max_violation(alpha, y, u + bias, C)
    sv = alpha > 1e-12 * C
    if standardizer is None:
        standardizer = identity_standardizer(x.shape[1])
    return SVMModel(
        support_vectors=x[sv].copy(),
        dual_coefs=(alpha * y)[sv],
        bias=bias,
        gamma_k=gamma_k,
        C=C,
        standardizer=standardizer,
        diagnostics=TrainDiagnostics(violation, n_iter, converged, alpha),
    )


def _kkt_max_violation(alpha: np.ndarray, y: np.ndarray, decision: np.ndarray, C: float) -> float:
    """Largest violation of the soft-margin KKT conditions."""
    margin = y * decision
    at_zero = alpha <= 1e-12 * C
    at_c = alpha >= C * (1.0 - 1e-12)
    v = np.abs(margin - 1.0)          # free vectors: y f(x) = 1
    v[at_zero] = np.maximum(1.0 - margin[at_zero], 0.0)
    v[at_c] = np.maximum(margin[at_c] - 1.0, 0.0)
    return float(v.max())


def kkt_max_violation(model: SVMModel, features: np.ndarray, labels_pm: np.ndarray) -> float:
    """Recompute the KKT violation of ``model`` on its raw training data."""
    if model.diagnostics is None:
        raise ValueError("model carries no training diagnostics")
    decision = model.decision_values(features)
    return _kkt_max_violation(model.diagnostics.alpha, np.asarray(labels_pm, float), decision, model.C)


def svm_predict(model: SVMModel, features: np.ndarray) -> tuple[str, float]:
    """Classify one raw feature vector; exact zero decides cover."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1:
        raise ValueError("svm_predict takes a single feature vector")
    value = float(model.decision_values(features[None, :])[0])
    return ("stego" if value > 0.0 else "cover"), value


def train_classifier(
    features: np.ndarray,
    labels: np.ndarray,
    C: float = DEFAULT_C,
    gamma_k: float = DEFAULT_GAMMA,
    seed: int = 0,
) -> SVMModel:
    """Standardize raw features, then train; labels are 0=cover, 1=stego."""
    features = np.asarray(features, dtype=np.float64)
    y = _labels_to_pm(labels)
    standardizer = standardize_fit(features)
    return svm_train(standardize_apply(standardizer, features), y, C, gamma_k, seed, standardizer)


def _labels_to_pm(labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels)
    if not np.all(np.isin(labels, (0, 1))):
        raise ValueError("labels must be 0 (cover) or 1 (stego)")
    return np.where(labels == 1, 1.0, -1.0)


@dataclass
class CVReport:
    fold_accuracies: list[float]
    mean_accuracy: float
    std_accuracy: float   # population std over folds
    seed: int
    k: int


def stratified_folds(labels: np.ndarray, k: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified split: test-index array per fold.

    Each class is shuffled with its own stream and dealt round-robin,
    so per-class fold counts differ by at most one.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        if idx.size < k:
            raise ValueError(f"class {cls} has {idx.size} samples, fewer than k={k}")
        idx = rng.permutation(idx)
        for f in range(k):
            folds[f].extend(idx[f::k].tolist())
    return [np.sort(np.array(f, dtype=int)) for f in folds]


def kfold_cv(
    features: np.ndarray,
    labels: np.ndarray,
    k: int = 5,
    C: float = DEFAULT_C,
    gamma_k: float = DEFAULT_GAMMA,
    seed: int = 0,
) -> CVReport:
    """Stratified k-fold accuracy with per-fold standardization.

    The standardizer and the model of each fold are fitted on that
    fold's training split only, so no statistics leak from test rows.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels)
    folds = stratified_folds(labels, k, seed)
    all_idx = np.arange(len(labels))
    accs = []
    for test_idx in folds:
        train_mask = np.ones(len(labels), dtype=bool)
        train_mask[test_idx] = False
        train_idx = all_idx[train_mask]
        model = train_classifier(features[train_idx], labels[train_idx], C, gamma_k, seed)
        decision = model.decision_values(features[test_idx])
        predicted = (decision > 0.0).astype(int)
        accs.append(float(np.mean(predicted == labels[test_idx])))
    accs_arr = np.array(accs)
    return CVReport(accs, float(accs_arr.mean()), float(accs_arr.std()), seed, k)


@dataclass
class PairScore:
    i: int
    j: int
    mean_acc: float
    std_acc: float


@dataclass
class GridSearchResult:
    best_pair: tuple[int, int]
    table: list[PairScore]


def all_component_pairs() -> list[tuple[int, int]]:
    """The 66 unordered index pairs of the 12 PCA components."""
    return list(itertools.combinations(range(1, 13), 2))


def grid_search_pca_pair(
    images: list[np.ndarray],
    labels: np.ndarray,
    candidate_pairs: list[tuple[int, int]] | None = None,
    k: int = 5,
    C: float = DEFAULT_C,
    gamma_k: float = DEFAULT_GAMMA,
    seed: int = 0,
    tolerance: float = 1e-4,
    max_iterations: int = 200,
) -> GridSearchResult:
    """Cross-validated accuracy for every candidate PCA pair.

    Feature extraction is re-run per pair because the pair changes the
    pipeline upstream of the classifier; the wavelet/PCA stage is
    computed once per image and shared.  Returns the pair maximizing
    mean CV accuracy, ties broken by lower (i, j) lexicographic order,
    plus the full score table.
    """
    if candidate_pairs is None:
        candidate_pairs = all_component_pairs()
    if not candidate_pairs:
        raise ValueError("no candidate pairs")
    labels = np.asarray(labels)
    if len(images) != len(labels):
        raise ValueError("one label per image required")

    prepared = [pipeline.prepare_image(img) for img in images]
    ica_seeds = [pipeline.derive_seed(seed, "ica", idx) for idx in range(len(images))]
    cv_seed = pipeline.derive_seed(seed, "cv", 0)

    table = []
    best_pair = None
    best_mean = -1.0
    for pair in sorted(candidate_pairs):
        feats = np.vstack(
            [
                pipeline.features_from_prepared(prep, pair, ica_seeds[idx], tolerance, max_iterations)
                for idx, prep in enumerate(prepared)
            ]
        )
        report = kfold_cv(feats, labels, k, C, gamma_k, cv_seed)
        table.append(PairScore(pair[0], pair[1], report.mean_accuracy, report.std_accuracy))
        if report.mean_accuracy > best_mean:
            best_mean = report.mean_accuracy
            best_pair = pair
    return GridSearchResult(best_pair, table)


def tune_hyperparameters(
    features: np.ndarray,
    labels: np.ndarray,
    Cs: tuple[float, ...] = (0.1, 1.0, 10.0),
    gammas: tuple[float, ...] = (1.0 / 32.0, 1.0 / 8.0, 1.0 / 2.0),
    k: int = 3,
    seed: int = 0,
) -> tuple[float, float]:
    """Small (C, gamma_k) grid scored by inner CV on the given rows only.

    Call this on a training split; ties prefer the smaller C, then the
    smaller gamma.
    """
    best = (DEFAULT_C, DEFAULT_GAMMA)
    best_acc = -1.0
    for C in Cs:
        for gamma_k in gammas:
            report = kfold_cv(features, labels, k, C, gamma_k, seed)
            if report.mean_accuracy > best_acc:
                best_acc = report.mean_accuracy
                best = (C, gamma_k)
    return best

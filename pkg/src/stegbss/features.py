"""Moment features of the separated components.

Each independent component is summarized by its first four moments:
mean, standard deviation, skewness, and excess kurtosis (all population
formulas, so a Gaussian component reads as kurtosis 0).  The final
8-value feature vector interleaves them as

    [mu1, mu2, sigma1, sigma2, gamma1, gamma2, kappa1, kappa2]

Source separation only identifies components up to sign and order, so
before assembly the pair is canonicalized: components with negative
skewness are negated, then the pair is ordered by descending kurtosis
(ties by descending skewness, then original order).  Without this
quotient the sign/permutation ambiguity would scramble the skewness
features from image to image.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .decomp import ComponentPair

#: Column order of the assembled feature vector.
FEATURE_NAMES = ("mu1", "mu2", "sigma1", "sigma2", "gamma1", "gamma2", "kappa1", "kappa2")


@dataclass
class MomentSet:
    mu: float
    sigma: float
    gamma: float   # skewness E[((x - mu)/sigma)^3]
    kappa: float   # excess kurtosis E[((x - mu)/sigma)^4] - 3


def moments(values: np.ndarray) -> MomentSet:
    """Population moments of a coefficient vector (length >= 2).

    Raises ValueError for constant input: skewness and kurtosis are
    undefined at zero variance.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise ValueError("moments need a 1-D vector of length >= 2")
    mu = values.mean()
    dev = values - mu
    var = np.mean(dev * dev)
    if var == 0.0:
        raise ValueError("zero variance: moments beyond the mean are undefined")
    sigma = np.sqrt(var)
    z = dev / sigma
    z2 = z * z
    gamma = np.mean(z2 * z)
    kappa = np.mean(z2 * z2) - 3.0
    return MomentSet(float(mu), float(sigma), float(gamma), float(kappa))


def canonicalize(pair: ComponentPair) -> ComponentPair:
    """Resolve the sign/permutation ambiguity of a component pair.

    Each component is negated if its skewness is negative (zero
    skewness leaves the sign alone), then the two are ordered so that
    kappa1 >= kappa2, ties broken by gamma1 >= gamma2, then by original
    order.  The unmixing rows are flipped and swapped to stay consistent
    with the returned components.
    """
    comps = [pair.c1, pair.c2]
    rows = [pair.unmixing[0].copy(), pair.unmixing[1].copy()]
    stats = []
    for k in range(2):
        m = moments(comps[k])
        if m.gamma < 0.0:
            comps[k] = -comps[k]
            rows[k] = -rows[k]
            m = MomentSet(-m.mu, m.sigma, -m.gamma, m.kappa)
        stats.append(m)

    if (stats[1].kappa, stats[1].gamma) > (stats[0].kappa, stats[0].gamma):
        comps.reverse()
        rows.reverse()

    return replace(pair, c1=comps[0], c2=comps[1], unmixing=np.vstack(rows))


def assemble_features(pair: ComponentPair) -> np.ndarray:
    """Interleaved 8-value moment vector of an already canonical pair.

    The components are unit-variance and zero-mean by construction, so
    mu ~ 0 and sigma ~ 1; both are kept for fidelity to the fixed
    feature layout.
    """
    m1 = moments(pair.c1)
    m2 = moments(pair.c2)
    vec = np.array(
        [m1.mu, m2.mu, m1.sigma, m2.sigma, m1.gamma, m2.gamma, m1.kappa, m2.kappa],
        dtype=np.float64,
    )
    if not np.all(np.isfinite(vec)):
        raise ValueError("non-finite feature value")
    return vec

"""Special functions for Bayesian bandit indices.

The beta quantile is inverted by plain bisection on the regularized
incomplete beta CDF. Bisection is slower than Newton but monotone and
bracket-safe for any (a, b), which matters because the indices feed an
exact per-path dominance check downstream.
"""

from __future__ import annotations

import numpy as np
from scipy.special import betainc

_XTOL = 1e-12


def beta_quantile(a: float, b: float, q: float) -> float:
    """x in [0, 1] with BetaCDF(a, b; x) = q, to absolute tolerance 1e-12."""
    if not (a > 0 and b > 0):
        raise ValueError("shape parameters must be positive")
    if not (0 < q < 1):
        raise ValueError("q must lie strictly between 0 and 1")
    lo, hi = 0.0, 1.0
    # Interval halving: 50 steps bring the bracket width below 1e-15.
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if betainc(a, b, mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < _XTOL * 0.5:
            break
    return 0.5 * (lo + hi)


def dirichlet_sample(counts, rng: np.random.Generator) -> np.ndarray:
    """One draw from Dirichlet(counts) using the caller-owned generator."""
    alpha = np.asarray(counts, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0:
        raise ValueError("counts must be a nonempty vector")
    if not np.all(alpha > 0):
        raise ValueError("all concentration counts must be positive")
    return rng.dirichlet(alpha)

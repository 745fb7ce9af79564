"""Squared 2-Wasserstein distance between Gaussian Laplace posteriors.

    W2^2 = || m_a - m_b ||^2_M
         + tr( C_a + C_b - 2 (C_b^{1/2} C_a C_b^{1/2})^{1/2} ),

with matrix square roots through symmetric eigendecompositions, eigenvalues
floored at zero.  Tiny negative totals from roundoff are clipped to zero.
"""

import numpy as np
import scipy.linalg as sla

from ..errors import NumericalError


def psd_sqrt(cov):
    lam, vec = sla.eigh(0.5 * (cov + cov.T))
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.T


def wasserstein2_sq(post_a, post_b, mass_m, sqrt_b=None):
    """W2^2 between two posteriors; ``sqrt_b`` may carry a precomputed
    square root of post_b's covariance (reused across comparisons)."""
    dm = np.asarray(post_a.m_map) - np.asarray(post_b.m_map)
    term_mean = float(dm @ (mass_m @ dm))
    S = psd_sqrt(post_b.cov) if sqrt_b is None else sqrt_b
    inner = S @ post_a.cov @ S
    lam = sla.eigvalsh(0.5 * (inner + inner.T))
    bures = float(
        np.trace(post_a.cov) + np.trace(post_b.cov)
        - 2.0 * np.sqrt(np.clip(lam, 0.0, None)).sum()
    )
    total = term_mean + bures
    scale = max(abs(np.trace(post_a.cov)) + abs(np.trace(post_b.cov)), 1e-300)
    if total < -1e-6 * scale:
        raise NumericalError(f"grossly negative squared distance {total:.3e}")
    return max(total, 0.0)

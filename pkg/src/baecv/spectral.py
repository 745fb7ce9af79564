"""Generalized eigenanalysis of the error covariance against the noise,
low-rank total-error inverses, and a sampling-convergence monitor.

With Gamma_eps v_i = lambda_i Gamma_e v_i (descending) the inverse of the
total-error covariance decomposes as

    Gamma_eta^{-1} = Gamma_e^{-1} - V_r D_r V_r^T + O(sum_{i>r} l_i/(1+l_i)),

D_r = diag(l_i / (1 + l_i)); exact at r = p.  The eigenvalue magnitudes
relative to 1 (or to 0.1 * delta_e^2 under white noise) indicate when enough
error samples have been drawn.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ArgumentError


def generalized_eig(cov_eps, cov_e):
    """Solve Gamma_eps v = lambda Gamma_e v, descending eigenvalues.

    Eigenvectors are Gamma_e-orthonormal: V^T Gamma_e V = I.
    """
    cov_eps = np.asarray(cov_eps, dtype=np.float64)
    cov_e = np.asarray(cov_e, dtype=np.float64)
    if cov_eps.shape != cov_e.shape:
        raise ArgumentError("covariance shapes differ")
    try:
        lam, vec = sla.eigh(0.5 * (cov_eps + cov_eps.T), 0.5 * (cov_e + cov_e.T))
    except sla.LinAlgError as exc:
        raise ArgumentError(f"noise covariance is not SPD: {exc}") from exc
    return lam[::-1], vec[:, ::-1]


@dataclass
class LowRankNoiseInverse:
    """Rank-r application of the total-error covariance inverse."""

    V: np.ndarray
    eigenvalues: np.ndarray
    ratios: np.ndarray
    cov_e_cho: tuple
    truncation_bound: float
    rank: int

    def apply(self, x):
        y = sla.cho_solve(self.cov_e_cho, np.asarray(x, dtype=np.float64))
        if self.rank:
            Vr = self.V[:, : self.rank]
            y = y - Vr @ (self.ratios[: self.rank] * (Vr.T @ np.asarray(x)))
        return y


def build_noise_inverse(cov_eps, cov_e, rank=None, eig_threshold=None):
    """Low-rank SMW decomposition of (Gamma_e + Gamma_eps)^{-1}.

    ``rank`` fixes r directly; ``eig_threshold`` instead keeps generalized
    eigenvalues above the threshold (0.1 is the practical default for the
    retained-rank rule).  Omitting both keeps full rank (exact inverse).
    """
    lam, vec = generalized_eig(cov_eps, cov_e)
    lam_pos = np.clip(lam, 0.0, None)
    ratios = lam_pos / (1.0 + lam_pos)
    if rank is None:
        if eig_threshold is not None:
            rank = int((lam > eig_threshold).sum())
        else:
            rank = lam.size
    rank = int(min(max(rank, 0), lam.size))
    cho = sla.cho_factor(0.5 * (np.asarray(cov_e) + np.asarray(cov_e).T))
    return LowRankNoiseInverse(
        V=vec,
        eigenvalues=lam,
        ratios=ratios,
        cov_e_cho=cho,
        truncation_bound=float(ratios[rank:].sum()),
        rank=rank,
    )


def smw_inverse(decomp, x):
    return decomp.apply(x)


def spectrum_monitor(stats_sequence, noise, eig_threshold=0.1, rel_tol=0.05):
    """Stabilization report of the leading generalized spectrum over N.

    For each entry the generalized eigenvalues of its covariance against the
    noise covariance are recorded; the run is declared stabilized when every
    leading eigenvalue (above ``eig_threshold``; under white noise this is
    the 0.1*delta^2 rule) changed by less than ``rel_tol`` relatively
    between the two largest sample counts.
    """
    if len(stats_sequence) < 2:
        raise ArgumentError("need at least two statistics entries")
    cov_e = noise.cov()
    entries = []
    for stats in stats_sequence:
        lam, _ = generalized_eig(stats.cov, cov_e)
        entries.append({"N": stats.N, "tag": stats.tag, "eigenvalues": lam})
    last, prev = entries[-1]["eigenvalues"], entries[-2]["eigenvalues"]
    leading = np.flatnonzero(np.maximum(last, prev) > eig_threshold)
    if leading.size == 0:
        stabilized = True
        max_change = 0.0
    else:
        rel = np.abs(last[leading] - prev[leading]) / np.maximum(np.abs(prev[leading]), 1e-300)
        stabilized = bool((rel < rel_tol).all())
        max_change = float(rel.max())
    return {
        "entries": entries,
        "stabilized": stabilized,
        "max_rel_change": max_change,
        "eig_threshold": eig_threshold,
        "rel_tol": rel_tol,
    }


def stabilization_n(stats_sequence, noise, eig_threshold=0.1, rel_tol=0.05):
    """Smallest N after which the leading spectrum stays stabilized."""
    seq = sorted(stats_sequence, key=lambda s: s.N)
    for k in range(1, len(seq)):
        report = spectrum_monitor(seq[k - 1 : k + 1], noise, eig_threshold, rel_tol)
        if report["stabilized"]:
            return seq[k].N
    return None

"""Elliptic-operator Gaussian priors.

A prior is N(z0, Gamma) with precision A M^{-1} A (the Galerkin square of
the elliptic operator A = gamma M + kappa K_Theta), i.e. covariance
Gamma = A^{-1} M A^{-1}.  Exact samples are drawn via ``s = z0 + A^{-1} L xi``
with ``M = L L^T`` and standard-normal xi, so the sample covariance is
A^{-1} M A^{-1} in distribution, not approximately.

Sampling is counter-seeded: sample ``l`` of a stream derives its generator
from ``(seed, l, attempt)``, which makes parallel generation reproduce the
sequential stream bit for bit and makes constraint rejections deterministic.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ArgumentError, SamplingStallError
from .fem import FeField, assemble_mass, assemble_stiffness, space_dim

log = logging.getLogger(__name__)

_STALL_WINDOW = 1000


@dataclass
class CovarianceFactor:
    """Columns C with Gamma ~= C C^T, plus the discarded spectral mass."""

    columns: np.ndarray
    rank: int
    truncation_error: float

    def reconstruct(self):
        return self.columns @ self.columns.T


def _rng(seed, index, attempt, salt):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(salt, int(index), int(attempt)))
    return np.random.Generator(np.random.PCG64(ss))


class GaussianPrior:
    """Gaussian measure on a single function space."""

    def __init__(self, space_id, mean, A, M, constraint=None):
        self.space_id = space_id
        self.mean = np.asarray(mean, dtype=np.float64)
        self.A = A
        self.M = M
        self.constraint = constraint
        n = self.mean.size
        if A.shape != (n, n) or M.shape != (n, n):
            raise ArgumentError("operator shapes do not match the mean")
        self._A_lu = spla.splu(sp.csc_matrix(A.matrix))
        self._M_cho = sla.cholesky(M.toarray(), lower=True)
        self._cov = None
        self.rejections = 0

    @property
    def dim(self):
        return self.mean.size

    def _draw(self, rng):
        xi = rng.standard_normal(self.dim)
        return self.mean + self._A_lu.solve(self._M_cho @ xi)

    def _admissible(self, s):
        if self.constraint is None:
            return True
        return bool(np.all(s > self.constraint["min"]))

    def sample_one(self, seed, index, salt=0):
        """Draw sample ``index`` of the stream keyed by ``seed``."""
        for attempt in range(_STALL_WINDOW):
            s = self._draw(_rng(seed, index, attempt, salt))
            if self._admissible(s):
                return s
            self.rejections += 1
        raise SamplingStallError(
            f"{_STALL_WINDOW} consecutive constraint rejections at sample {index}"
        )

    def sample(self, seed, n):
        """n prior samples as fields, reproducible from the seed."""
        return [
            FeField(self.space_id, self.sample_one(seed, i)) for i in range(int(n))
        ]

    def sample_array(self, seed, n):
        return np.array([self.sample_one(seed, i) for i in range(int(n))])

    def cov_dense(self):
        """Dense covariance A^{-1} M A^{-1}; computed once and cached."""
        if self._cov is None:
            X = self._A_lu.solve(np.eye(self.dim))
            G = X.T @ (self.M.matrix @ X)
            self._cov = 0.5 * (G + G.T)
        return self._cov

    def precision_dense(self):
        """Dense precision A M^{-1} A."""
        A = self.A.matrix.toarray()
        return A @ sla.cho_solve((self._M_cho, True), A)

    def apply_precision(self, v):
        """(A M^{-1} A) v through sparse applications and a mass solve."""
        w = self.A.matrix @ np.asarray(v, dtype=np.float64)
        return self.A.matrix @ sla.cho_solve((self._M_cho, True), w)

    def apply_cov(self, v):
        """(A^{-1} M A^{-1}) v; works column-wise on matrices."""
        w = self._A_lu.solve(np.asarray(v, dtype=np.float64))
        return self._A_lu.solve(self.M.matrix @ w)

    def quad_form(self, z):
        """Prior quadratic form ||A (z - z0)||^2_{M^{-1}}."""
        r = self.A.matrix @ (np.asarray(z) - self.mean)
        return float(r @ sla.cho_solve((self._M_cho, True), r))

    def factor(self, rank=None, trace_tol=None):
        return covariance_factor(self, rank=rank, trace_tol=trace_tol)

    def component_slices(self):
        return [(self.space_id, slice(0, self.dim))]


class ProductPrior:
    """Independent product of component priors; fields stack in order."""

    def __init__(self, components):
        # Components may share a space id (both fields on the domain space);
        # they are independent blocks either way.
        self.components = list(components)
        self.space_id = "product:" + "+".join(p.space_id for p in self.components)
        self.mean = np.concatenate([p.mean for p in self.components])

    @property
    def dim(self):
        return self.mean.size

    @property
    def rejections(self):
        return sum(p.rejections for p in self.components)

    def component_slices(self):
        out, start = [], 0
        for p in self.components:
            out.append((p.space_id, slice(start, start + p.dim)))
            start += p.dim
        return out

    def split(self, z):
        return [np.asarray(z)[s] for _, s in self.component_slices()]

    def sample_one(self, seed, index, salt=0):
        return np.concatenate(
            [p.sample_one(seed, index, salt=salt + c) for c, p in enumerate(self.components)]
        )

    def sample(self, seed, n):
        return [FeField(self.space_id, self.sample_one(seed, i)) for i in range(int(n))]

    def sample_array(self, seed, n):
        return np.array([self.sample_one(seed, i) for i in range(int(n))])

    def cov_dense(self):
        return sla.block_diag(*[p.cov_dense() for p in self.components])

    def precision_dense(self):
        return sla.block_diag(*[p.precision_dense() for p in self.components])

    def quad_form(self, z):
        return sum(p.quad_form(zc) for p, zc in zip(self.components, self.split(z)))

    def apply_precision(self, v):
        return np.concatenate(
            [p.apply_precision(vc) for p, vc in zip(self.components, self.split(v))]
        )

    def apply_cov(self, v):
        return np.concatenate(
            [p.apply_cov(vc) for p, vc in zip(self.components, self.split(v))]
        )

    def factor(self, rank=None, trace_tol=None):
        return covariance_factor(self, rank=rank, trace_tol=trace_tol)


def build_prior(mesh, space_id, mean, gamma, kappa, theta, constraint=None):
    """Prior with precision A M^{-1} A from elliptic-operator parameters.

    ``mean`` may be a scalar (constant field) or a coefficient vector;
    ``constraint`` an optional ``{"min": value}`` lower bound enforced by
    rejection at sampling time.
    """
    n = space_dim(mesh, space_id)
    mean_vec = np.full(n, float(mean)) if np.ndim(mean) == 0 else np.asarray(mean, float)
    if mean_vec.size != n:
        raise ArgumentError("mean length does not match the space dimension")
    A = assemble_stiffness(mesh, space_id, gamma, kappa, theta)
    M = assemble_mass(mesh, space_id)
    return GaussianPrior(space_id, mean_vec, A, M, constraint=constraint)


def product_prior(pm, pb):
    """Block-diagonal product prior over stacked parameters (m, beta)."""
    return ProductPrior([pm, pb])


def covariance_factor(prior, rank=None, trace_tol=None):
    """Spectral factor C of the prior covariance, Gamma ~= C C^T.

    Columns are sqrt(lambda)-scaled eigenvectors in descending eigenvalue
    order.  ``rank`` truncates to a fixed count; ``trace_tol`` instead keeps
    the smallest rank whose discarded eigenvalue sum is below
    ``trace_tol * trace(Gamma)``.  For product priors the eigenproblem is
    solved blockwise (exact, the covariance is block diagonal).
    """
    if isinstance(prior, ProductPrior):
        pieces = []
        for c, p in enumerate(prior.components):
            lam, vec = _eig_desc(p.cov_dense())
            pad_before = sum(q.dim for q in prior.components[:c])
            pad_after = prior.dim - pad_before - p.dim
            vec_full = np.vstack(
                [np.zeros((pad_before, p.dim)), vec, np.zeros((pad_after, p.dim))]
            )
            pieces.append((lam, vec_full))
        lam = np.concatenate([x[0] for x in pieces])
        vec = np.hstack([x[1] for x in pieces])
        order = np.argsort(lam)[::-1]
        lam, vec = lam[order], vec[:, order]
    else:
        lam, vec = _eig_desc(prior.cov_dense())

    total = lam.sum()
    if rank is None and trace_tol is not None:
        kept = lam.cumsum()
        rank = int(np.searchsorted(kept, (1.0 - trace_tol) * total) + 1)
    if rank is None:
        rank = lam.size
    rank = min(int(rank), lam.size)
    if rank < 1:
        raise ArgumentError("factor rank must be at least 1")
    cols = vec[:, :rank] * np.sqrt(lam[:rank])
    return CovarianceFactor(cols, rank, float(lam[rank:].sum()))


def _eig_desc(cov):
    lam, vec = sla.eigh(0.5 * (cov + cov.T))
    lam = np.clip(lam[::-1], 0.0, None)
    return lam, vec[:, ::-1]

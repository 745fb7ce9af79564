"""Potential measurements over a conductive strip with an uncertain
Robin boundary coefficient.

The state solves ``-div(beta grad u) = 0`` with applied flux g on the
accessible boundary and the Robin condition ``(beta grad u).n + m u = 0`` on
the inaccessible one.  The accurate map takes z = (m, beta); the surrogate
pins beta at a nominal field and maps m alone.  The PDE is linear in u and
bilinear in (m, u) and (beta, u), so the pure second derivatives vanish and
only the mixed blocks contribute to Hessian actions.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import ArgumentError, SolverError
from ..fem import assemble_stiffness, boundary_load, boundary_restriction, observation_matrix
from ..fem.apply import SegOps, TriOps
from .base import SolveCounters

_EYE2 = np.eye(2)


class RobinProblem:
    """Geometry, observation operator, and shared assembly state."""

    def __init__(self, mesh, obs_points=None, flux=1.0, robin_label="I", flux_label="A",
                 obs_matrix=None):
        self.mesh = mesh
        self.robin_label = robin_label
        self.flux_label = flux_label
        self.flux = float(flux)
        self.B = obs_matrix if obs_matrix is not None else observation_matrix(mesh, obs_points)
        self.E = boundary_restriction(mesh, robin_label)
        self.load = boundary_load(mesh, flux_label, self.flux)
        self.tri_ops = TriOps(mesh)
        self.seg_ops = SegOps(mesh, robin_label)
        self.n_m = self.E.shape[1]
        self.n_beta = mesh.num_vertices
        self.boundary_mesh_nodes = mesh.boundary_nodes(robin_label)

    def robin_matrix(self, m):
        """Boundary operator int m_h u v ds on the Robin chain, in domain DOFs."""
        from ..fem.backend import kernels

        rows, cols, vals = kernels.seg_weighted_mass(
            self.mesh.vertices[self.boundary_mesh_nodes], self.seg_ops.seg,
            np.asarray(m, dtype=np.float64),
        )
        nb = self.n_m
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(nb, nb)).tocsr()
        return self.E @ mat @ self.E.T

    def system_matrix(self, m, beta):
        K = assemble_stiffness(self.mesh, "domain", 0.0, np.asarray(beta, float), _EYE2)
        return (K.matrix + self.robin_matrix(m)).tocsc()

    def accurate(self):
        return RobinAccurate(self)

    def surrogate(self, beta_star):
        return RobinSurrogate(self, beta_star)


class _RobinMapBase:
    """Linear-in-state solve shared by the accurate and surrogate maps."""

    def __init__(self, problem):
        self.problem = problem
        self.counters = SolveCounters()

    @property
    def out_dim(self):
        return self.problem.B.shape[0]

    def _solve_system(self, m, beta):
        mat = self.problem.system_matrix(m, beta)
        try:
            lu = spla.splu(mat)
        except RuntimeError as exc:
            raise SolverError(f"singular Robin system: {exc}") from exc
        b = self.problem.load
        u = lu.solve(b)
        # A numerically singular system can still "factor"; reject by residual.
        resid = np.linalg.norm(mat @ u - b)
        if not np.all(np.isfinite(u)) or resid > 1e-8 * np.linalg.norm(b):
            raise SolverError("singular Robin system (residual check)",
                              residual_norm=float(resid))
        self.counters.forward += 1
        return u, lu

    def evaluate(self, x):
        u, _, _ = self.solve_forward(x)
        return self.obs_value(u)

    def obs_value(self, u):
        return self.problem.B @ u

    def obs_direction(self, r):
        return self.problem.B @ r

    def obs_adjoint(self, w):
        return self.problem.B.T @ np.asarray(w)

    def linearize(self, x0):
        from ..sensitivity import LinearizationPoint

        return LinearizationPoint(self, x0)


class RobinAccurate(_RobinMapBase):
    """Accurate map over stacked z = (m on the Robin chain, beta on the domain)."""

    @property
    def dim(self):
        return self.problem.n_m + self.problem.n_beta

    def split(self, z):
        z = np.asarray(z, dtype=np.float64)
        if z.size != self.dim:
            raise ArgumentError("parameter size does not match (m, beta) stacking")
        return z[: self.problem.n_m], z[self.problem.n_m:]

    def solve_forward(self, z):
        m, beta = self.split(z)
        u, lu = self._solve_system(m, beta)
        return u, 1, lu

    def state_factor(self, u, z):
        m, beta = self.split(z)
        return spla.splu(self.problem.system_matrix(m, beta))

    def dz_apply(self, u, z, dz):
        dm, dbeta = self.split(dz)
        p = self.problem
        out = p.tri_ops.stiffness_action(dbeta, _EYE2, u)
        out += p.E @ p.seg_ops.wmass_action(dm, p.E.T @ u)
        return out

    def dz_adjoint(self, u, z, w):
        p = self.problem
        gbeta = p.tri_ops.stiffness_weight_gradient(_EYE2, u, w)
        gm = p.seg_ops.wmass_weight_gradient(p.E.T @ u, p.E.T @ w)
        return np.concatenate([gm, gbeta])

    def second_rhs(self, u, z, a, b, ra, rb):
        # D_uu = D_zz = 0; only the mixed blocks survive.
        return self.dz_apply(ra, z, b) + self.dz_apply(rb, z, a)


class RobinSurrogate(_RobinMapBase):
    """Surrogate map over m with the conductivity pinned at a nominal field."""

    def __init__(self, problem, beta_star):
        super().__init__(problem)
        self.beta_star = np.asarray(beta_star, dtype=np.float64)
        if self.beta_star.size != problem.n_beta:
            raise ArgumentError("beta_star must be a domain field")

    @property
    def dim(self):
        return self.problem.n_m

    def solve_forward(self, m):
        u, lu = self._solve_system(np.asarray(m, dtype=np.float64), self.beta_star)
        return u, 1, lu

    def state_factor(self, u, m):
        return spla.splu(self.problem.system_matrix(np.asarray(m, float), self.beta_star))

    def dz_apply(self, u, m, dm):
        p = self.problem
        return p.E @ p.seg_ops.wmass_action(np.asarray(dm, float), p.E.T @ u)

    def dz_adjoint(self, u, m, w):
        p = self.problem
        return p.seg_ops.wmass_weight_gradient(p.E.T @ u, p.E.T @ w)

    def second_rhs(self, u, m, a, b, ra, rb):
        return self.dz_apply(ra, m, b) + self.dz_apply(rb, m, a)

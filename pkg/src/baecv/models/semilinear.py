"""Semilinear diffusion with an absorbing nonlinearity.

Accurate state equation: ``-lap u + exp(m) u + exp(beta) |u| u = 0`` with
Dirichlet data g on one boundary part and natural conditions elsewhere; the
surrogate drops the nonlinear absorption term and is a single linear solve.

Nonlinear coefficients are interpolated nodally (exp(m), exp(beta), |u|u as
P1 fields), so every integral reduces to exact P1-product formulas.  Newton
iterates from the surrogate solution and stops when the residual norm has
dropped by 1e10 relative to the initial one.  Dirichlet conditions are
imposed by reduction to the free DOFs with a lifted load.
"""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import ArgumentError, SolverError
from ..fem import assemble_mass, assemble_stiffness
from ..fem.apply import TriOps
from .base import SolveCounters


class SemilinearProblem:
    """Geometry, Dirichlet handling, and shared operators."""

    def __init__(self, mesh, obs_points=None, dirichlet_value=1.0,
                 dirichlet_label="D", obs_matrix=None,
                 newton_rel_tol=1e-10, max_newton=25, max_backtracks=20):
        from ..fem import observation_matrix

        self.mesh = mesh
        self.B = obs_matrix if obs_matrix is not None else observation_matrix(mesh, obs_points)
        self.tri_ops = TriOps(mesh)
        self.K = assemble_stiffness(mesh, "domain", 0.0, 1.0, 1.0).matrix
        nv = mesh.num_vertices
        dir_nodes = mesh.boundary_nodes(dirichlet_label)
        mask = np.zeros(nv, dtype=bool)
        mask[dir_nodes] = True
        self.dir_mask = mask
        self.free = np.flatnonzero(~mask)
        self.lift = np.zeros(nv)
        self.lift[mask] = float(dirichlet_value)
        self.newton_rel_tol = float(newton_rel_tol)
        self.max_newton = int(max_newton)
        self.max_backtracks = int(max_backtracks)
        self.n_param = nv
        self.B_free = self.B[:, self.free]

    def embed(self, r_free):
        v = np.zeros(self.mesh.num_vertices)
        v[self.free] = r_free
        return v

    def reduce(self, v_full):
        return v_full[self.free]

    def linear_operator(self, c):
        """K + M(c) for the P1 reaction field c, full DOFs."""
        from ..fem.backend import kernels

        rows, cols, vals = kernels.tri_weighted_mass(
            self.mesh.vertices, self.mesh.triangles, np.asarray(c, dtype=np.float64)
        )
        nv = self.mesh.num_vertices
        Mc = sp.coo_matrix((vals, (rows, cols)), shape=(nv, nv)).tocsr()
        return self.K + Mc

    def accurate(self):
        return SemilinearAccurate(self)

    def surrogate(self):
        return SemilinearSurrogate(self)


def _absorb(u):
    return np.abs(u) * u


class _SemilinearMapBase:
    def __init__(self, problem):
        self.problem = problem
        self.counters = SolveCounters()

    @property
    def out_dim(self):
        return self.problem.B.shape[0]

    def evaluate(self, x):
        u, _, _ = self.solve_forward(x)
        return self.obs_value(u)

    def obs_value(self, u):
        return self.problem.B @ u

    def obs_direction(self, r_free):
        return self.problem.B_free @ r_free

    def obs_adjoint(self, w):
        return self.problem.B_free.T @ np.asarray(w)

    def linearize(self, x0):
        from ..sensitivity import LinearizationPoint

        return LinearizationPoint(self, x0)

    def _surrogate_state(self, c):
        p = self.problem
        A = self.problem.linear_operator(c)
        A_ff = A[p.free][:, p.free].tocsc()
        rhs = -(A @ p.lift)[p.free]
        lu = spla.splu(A_ff)
        u = p.lift.copy()
        u[p.free] = lu.solve(rhs)
        return u, lu


class SemilinearAccurate(_SemilinearMapBase):
    """Accurate map over stacked z = (m, beta), both P1 domain fields."""

    @property
    def dim(self):
        return 2 * self.problem.n_param

    def split(self, z):
        z = np.asarray(z, dtype=np.float64)
        if z.size != self.dim:
            raise ArgumentError("parameter size does not match (m, beta) stacking")
        n = self.problem.n_param
        return z[:n], z[n:]

    def _residual(self, u, c, g):
        p = self.problem
        r = p.K @ u + p.tri_ops.wmass_action(c, u) + p.tri_ops.wmass_action(g, _absorb(u))
        return r[p.free]

    def _state_jacobian(self, u, c, g):
        p = self.problem
        A = p.linear_operator(c)
        from ..fem.backend import kernels

        rows, cols, vals = kernels.tri_weighted_mass(
            p.mesh.vertices, p.mesh.triangles, np.asarray(g, dtype=np.float64)
        )
        nv = p.mesh.num_vertices
        Mg = sp.coo_matrix((vals, (rows, cols)), shape=(nv, nv)).tocsr()
        J = A + Mg.multiply(2.0 * np.abs(u)[None, :])
        return J[p.free][:, p.free].tocsc()

    def solve_forward(self, z):
        """Newton solve; returns (state, newton_iterations, None).

        The state Jacobian factor at the converged state is built on demand
        by ``state_factor`` so that plain evaluations do not pay for it.
        """
        m, beta = self.split(z)
        c = np.exp(m)
        g = np.exp(beta)
        p = self.problem
        u, _ = self._surrogate_state(c)
        self.counters.forward += 1  # initial-guess solve
        r = self._residual(u, c, g)
        r0 = np.linalg.norm(r)
        floor = 1e-13 * (1.0 + np.linalg.norm(p.K @ p.lift))
        iters = 0
        rnorm = r0
        while rnorm > self.problem.newton_rel_tol * r0 and rnorm > floor:
            if iters >= p.max_newton:
                raise SolverError(
                    f"Newton did not converge in {p.max_newton} steps", residual_norm=rnorm
                )
            J = self._state_jacobian(u, c, g)
            try:
                lu = spla.splu(J)
            except RuntimeError as exc:
                raise SolverError(f"singular Newton system: {exc}") from exc
            step = lu.solve(-r)
            alpha = 1.0
            for _ in range(p.max_backtracks + 1):
                u_try = u.copy()
                u_try[p.free] += alpha * step
                r_try = self._residual(u_try, c, g)
                r_try_norm = np.linalg.norm(r_try)
                if r_try_norm < rnorm:
                    break
                alpha *= 0.5
            else:
                raise SolverError("Newton line search failed", residual_norm=rnorm)
            u, r, rnorm = u_try, r_try, r_try_norm
            iters += 1
            self.counters.forward += 1
        return u, iters, None

    def state_factor(self, u, z):
        m, beta = self.split(z)
        return spla.splu(self._state_jacobian(u, np.exp(m), np.exp(beta)))

    def dz_apply(self, u, z, dz):
        m, beta = self.split(z)
        dm, dbeta = self.split(dz)
        p = self.problem
        out = p.tri_ops.wmass_action(np.exp(m) * dm, u)
        out += p.tri_ops.wmass_action(np.exp(beta) * dbeta, _absorb(u))
        return out[p.free]

    def dz_adjoint(self, u, z, w_free):
        m, beta = self.split(z)
        p = self.problem
        w = p.embed(w_free)
        gm = np.exp(m) * p.tri_ops.wmass_weight_gradient(w, u)
        gb = np.exp(beta) * p.tri_ops.wmass_weight_gradient(w, _absorb(u))
        return np.concatenate([gm, gb])

    def second_rhs(self, u, z, a, b, ra, rb):
        m, beta = self.split(z)
        am, ab = self.split(a)
        bm, bb = self.split(b)
        p = self.problem
        ra_f = p.embed(ra)
        rb_f = p.embed(rb)
        c = np.exp(m)
        g = np.exp(beta)
        # D_uu: absorption curvature 2 sign(u) (sign(0) := 0).
        out = p.tri_ops.wmass_action(g, 2.0 * np.sign(u) * ra_f * rb_f)
        # Mixed u-parameter blocks.
        out += p.tri_ops.wmass_action(c * am, rb_f) + p.tri_ops.wmass_action(c * bm, ra_f)
        out += p.tri_ops.wmass_action(g * ab, 2.0 * np.abs(u) * rb_f)
        out += p.tri_ops.wmass_action(g * bb, 2.0 * np.abs(u) * ra_f)
        # Pure parameter blocks (exp curvature).
        out += p.tri_ops.wmass_action(c * am * bm, u)
        out += p.tri_ops.wmass_action(g * ab * bb, _absorb(u))
        return out[p.free]


class SemilinearSurrogate(_SemilinearMapBase):
    """Linear surrogate over m: drops the absorption term entirely."""

    @property
    def dim(self):
        return self.problem.n_param

    def solve_forward(self, m):
        c = np.exp(np.asarray(m, dtype=np.float64))
        u, lu = self._surrogate_state(c)
        self.counters.forward += 1
        return u, 1, lu

    def state_factor(self, u, m):
        c = np.exp(np.asarray(m, dtype=np.float64))
        p = self.problem
        A = p.linear_operator(c)
        return spla.splu(A[p.free][:, p.free].tocsc())

    def dz_apply(self, u, m, dm):
        p = self.problem
        return p.tri_ops.wmass_action(np.exp(np.asarray(m, float)) * dm, u)[p.free]

    def dz_adjoint(self, u, m, w_free):
        p = self.problem
        w = p.embed(w_free)
        return np.exp(np.asarray(m, float)) * p.tri_ops.wmass_weight_gradient(w, u)

    def second_rhs(self, u, m, a, b, ra, rb):
        p = self.problem
        c = np.exp(np.asarray(m, dtype=np.float64))
        ra_f = p.embed(ra)
        rb_f = p.embed(rb)
        out = p.tri_ops.wmass_action(c * a, rb_f) + p.tri_ops.wmass_action(c * b, ra_f)
        out += p.tri_ops.wmass_action(c * a * b, u)
        return out[p.free]

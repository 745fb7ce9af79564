"""First- and second-order derivative actions of PDE-backed PtO maps.

With the state u(x) defined by R(u, x) = 0 and observations y = B u, the
implicit function theorem gives

    du       = solve(D_u, -D_x dx),
    J dx     = B du,
    d2u(a,b) = solve(D_u, -[D_uu:(ra (x) rb) + D_ux:(a (x) rb)
                            + D_ux:(b (x) ra) + D_xx:(a (x) b)]),
    H:(a(x)b) = B d2u(a, b).

One factorization of D_u at the linearization point is shared by every
first/second-order and adjoint solve.  Models supply the residual-derivative
actions (``dz_apply``, ``dz_adjoint``, ``second_rhs``); this module only
orchestrates solves and bookkeeping.
"""

import numpy as np

from .errors import ArgumentError


class LinearizationPoint:
    """Shared-factorization derivative oracle of a PtO map at one point."""

    def __init__(self, model, x0):
        self.model = model
        self.x0 = np.asarray(x0, dtype=np.float64)
        if self.x0.size != model.dim:
            raise ArgumentError("linearization point has wrong dimension")
        u, n_newton, factor = model.solve_forward(self.x0)
        self.u = u
        self.newton_iterations = n_newton
        self._lu = factor if factor is not None else model.state_factor(u, self.x0)
        self.value = model.obs_value(u)
        self._jacobian = None

    @property
    def out_dim(self):
        return self.model.out_dim

    def sensitivity_state(self, dx):
        """State perturbation du for a parameter direction (one solve)."""
        self.model.counters.sensitivity_first += 1
        return self._lu.solve(-self.model.dz_apply(self.u, self.x0, np.asarray(dx, float)))

    def jac_action(self, dx):
        return self.model.obs_direction(self.sensitivity_state(dx))

    def jac_t_action(self, w):
        """Adjoint Jacobian action via one transposed solve."""
        self.model.counters.adjoint += 1
        ws = self._lu.solve(self.model.obs_adjoint(w), trans="T")
        return -self.model.dz_adjoint(self.u, self.x0, ws)

    def hess_bilinear(self, a, b, ra=None, rb=None):
        """Symmetric bilinear Hessian action H:(a (x) b).

        First-order states may be passed in to amortize repeated directions;
        one second-order solve is performed either way.
        """
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if ra is None:
            ra = self.sensitivity_state(a)
        if rb is None:
            rb = ra if b is a else self.sensitivity_state(b)
        rhs = -self.model.second_rhs(self.u, self.x0, a, b, ra, rb)
        self.model.counters.sensitivity_second += 1
        return self.model.obs_direction(self._lu.solve(rhs))

    def hess_action(self, dx):
        dx = np.asarray(dx, dtype=np.float64)
        return self.hess_bilinear(dx, dx)

    def jacobian(self, method="auto"):
        """Assembled Jacobian, cached.

        ``method="adjoint"`` runs one transposed solve per observation;
        ``"forward"`` one sensitivity solve per parameter; ``"auto"`` picks
        the cheaper side.
        """
        if self._jacobian is None:
            if method == "auto":
                method = "adjoint" if self.out_dim <= self.model.dim else "forward"
            if method == "adjoint":
                rows = [self.jac_t_action(e) for e in np.eye(self.out_dim)]
                self._jacobian = np.array(rows)
            elif method == "forward":
                cols = [self.jac_action(e) for e in np.eye(self.model.dim)]
                self._jacobian = np.array(cols).T
            else:
                raise ArgumentError(f"unknown jacobian method {method!r}")
        return self._jacobian


def jacobian_action(lp, dx):
    return lp.jac_action(dx)


def hessian_action(lp, dx):
    return lp.hess_action(dx)


def hessian_bilinear(lp, a, b):
    return lp.hess_bilinear(a, b)


def assemble_jacobian(lp, method="auto"):
    return lp.jacobian(method=method)


def fd_jacobian_action(model, x0, dx, h):
    """Central finite-difference oracle for the Jacobian action."""
    x0 = np.asarray(x0, dtype=np.float64)
    dx = np.asarray(dx, dtype=np.float64)
    return (model.evaluate(x0 + h * dx) - model.evaluate(x0 - h * dx)) / (2.0 * h)


def fd_hessian_action(model, x0, dx, h):
    """Central FD of the Jacobian action along dx: oracle for H:(dx (x) dx)."""
    x0 = np.asarray(x0, dtype=np.float64)
    dx = np.asarray(dx, dtype=np.float64)
    lp_p = model.linearize(x0 + h * dx)
    lp_m = model.linearize(x0 - h * dx)
    return (lp_p.jac_action(dx) - lp_m.jac_action(dx)) / (2.0 * h)


def fd_best_over_steps(fd_fn, exact, steps):
    """Smallest relative FD error over a step sweep (guards cancellation)."""
    nrm = np.linalg.norm(exact)
    errs = [np.linalg.norm(fd_fn(h) - exact) / max(nrm, 1e-300) for h in steps]
    return min(errs)

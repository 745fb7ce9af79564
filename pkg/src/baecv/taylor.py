"""Taylor surrogates of the approximation error and their Gaussian moments.

The error of interest is eps(z) = G(z) - F(m) with z = (m, beta) and F a
surrogate over m alone.  Its Taylor expansion about the prior mean combines
the expansions of both maps (F's derivative blocks in beta are zero):

    eps_lin(z)  = eps(z0) + J_eps (z - z0),
    eps_quad(z) = eps_lin(z) + 1/2 H_eps:((z - z0) (x) (z - z0)).

Under z ~ N(z0, Gamma_z) the moments are analytic: the linear mean is
eps(z0) with covariance J Gamma J^T; the quadratic correction adds
1/2 H:Gamma to the mean and Q_ij = 1/2 tr(H_i Gamma H_j Gamma) to the
covariance.  Q is evaluated through a spectral factor C of Gamma_z with
r(r+1)/2 bilinear Hessian actions; the discarded spectral mass is reported,
never hidden.

``mode="accurate-only"`` restricts the expansion to G (the surrogate term is
left at full sample variance); the default expands the error itself, which
is what makes the control variates zero-variance on polynomial maps.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError


@dataclass
class TaylorMoments:
    """Analytic mean/covariance of a Taylor surrogate under the prior."""

    mean: np.ndarray
    cov: np.ndarray
    cross_cov: np.ndarray
    order: int
    rank_used: int
    trace_truncation: float

    def as_dict(self):
        return {
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "order": self.order,
            "rank_used": self.rank_used,
            "trace_truncation": self.trace_truncation,
        }


class TaylorSurrogate:
    """Matrix-free Taylor expansion of eps = G - F about the prior mean."""

    def __init__(self, lp_G, lp_F=None, order=1, n_m=None, mode="error"):
        if order not in (1, 2):
            raise ArgumentError("order must be 1 or 2")
        if mode not in ("error", "accurate-only"):
            raise ArgumentError(f"unknown surrogate mode {mode!r}")
        if lp_F is not None and n_m is None:
            raise ArgumentError("n_m (size of the m-block) required with a surrogate map")
        self.lp_G = lp_G
        self.lp_F = lp_F if mode == "error" else None
        self.order = order
        self.n_m = n_m
        self.mode = mode
        self.z0 = lp_G.x0
        self.value = lp_G.value.copy()
        if self.lp_F is not None:
            self.value = self.value - self.lp_F.value

    def _m_part(self, dz):
        return np.asarray(dz)[: self.n_m]

    def eval(self, z):
        """Surrogate value at a sample; 1 (order 1) or 2 (order 2)
        linearized accurate-model solves when matrix-free."""
        return self.eval_orders(z, (self.order,))[self.order]

    def eval_orders(self, z, orders):
        """Values of several expansion orders at once, sharing the
        first-order sensitivity state across orders."""
        orders = tuple(sorted(set(orders)))
        if any(o not in (1, 2) for o in orders):
            raise ArgumentError("orders must be within (1, 2)")
        if max(orders) > self.order:
            raise ArgumentError("surrogate order too low for requested orders")
        dz = np.asarray(z, dtype=np.float64) - self.z0
        lin = self.value.copy()
        rG = self.lp_G.sensitivity_state(dz)
        if rG is None:
            lin += self.lp_G.jac_action(dz)
        else:
            lin += self.lp_G.model.obs_direction(rG)
        rF = None
        dm = self._m_part(dz)
        if self.lp_F is not None:
            rF = self.lp_F.sensitivity_state(dm)
            if rF is None:
                lin -= self.lp_F.jac_action(dm)
            else:
                lin -= self.lp_F.model.obs_direction(rF)
        out = {}
        if 1 in orders:
            out[1] = lin
        if 2 in orders:
            quad = lin + 0.5 * self.lp_G.hess_bilinear(dz, dz, ra=rG, rb=rG)
            if self.lp_F is not None:
                quad -= 0.5 * self.lp_F.hess_bilinear(dm, dm, ra=rF, rb=rF)
            out[2] = quad
        return out

    def jacobian(self):
        """Assembled error Jacobian J_G - [J_F, 0]."""
        J = np.array(self.lp_G.jacobian(), dtype=np.float64, copy=True)
        if self.lp_F is not None:
            J[:, : self.n_m] -= self.lp_F.jacobian()
        return J

    def hess_bilinear(self, a, b, cache=None):
        """H_eps:(a (x) b); ``cache`` may hold precomputed first-order states
        keyed by column index pairs (used by the moment computation)."""
        if cache is None:
            out = self.lp_G.hess_bilinear(a, b)
            if self.lp_F is not None:
                out = out - self.lp_F.hess_bilinear(self._m_part(a), self._m_part(b))
            return out
        (rGa, rFa), (rGb, rFb) = cache
        out = self.lp_G.hess_bilinear(a, b, ra=rGa, rb=rGb)
        if self.lp_F is not None:
            out = out - self.lp_F.hess_bilinear(
                self._m_part(a), self._m_part(b), ra=rFa, rb=rFb
            )
        return out

    def first_order_states(self, dz):
        rG = self.lp_G.sensitivity_state(dz)
        rF = None
        if self.lp_F is not None:
            rF = self.lp_F.sensitivity_state(self._m_part(dz))
        return rG, rF


def eval_taylor(surrogate, z):
    return surrogate.eval(z)


def linear_moments(surrogate, prior):
    """Mean/covariance/cross-covariance of the order-1 surrogate (exact)."""
    J = surrogate.jacobian()
    cov_z = prior.cov_dense()
    JG = J @ cov_z
    cov = JG @ J.T
    return TaylorMoments(
        mean=surrogate.value.copy(),
        cov=0.5 * (cov + cov.T),
        cross_cov=JG,
        order=1,
        rank_used=prior.dim,
        trace_truncation=0.0,
    )


def quadratic_moments(surrogate, prior, factor):
    """Order-2 moments through a rank-r covariance factor.

    The mean correction is 1/2 sum_k H:(c_k (x) c_k); the covariance
    correction Q = 1/2 sum_{k,l} b_kl b_kl^T with b_kl = H:(c_k (x) c_l),
    assembled from r(r+1)/2 bilinear actions with shared first-order states.
    """
    if surrogate.order != 2:
        raise ArgumentError("quadratic moments need an order-2 surrogate")
    base = linear_moments(surrogate, prior)
    C = factor.columns
    r = factor.rank
    p = surrogate.value.size
    states = [surrogate.first_order_states(C[:, k]) for k in range(r)]
    mean_corr = np.zeros(p)
    Q = np.zeros((p, p))
    for k in range(r):
        for l in range(k, r):
            b = surrogate.hess_bilinear(
                C[:, k], C[:, l], cache=(states[k], states[l])
            )
            w = 0.5 if k == l else 1.0
            Q += w * np.outer(b, b)
            if k == l:
                mean_corr += b
    return TaylorMoments(
        mean=base.mean + 0.5 * mean_corr,
        cov=base.cov + 0.5 * (Q + Q.T),
        cross_cov=base.cross_cov,
        order=2,
        rank_used=r,
        trace_truncation=factor.truncation_error,
    )

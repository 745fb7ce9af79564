"""Shared machinery for parameter-to-observable maps.

A map exposes ``dim``, ``out_dim``, ``evaluate(x)`` and ``linearize(x)``;
the linearization provides Jacobian/Hessian actions around the base point.
PDE-backed maps count their linearized solves in a ``SolveCounters`` so the
per-sample cost accounting can be audited.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError


@dataclass
class SolveCounters:
    """Linearized-solve telemetry for one map."""

    forward: int = 0
    sensitivity_first: int = 0
    sensitivity_second: int = 0
    adjoint: int = 0

    def snapshot(self):
        return SolveCounters(
            self.forward, self.sensitivity_first, self.sensitivity_second, self.adjoint
        )

    def delta(self, before):
        return SolveCounters(
            self.forward - before.forward,
            self.sensitivity_first - before.sensitivity_first,
            self.sensitivity_second - before.sensitivity_second,
            self.adjoint - before.adjoint,
        )

    @property
    def linearized_total(self):
        return self.forward + self.sensitivity_first + self.sensitivity_second

    def as_dict(self):
        return {
            "forward": self.forward,
            "sensitivity_first": self.sensitivity_first,
            "sensitivity_second": self.sensitivity_second,
            "adjoint": self.adjoint,
        }


@dataclass
class NoiseModel:
    """Additive Gaussian measurement noise N(mean, delta^2 I)."""

    delta: float
    dim: int
    mean: np.ndarray = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ArgumentError("noise level delta must be positive")
        if self.mean is None:
            self.mean = np.zeros(self.dim)
        self.mean = np.asarray(self.mean, dtype=np.float64)

    def cov(self):
        return self.delta**2 * np.eye(self.dim)

    def draw(self, rng):
        return self.mean + self.delta * rng.standard_normal(self.dim)


@dataclass
class DataRealization:
    """Synthetic data vector with the truth and seed that generated it."""

    d: np.ndarray
    truth: np.ndarray
    seed: int
    delta: float


def evaluate(model, params):
    """Spec-level alias: apply a PtO map to a parameter vector."""
    return model.evaluate(np.asarray(params, dtype=np.float64))


def auto_noise_level(values, fraction=0.01):
    """Noise std as a fraction of the range of the noiseless observations."""
    values = np.asarray(values)
    return float((values.max() - values.min()) * fraction)


def make_data(model, truth, noise, seed):
    """Draw d = G(truth) + e with e ~ N(noise.mean, delta^2 I).

    ``noise`` may be a NoiseModel or a float fraction, in which case delta is
    auto-scaled to that fraction of the noiseless observation range.  Pass
    ``delta=0`` through a NoiseModel is not allowed; use ``noise=None`` for
    noiseless data.
    """
    truth = np.asarray(truth, dtype=np.float64)
    y = model.evaluate(truth)
    if noise is None:
        return DataRealization(y.copy(), truth, int(seed), 0.0)
    if isinstance(noise, float):
        noise = NoiseModel(auto_noise_level(y, noise), y.size)
    rng = np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(entropy=int(seed), spawn_key=(9001,)))
    )
    return DataRealization(y + noise.draw(rng), truth, int(seed), noise.delta)


class PinnedAuxiliary:
    """View of an accurate map G(m, beta) as a map of m with beta pinned.

    Used for the no-approximation-error reference, where inversion runs the
    accurate model at the true auxiliary field.
    """

    def __init__(self, accurate, beta_fixed, n_m):
        self.accurate = accurate
        self.beta_fixed = np.asarray(beta_fixed, dtype=np.float64)
        self.n_m = int(n_m)
        self.counters = accurate.counters

    @property
    def dim(self):
        return self.n_m

    @property
    def out_dim(self):
        return self.accurate.out_dim

    def _stack(self, m):
        return np.concatenate([np.asarray(m, dtype=np.float64), self.beta_fixed])

    def evaluate(self, m):
        return self.accurate.evaluate(self._stack(m))

    def linearize(self, m0):
        return _PinnedLinearization(self, self.accurate.linearize(self._stack(m0)))


class _PinnedLinearization:
    def __init__(self, pinned, lp_full):
        self.pinned = pinned
        self.lp_full = lp_full
        self.x0 = lp_full.x0[: pinned.n_m]
        self.value = lp_full.value
        self._jacobian = None

    def _pad(self, dm):
        out = np.zeros(self.lp_full.x0.size)
        out[: self.pinned.n_m] = np.asarray(dm)
        return out

    def jac_action(self, dm):
        return self.lp_full.jac_action(self._pad(dm))

    def jac_t_action(self, w):
        return self.lp_full.jac_t_action(w)[: self.pinned.n_m]

    def jacobian(self):
        if self._jacobian is None:
            rows = [self.jac_t_action(e) for e in np.eye(self.pinned.out_dim)]
            self._jacobian = np.array(rows)
        return self._jacobian

    def sensitivity_state(self, dm):
        return self.lp_full.sensitivity_state(self._pad(dm))

    def hess_bilinear(self, a, b, ra=None, rb=None):
        return self.lp_full.hess_bilinear(self._pad(a), self._pad(b), ra=ra, rb=rb)

    def hess_action(self, dm):
        return self.hess_bilinear(dm, dm)


class AssembledLinearization:
    """Linearization backed by explicit value/Jacobian/Hessian callables.

    Used by the synthetic maps; PDE maps provide the same interface through
    sensitivity solves (see ``baecv.sensitivity``).
    """

    def __init__(self, x0, value, jac, hess_bilinear=None):
        self.x0 = np.asarray(x0, dtype=np.float64)
        self.value = np.asarray(value, dtype=np.float64)
        self._jac = np.asarray(jac, dtype=np.float64)
        self._hess = hess_bilinear

    def jac_action(self, dx):
        return self._jac @ np.asarray(dx)

    def jac_t_action(self, w):
        return self._jac.T @ np.asarray(w)

    def jacobian(self):
        return self._jac

    def sensitivity_state(self, dx):
        return None

    def hess_bilinear(self, a, b, ra=None, rb=None):
        if self._hess is None:
            return np.zeros_like(self.value)
        return self._hess(np.asarray(a), np.asarray(b))

    def hess_action(self, dx):
        return self.hess_bilinear(dx, dx)

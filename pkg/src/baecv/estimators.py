"""Approximation-error statistics: Monte Carlo, Taylor control variates,
cross-covariances, conditional statistics, and the sample-free model.

All estimators consume the same counter-seeded prior sample stream, so runs
with equal seeds see identical samples (common random numbers); the stream
hash stored on the result makes that auditable.  A sample whose accurate or
surrogate solve fails is replaced by a deterministic redraw and counted;
more than 10% failures aborts the run.
"""

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, NumericalError, SolverError

log = logging.getLogger(__name__)

TAGS = ("mc", "cv-lin", "cv-quad", "sample-free-lin", "sample-free-quad")


@dataclass
class ErrorSample:
    """One offline error draw; ``z`` is kept only when requested."""

    index: int
    eps: np.ndarray
    eps_cv: np.ndarray
    z: np.ndarray
    counts: dict


@dataclass
class ErrorStats:
    """Mean/covariance of the approximation error with provenance."""

    mean: np.ndarray
    cov: np.ndarray
    tag: str
    N: int
    seed: int
    cross_cov: np.ndarray = None
    solve_counts: dict = None
    sample_hash: str = None
    failures: int = 0

    def as_dict(self):
        out = {
            "mean": np.asarray(self.mean).tolist(),
            "cov": np.asarray(self.cov).tolist(),
            "tag": self.tag,
            "N": int(self.N),
            "seed": int(self.seed),
            "solve_counts": self.solve_counts,
            "sample_hash": self.sample_hash,
            "failures": int(self.failures),
        }
        if self.cross_cov is not None:
            out["cross_cov"] = np.asarray(self.cross_cov).tolist()
        return out


def zero_stats(p):
    """The ignore-errors baseline: eps identically zero."""
    return ErrorStats(np.zeros(p), np.zeros((p, p)), "zero", 0, 0)


def generate_error_samples(G, F, prior, N, seed, n_m, taylor=None, orders=None,
                           store_z=False, max_failure_frac=0.1):
    """Draw N error samples eps = G(z) - F(m) from the prior stream.

    ``taylor`` optionally evaluates a control surrogate at each sample, for
    the expansion orders in ``orders`` (default: the surrogate's own order).
    Returns (samples, stream_hash, failures).
    """
    if N < 1:
        raise ArgumentError("need at least one sample")
    if taylor is not None and orders is None:
        orders = (taylor.order,)
    samples = []
    hasher = hashlib.sha256()
    failures = 0
    max_failures = max(1, int(np.ceil(max_failure_frac * N)))
    for idx in range(int(N)):
        for attempt in range(max_failures + 1):
            z = prior.sample_one(seed, idx, salt=17 * attempt)
            try:
                before_G = G.counters.snapshot()
                before_F = F.counters.snapshot()
                eps = G.evaluate(z) - F.evaluate(z[:n_m])
                eps_cv = taylor.eval_orders(z, orders) if taylor is not None else None
                counts = {
                    "accurate": G.counters.delta(before_G).as_dict(),
                    "surrogate": F.counters.delta(before_F).as_dict(),
                }
                break
            except SolverError as exc:
                failures += 1
                log.warning("sample %d attempt %d failed: %s", idx, attempt, exc)
                if failures > max_failures:
                    raise NumericalError(
                        f"more than {max_failure_frac:.0%} of samples failed"
                    ) from exc
        hasher.update(z.tobytes())
        samples.append(
            ErrorSample(idx, eps, eps_cv, z if store_z else None, counts)
        )
    return samples, hasher.hexdigest(), failures


def _mean_cov(values):
    arr = np.asarray(values)
    mean = arr.mean(axis=0)
    dev = arr - mean
    cov = dev.T @ dev / (len(arr) - 1)
    return mean, cov, dev


def mc_stats(G, F, prior, N, seed, n_m, store_z=False, samples=None):
    """Plain sample mean and unbiased sample covariance of the error."""
    if N < 2:
        raise ArgumentError("need at least two samples for a covariance")
    if samples is None:
        samples, stream_hash, failures = generate_error_samples(
            G, F, prior, N, seed, n_m, store_z=store_z
        )
    else:
        stream_hash, failures = _hash_of(samples), 0
    eps = [s.eps for s in samples[: int(N)]]
    mean, cov, _ = _mean_cov(eps)
    return ErrorStats(
        mean, 0.5 * (cov + cov.T), "mc", int(N), int(seed),
        solve_counts=_total_counts(samples[: int(N)]),
        sample_hash=stream_hash, failures=failures,
    )


def cv_stats(G, F, prior, surrogate, moments, N, seed, n_m, store_z=False, samples=None):
    """Control-variate estimators of the error mean and covariance.

    mean  = (1/N) sum (eps - eps_cv)               + E[eps_cv]
    cov   = (1/(N-1)) sum [dev dev^T - dev_cv dev_cv^T] + Cov[eps_cv]

    Deviations use within-run sample means; the covariance estimate may be
    indefinite at small N (kept raw here, clipped only when consumed by the
    total-error model).
    """
    if N < 2:
        raise ArgumentError("need at least two samples for a covariance")
    if moments.order != surrogate.order:
        raise ArgumentError("moments and surrogate orders disagree")
    if samples is None:
        samples, stream_hash, failures = generate_error_samples(
            G, F, prior, N, seed, n_m, taylor=surrogate, store_z=store_z
        )
    else:
        stream_hash, failures = _hash_of(samples), 0
    samples = samples[: int(N)]
    eps = np.asarray([s.eps for s in samples])
    eps_cv = np.asarray([s.eps_cv[surrogate.order] for s in samples])
    mean = (eps - eps_cv).mean(axis=0) + moments.mean
    _, cov_eps, _ = _mean_cov(eps)
    _, cov_cv, _ = _mean_cov(eps_cv)
    cov = cov_eps - cov_cv + moments.cov
    tag = "cv-lin" if surrogate.order == 1 else "cv-quad"
    return ErrorStats(
        mean, 0.5 * (cov + cov.T), tag, int(N), int(seed),
        solve_counts=_total_counts(samples),
        sample_hash=stream_hash, failures=failures,
    )


def cross_cov_stats(samples, prior, surrogate, moments):
    """Control-variate estimator of the error/parameter cross-covariance.

    Requires samples stored with z.  The analytic term is the order-free
    J_eps Gamma_z carried by the moments.
    """
    if any(s.z is None for s in samples):
        raise ArgumentError("cross-covariance needs samples stored with z")
    z = np.asarray([s.z for s in samples])
    eps = np.asarray([s.eps for s in samples])
    dz = z - prior.mean
    N = len(samples)
    eps_dev = eps - eps.mean(axis=0)
    cross = eps_dev.T @ dz / (N - 1)
    if surrogate is not None:
        eps_cv = np.asarray([s.eps_cv[surrogate.order] for s in samples])
        cv_dev = eps_cv - eps_cv.mean(axis=0)
        cross -= cv_dev.T @ dz / (N - 1)
        cross += moments.cross_cov
    return cross


def conditional_stats(stats, prior_m, mass_m, m):
    """Gaussian conditioning of the error on the primary parameter.

    Uses the mass-weighted cross-covariance ``E[(eps-eps0)(m-m0)^T] M_m`` and
    the known prior covariance of m.  An indefinite conditional covariance is
    flagged (third return), not repaired.
    """
    if stats.cross_cov is None:
        raise ArgumentError("stats carry no cross-covariance")
    n = prior_m.dim
    cross_m = np.asarray(stats.cross_cov)[:, :n] @ mass_m
    gamma_m = prior_m.cov_dense()
    sol = np.linalg.solve(gamma_m, np.asarray(m) - prior_m.mean)
    mean = stats.mean + cross_m @ sol
    cov = stats.cov - cross_m @ np.linalg.solve(gamma_m, cross_m.T)
    cov = 0.5 * (cov + cov.T)
    indefinite = bool(np.linalg.eigvalsh(cov).min() < -1e-10 * max(np.abs(cov).max(), 1e-300))
    return mean, cov, indefinite


def sample_free_stats(moments, seed=0):
    """Wrap analytic Taylor moments as zero-sample error statistics."""
    tag = "sample-free-lin" if moments.order == 1 else "sample-free-quad"
    return ErrorStats(
        moments.mean.copy(), moments.cov.copy(), tag, 0, int(seed),
        cross_cov=None if moments.cross_cov is None else moments.cross_cov.copy(),
    )


def total_error_model(stats, noise):
    """Total-error Gaussian (eta0, Gamma_eta) = (eps0 + e0, Gamma_eps + Gamma_e).

    Negative eigenvalues of the (possibly indefinite) covariance estimate are
    clipped at zero before adding the SPD noise covariance; clipping is
    logged, never silent.
    """
    eta0 = stats.mean + noise.mean
    cov = 0.5 * (stats.cov + np.asarray(stats.cov).T)
    lam, vec = np.linalg.eigh(cov)
    if lam.min() < 0:
        log.info(
            "clipping %d negative eigenvalues (min %.3e) of the %s covariance",
            int((lam < 0).sum()), lam.min(), stats.tag,
        )
        cov = (vec * np.clip(lam, 0.0, None)) @ vec.T
        cov = 0.5 * (cov + cov.T)
    return eta0, cov + noise.cov()


def _total_counts(samples):
    keys = ("forward", "sensitivity_first", "sensitivity_second", "adjoint")
    out = {"accurate": dict.fromkeys(keys, 0), "surrogate": dict.fromkeys(keys, 0)}
    for s in samples:
        for side in out:
            for k in keys:
                out[side][k] += s.counts[side][k]
    out["n_samples"] = len(samples)
    return out


def _hash_of(samples):
    if any(s.z is None for s in samples):
        return None
    hasher = hashlib.sha256()
    for s in samples:
        hasher.update(s.z.tobytes())
    return hasher.hexdigest()

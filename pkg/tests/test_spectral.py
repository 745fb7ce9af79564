import numpy as np
import pytest

from baecv.errors import ArgumentError
from baecv.estimators import ErrorStats
from baecv.models import NoiseModel
from baecv.spectral import (
    build_noise_inverse,
    generalized_eig,
    smw_inverse,
    spectrum_monitor,
    stabilization_n,
)

from conftest import rel_err


def _random_spd(rng, p, scale=1.0):
    A = rng.standard_normal((p, p))
    return scale * (A @ A.T + 0.1 * p * np.eye(p))


def _stats(cov, N=10, tag="mc"):
    p = cov.shape[0]
    return ErrorStats(np.zeros(p), cov, tag, N, 0)


class TestGeneralizedEig:
    def test_proportional_covariances(self):
        rng = np.random.default_rng(0)
        cov_e = _random_spd(rng, 5)
        lam, V = generalized_eig(3.0 * cov_e, cov_e)
        assert np.allclose(lam, 3.0, atol=1e-10)
        assert np.allclose(V.T @ cov_e @ V, np.eye(5), atol=1e-9)

    def test_white_noise_reduces_to_ordinary_spectrum(self):
        rng = np.random.default_rng(1)
        cov = _random_spd(rng, 6)
        delta = 0.2
        lam, _ = generalized_eig(cov, delta**2 * np.eye(6))
        ordinary = np.linalg.eigvalsh(cov)[::-1]
        assert np.allclose(lam, ordinary / delta**2, rtol=1e-10)

    def test_two_by_two_hand_case(self):
        lam, _ = generalized_eig(np.diag([4.0, 1.0]), np.diag([2.0, 1.0]))
        assert np.allclose(lam, [2.0, 1.0])

    def test_descending_order(self):
        rng = np.random.default_rng(2)
        lam, _ = generalized_eig(_random_spd(rng, 8), _random_spd(rng, 8))
        assert np.all(np.diff(lam) <= 1e-12)

    def test_congruence_invariance(self):
        rng = np.random.default_rng(3)
        cov_eps, cov_e = _random_spd(rng, 5), _random_spd(rng, 5)
        C = rng.standard_normal((5, 5)) + 5 * np.eye(5)
        lam1, _ = generalized_eig(cov_eps, cov_e)
        lam2, _ = generalized_eig(C @ cov_eps @ C.T, C @ cov_e @ C.T)
        assert rel_err(lam1, lam2) <= 1e-9

    def test_non_spd_noise_raises(self):
        with pytest.raises(ArgumentError):
            generalized_eig(np.eye(2), np.diag([1.0, -1.0]))
        with pytest.raises(ArgumentError):
            generalized_eig(np.eye(3), np.eye(2))


class TestSmwInverse:
    def test_full_rank_is_exact_over_random_pairs(self):
        rng = np.random.default_rng(4)
        for trial in range(100):
            p = int(rng.integers(2, 8))
            cov_eps = _random_spd(rng, p)
            cov_e = _random_spd(rng, p)
            dec = build_noise_inverse(cov_eps, cov_e)
            x = rng.standard_normal(p)
            direct = np.linalg.solve(cov_e + cov_eps, x)
            assert np.linalg.norm(dec.apply(x) - direct) <= 1e-10 * np.linalg.norm(direct)

    def test_rank_zero_reduces_to_noise_inverse(self):
        rng = np.random.default_rng(5)
        cov_eps, cov_e = _random_spd(rng, 4), _random_spd(rng, 4)
        dec = build_noise_inverse(cov_eps, cov_e, rank=0)
        x = rng.standard_normal(4)
        assert np.allclose(dec.apply(x), np.linalg.solve(cov_e, x))

    def test_truncation_error_monotone_in_rank(self):
        # the eigenvectors are Gamma_e-orthonormal, so the apply error is
        # nonincreasing in r when measured in the Gamma_e norm
        rng = np.random.default_rng(6)
        p = 10
        cov_eps, cov_e = _random_spd(rng, p), _random_spd(rng, p)
        x = rng.standard_normal(p)
        direct = np.linalg.solve(cov_e + cov_eps, x)
        errs = []
        for r in range(p + 1):
            dec = build_noise_inverse(cov_eps, cov_e, rank=r)
            e = dec.apply(x) - direct
            errs.append(np.sqrt(e @ cov_e @ e))
        assert np.all(np.diff(errs) <= 1e-12)
        assert errs[-1] <= 1e-10 * max(errs)

    def test_threshold_rank_rule_and_bound(self):
        rng = np.random.default_rng(7)
        p = 12
        # strongly decaying error spectrum against white noise; eigenvalues
        # kept away from the 0.1 threshold
        U, _ = np.linalg.qr(rng.standard_normal((p, p)))
        lam = np.array([100.0, 10.0, 1.0] + [10.0 ** (-k) for k in range(2, p - 1)])
        cov_eps = (U * lam) @ U.T
        noise = NoiseModel(1.0, p)
        dec = build_noise_inverse(cov_eps, noise.cov(), eig_threshold=0.1)
        assert dec.rank == 3
        x = rng.standard_normal(p)
        direct = np.linalg.solve(noise.cov() + cov_eps, x)
        # apply error bounded by the stated truncation term (up to norms)
        err = np.linalg.norm(dec.apply(x) - direct)
        assert err <= dec.truncation_bound * np.linalg.norm(x) * 10

    def test_smw_inverse_function_wrapper(self):
        rng = np.random.default_rng(8)
        cov_eps, cov_e = _random_spd(rng, 3), _random_spd(rng, 3)
        dec = build_noise_inverse(cov_eps, cov_e)
        x = rng.standard_normal(3)
        assert np.array_equal(smw_inverse(dec, x), dec.apply(x))


class TestSpectrumMonitor:
    def test_identical_stats_stabilize(self):
        rng = np.random.default_rng(9)
        cov = _random_spd(rng, 4)
        noise = NoiseModel(0.1, 4)
        report = spectrum_monitor([_stats(cov, 10), _stats(cov, 20)], noise)
        assert report["stabilized"]
        assert report["max_rel_change"] == 0.0

    def test_all_below_threshold_is_trivially_stable(self):
        noise = NoiseModel(1.0, 3)
        a = _stats(1e-4 * np.eye(3), 10)
        b = _stats(2e-4 * np.eye(3), 20)
        report = spectrum_monitor([a, b], noise, eig_threshold=0.1)
        assert report["stabilized"]

    def test_changing_leading_mode_is_unstable(self):
        noise = NoiseModel(0.1, 3)
        a = _stats(np.diag([1.0, 0.5, 1e-6]), 10)
        b = _stats(np.diag([2.0, 0.5, 1e-6]), 20)
        report = spectrum_monitor([a, b], noise, rel_tol=0.05)
        assert not report["stabilized"]

    def test_stabilization_n_finds_first_stable_point(self):
        noise = NoiseModel(0.1, 2)
        seq = [
            _stats(np.diag([1.0, 0.1]), 2),
            _stats(np.diag([2.0, 0.1]), 5),
            _stats(np.diag([2.02, 0.1]), 10),
            _stats(np.diag([2.021, 0.1]), 20),
        ]
        assert stabilization_n(seq, noise, rel_tol=0.05) == 10

    def test_requires_two_entries(self):
        noise = NoiseModel(0.1, 2)
        with pytest.raises(ArgumentError):
            spectrum_monitor([_stats(np.eye(2), 2)], noise)

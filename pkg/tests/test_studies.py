import filecmp
import json
import os

import numpy as np
import pytest

from baecv.errors import ConfigError, NumericalError
from baecv.inversion import LaplacePosterior
from baecv.studies import (
    bundle_from_config,
    canonical_config,
    convergence_rows,
    convergence_study,
    cost_ledger,
    cost_study,
    loglog_slope,
    median_metric,
    posterior_rows,
    posterior_study,
    psd_sqrt,
    validate_config,
    wasserstein2_sq,
)

from conftest import rel_err, small_robin_config


def _post(rng, n, mean=None, cov=None):
    if cov is None:
        A = rng.standard_normal((n, n))
        cov = A @ A.T + n * np.eye(n) * 0.1
    if mean is None:
        mean = rng.standard_normal(n)
    return LaplacePosterior(np.asarray(mean, float), np.asarray(cov, float), [])


class TestWasserstein:
    def test_identical_posteriors_give_zero(self):
        rng = np.random.default_rng(0)
        post = _post(rng, 5)
        assert wasserstein2_sq(post, post, np.eye(5)) <= 1e-10

    def test_scalar_closed_form(self):
        a = _post(None, 1, mean=[1.0], cov=[[0.25]])
        b = _post(None, 1, mean=[3.0], cov=[[0.81]])
        mass = np.array([[2.0]])
        expected = 2.0 * (1.0 - 3.0) ** 2 + (0.5 - 0.9) ** 2
        assert wasserstein2_sq(a, b, mass) == pytest.approx(expected, rel=1e-9)

    def test_commuting_diagonal_closed_form(self):
        lam = np.array([1.0, 4.0, 0.09])
        mu = np.array([0.25, 1.0, 2.25])
        a = _post(None, 3, mean=np.zeros(3), cov=np.diag(lam))
        b = _post(None, 3, mean=np.ones(3), cov=np.diag(mu))
        expected = 3.0 + ((np.sqrt(lam) - np.sqrt(mu)) ** 2).sum()
        assert wasserstein2_sq(a, b, np.eye(3)) == pytest.approx(expected, rel=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a, b = _post(rng, 4), _post(rng, 4)
            d1 = wasserstein2_sq(a, b, np.eye(4))
            d2 = wasserstein2_sq(b, a, np.eye(4))
            assert abs(d1 - d2) <= 1e-9 * max(d1, 1.0)

    def test_zero_iff_equal(self):
        rng = np.random.default_rng(2)
        a = _post(rng, 3)
        b = LaplacePosterior(a.m_map.copy(), a.cov.copy(), [])
        assert wasserstein2_sq(a, b, np.eye(3)) <= 1e-10
        b2 = LaplacePosterior(a.m_map + 0.1, a.cov, [])
        assert wasserstein2_sq(a, b2, np.eye(3)) > 1e-4

    def test_precomputed_sqrt_matches(self):
        rng = np.random.default_rng(3)
        a, b = _post(rng, 4), _post(rng, 4)
        d1 = wasserstein2_sq(a, b, np.eye(4))
        d2 = wasserstein2_sq(a, b, np.eye(4), sqrt_b=psd_sqrt(b.cov))
        assert d1 == pytest.approx(d2, rel=1e-12)


class TestConfig:
    def test_canonical_configs_validate(self):
        validate_config(canonical_config("robin"))
        validate_config(canonical_config("semilinear"))

    def test_bad_grid_rejected(self):
        cfg = small_robin_config()
        cfg["study"]["n_grid"] = [10, 5]
        with pytest.raises(ConfigError):
            validate_config(cfg)

    def test_unknown_estimator_rejected(self):
        cfg = small_robin_config()
        cfg["study"]["estimators"] = ["mc", "bootstrap"]
        with pytest.raises(ConfigError):
            validate_config(cfg)

    def test_missing_section_rejected(self):
        cfg = small_robin_config()
        del cfg["priors"]
        with pytest.raises(ConfigError):
            validate_config(cfg)


class TestConvergenceStudy:
    def test_degenerate_single_cell_study(self, small_robin_bundle):
        rows, ref = convergence_rows(small_robin_bundle, estimators=["mc"],
                                     n_grid=[2], n_seeds=1)
        assert len(rows) == 1
        assert rows[0]["N"] == 2 and rows[0]["estimator"] == "mc"

    def test_errors_shrink_with_n(self, small_robin_bundle):
        rows, _ = convergence_rows(small_robin_bundle)
        med = {}
        for r in rows:
            if r["estimator"] == "mc":
                med.setdefault(r["N"], []).append(r["err_mean_l2"])
        n_values = sorted(med)
        meds = [float(np.median(med[n])) for n in n_values]
        assert meds[-1] < meds[0]

    def test_loglog_slope_helper(self):
        n = np.array([2, 5, 10, 20, 50])
        errs = 3.0 / np.sqrt(n)
        assert loglog_slope(n, errs) == pytest.approx(-0.5, abs=1e-12)

    def test_study_outputs_are_reproducible_bytes(self, tmp_path):
        cfg = small_robin_config()
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        res_a = convergence_study(bundle_from_config(cfg, master_seed=3), str(out_a))
        res_b = convergence_study(bundle_from_config(cfg, master_seed=3), str(out_b))
        for name in ("convergence.csv", "convergence_summary.csv", "spectra.csv"):
            assert filecmp.cmp(out_a / name, out_b / name, shallow=False), name

    def test_spectra_include_noise_reference(self, tmp_path):
        cfg = small_robin_config()
        res = convergence_study(bundle_from_config(cfg, master_seed=3), str(tmp_path))
        with open(tmp_path / "spectra.csv") as fh:
            header = fh.readline().strip().split(",")
        assert "noise_var" in header and "eigenvalue" in header


class TestPosteriorStudy:
    def test_rows_and_baselines(self, small_robin_bundle):
        rows, failures = posterior_rows(small_robin_bundle, estimators=["mc"],
                                        n_grid=[5], n_seeds=2, n_data=2,
                                        reference_n=100)
        assert failures == 0
        tags = {r["estimator"] for r in rows}
        assert {"reference", "ignore", "no-error", "mc"} <= tags
        ref_rows = [r for r in rows if r["estimator"] == "reference"]
        assert all(r["w2_sq"] <= 1e-8 for r in ref_rows)

    def test_median_metric_helper(self):
        rows = [
            {"estimator": "mc", "N": 5, "w2_sq": 1.0, "map_err_sq": 0.1},
            {"estimator": "mc", "N": 5, "w2_sq": 3.0, "map_err_sq": 0.3},
            {"estimator": "mc", "N": 10, "w2_sq": 9.0, "map_err_sq": 0.9},
        ]
        assert median_metric(rows, "mc", 5) == 2.0
        assert median_metric(rows, "mc", 10, "map_err_sq") == pytest.approx(0.9)

    def test_threaded_run_matches_serial(self, tmp_path):
        cfg = small_robin_config()
        b1 = bundle_from_config(cfg, master_seed=5, threads=1)
        b2 = bundle_from_config(cfg, master_seed=5, threads=4)
        r1, f1 = posterior_rows(b1, estimators=["mc"], n_grid=[5], n_seeds=2,
                                n_data=1, reference_n=60)
        r2, f2 = posterior_rows(b2, estimators=["mc"], n_grid=[5], n_seeds=2,
                                n_data=1, reference_n=60)
        assert f1 == f2 == 0
        assert [r["estimator"] for r in r1] == [r["estimator"] for r in r2]
        for a, b in zip(r1, r2):
            assert a["w2_sq"] == pytest.approx(b["w2_sq"], rel=1e-12)

    def test_full_study_writes_report(self, tmp_path, small_robin_bundle):
        res = posterior_study(small_robin_bundle, str(tmp_path))
        assert os.path.exists(tmp_path / "posterior_metrics.csv")
        assert os.path.exists(tmp_path / "posterior_summary.csv")
        with open(tmp_path / "posterior_report.json") as fh:
            report = json.load(fh)
        assert report["failures"] == res["failures"]


class TestCostLedger:
    def test_counts_match_table(self, small_robin_bundle):
        rows, per = cost_ledger(small_robin_bundle, ("mc", "cv-lin", "cv-quad"),
                                n_samples=4, seed=0)
        for est, extra in (("mc", 0), ("cv-lin", 1), ("cv-quad", 2)):
            for rec in per[est]:
                assert rec["sensitivity_first"] + rec["sensitivity_second"] == extra
                assert rec["accurate_linearized_total"] == rec["forward"] + extra

    def test_linear_model_forward_is_one(self, small_robin_bundle):
        _, per = cost_ledger(small_robin_bundle, ("mc",), n_samples=3, seed=1)
        assert all(rec["forward"] == 1 for rec in per["mc"])

    def test_newton_model_forward_counts(self, small_semilinear_bundle):
        _, per = cost_ledger(small_semilinear_bundle, ("mc", "cv-lin"),
                             n_samples=3, seed=0)
        for rec in per["mc"]:
            assert rec["forward"] >= 2  # initial solve plus Newton steps
        for rec_mc, rec_cv in zip(per["mc"], per["cv-lin"]):
            assert rec_cv["accurate_linearized_total"] == rec_cv["forward"] + 1

    def test_empty_ledger(self, small_robin_bundle):
        rows, per = cost_ledger(small_robin_bundle, (), n_samples=3)
        assert rows == [] and per == {}

    def test_cost_study_checks_pass(self, tmp_path, small_robin_bundle):
        res = cost_study(small_robin_bundle, str(tmp_path), n_samples=3, seed=2)
        assert all(res["checks"].values())

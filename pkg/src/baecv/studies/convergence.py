"""Convergence of the error statistics toward a high-N reference.

For every estimator, sample count on the grid, and seed, the study records
the l2/linf error of the mean estimate and the Frobenius error of the
covariance estimate against an mc reference; sample-free models enter at
N = 0.  Per-seed streams are drawn once at the largest N and reused as
prefixes, which is what makes error curves across N comparable (common
random numbers).
"""

import os

import numpy as np

from ..spectral import generalized_eig
from .io import write_csv, write_json
from .setup import stream_seed

CONVERGENCE_COLUMNS = ["estimator", "N", "seed", "err_mean_l2", "err_mean_linf", "err_cov_fro"]
SPECTRUM_COLUMNS = ["estimator", "N", "seed", "index", "eigenvalue", "noise_var"]
SUMMARY_COLUMNS = [
    "estimator", "N", "median_err_mean_l2", "q25_err_mean_l2", "q75_err_mean_l2",
    "mean_err_mean_l2", "median_err_mean_linf", "median_err_cov_fro",
    "q25_err_cov_fro", "q75_err_cov_fro", "mean_err_cov_fro",
]


def _errors(stats, ref):
    dm = np.asarray(stats.mean) - np.asarray(ref.mean)
    dc = np.asarray(stats.cov) - np.asarray(ref.cov)
    return (
        float(np.linalg.norm(dm)),
        float(np.abs(dm).max()),
        float(np.linalg.norm(dc, "fro")),
    )


def convergence_rows(bundle, estimators=None, n_grid=None, n_seeds=None, reference=None):
    """Raw convergence records: one dict per (estimator, N, seed)."""
    study = bundle.cfg["study"]
    estimators = study["estimators"] if estimators is None else estimators
    n_grid = study["n_grid"] if n_grid is None else n_grid
    n_seeds = study["n_seeds"] if n_seeds is None else n_seeds
    ref = bundle.reference_stats() if reference is None else reference

    rows = []
    sampling = [e for e in estimators if e in ("mc", "cv-lin", "cv-quad")]
    free = [e for e in estimators if e.startswith("sample-free")]
    for est in free:
        stats = bundle.stats_for(est, 0, 0)
        e2, einf, efro = _errors(stats, ref)
        rows.append({"estimator": est, "N": 0, "seed": 0,
                     "err_mean_l2": e2, "err_mean_linf": einf, "err_cov_fro": efro})
    for s in range(n_seeds):
        seed = stream_seed(bundle.master_seed, "est", s)
        if sampling:
            samples = bundle.stream(seed, max(n_grid))
        for est in sampling:
            for N in n_grid:
                stats = bundle.stats_for(est, N, seed, samples=samples[:N])
                e2, einf, efro = _errors(stats, ref)
                rows.append({"estimator": est, "N": N, "seed": seed,
                             "err_mean_l2": e2, "err_mean_linf": einf,
                             "err_cov_fro": efro})
    return rows, ref


def summarize(rows):
    """Median/quantile/mean aggregation per (estimator, N)."""
    keys = sorted({(r["estimator"], r["N"]) for r in rows})
    out = []
    for est, N in keys:
        sel = [r for r in rows if r["estimator"] == est and r["N"] == N]
        m2 = np.array([r["err_mean_l2"] for r in sel])
        mi = np.array([r["err_mean_linf"] for r in sel])
        cf = np.array([r["err_cov_fro"] for r in sel])
        out.append({
            "estimator": est, "N": N,
            "median_err_mean_l2": float(np.median(m2)),
            "q25_err_mean_l2": float(np.quantile(m2, 0.25)),
            "q75_err_mean_l2": float(np.quantile(m2, 0.75)),
            "mean_err_mean_l2": float(m2.mean()),
            "median_err_mean_linf": float(np.median(mi)),
            "median_err_cov_fro": float(np.median(cf)),
            "q25_err_cov_fro": float(np.quantile(cf, 0.25)),
            "q75_err_cov_fro": float(np.quantile(cf, 0.75)),
            "mean_err_cov_fro": float(cf.mean()),
        })
    return out


def loglog_slope(n_values, errors):
    """Least-squares slope of log(error) against log(N)."""
    x = np.log(np.asarray(n_values, dtype=np.float64))
    y = np.log(np.asarray(errors, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def spectrum_rows(bundle, estimators, n_grid, seed_index=0):
    """Eigenvalue-vs-index records of the estimated covariances."""
    noise = bundle.noise()
    cov_e = noise.cov()
    rows = []
    seed = stream_seed(bundle.master_seed, "est", seed_index)
    for est in estimators:
        grid = [0] if est.startswith("sample-free") else n_grid
        for N in grid:
            stats = bundle.stats_for(est, N, 0 if N == 0 else seed)
            lam, _ = generalized_eig(stats.cov, cov_e)
            # Report in absolute units: generalized eigenvalue * delta^2.
            for i, v in enumerate(lam * noise.delta**2):
                rows.append({"estimator": est, "N": N, "seed": 0 if N == 0 else seed,
                             "index": i, "eigenvalue": float(v),
                             "noise_var": noise.delta**2})
    return rows


def convergence_study(bundle, out_dir):
    """Run the full convergence study and write its CSV/JSON report."""
    rows, ref = convergence_rows(bundle)
    study = bundle.cfg["study"]
    paths = {}
    paths["convergence"] = write_csv(
        os.path.join(out_dir, "convergence.csv"), CONVERGENCE_COLUMNS,
        [[r[c] for c in CONVERGENCE_COLUMNS] for r in rows],
    )
    summary = summarize(rows)
    paths["summary"] = write_csv(
        os.path.join(out_dir, "convergence_summary.csv"), SUMMARY_COLUMNS,
        [[r[c] for c in SUMMARY_COLUMNS] for r in summary],
    )
    spec_rows = spectrum_rows(bundle, study["estimators"], study["n_grid"])
    paths["spectra"] = write_csv(
        os.path.join(out_dir, "spectra.csv"), SPECTRUM_COLUMNS,
        [[r[c] for c in SPECTRUM_COLUMNS] for r in spec_rows],
    )
    report = {
        "config": bundle.cfg,
        "master_seed": bundle.master_seed,
        "reference": {"tag": ref.tag, "N": ref.N, "seed": ref.seed},
        "outputs": {k: os.path.basename(v) for k, v in paths.items()},
    }
    write_json(os.path.join(out_dir, "convergence_report.json"), report)
    return {"rows": rows, "summary": summary, "paths": paths, "reference": ref}

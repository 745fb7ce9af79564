"""Double-loop posterior accuracy study.

Outer loop: synthetic data realizations (truth drawn from the prior, noise
added).  Inner loop: estimator seeds and sample counts.  Every cell solves
the corrected inverse problem and records the mass-weighted MAP error and
squared 2-Wasserstein distance to that realization's reference posterior
(mc statistics at the reference N).  Baselines: the ignore-errors inversion
and the no-approximation-error inversion with the true auxiliary field.
"""

import logging
import os

import numpy as np

from ..errors import NumericalError
from ..estimators import zero_stats
from ..inversion import solve_bae
from .io import write_csv, write_json
from .setup import stream_seed
from .wasserstein import psd_sqrt, wasserstein2_sq

log = logging.getLogger(__name__)

POSTERIOR_COLUMNS = ["data_id", "estimator", "N", "seed", "map_err_sq", "w2_sq"]


def _map_err_sq(post, ref_post, mass_m):
    dm = post.m_map - ref_post.m_map
    return float(dm @ (mass_m @ dm))


def posterior_rows(bundle, estimators=None, n_grid=None, n_seeds=None, n_data=None,
                   reference_n=None):
    """Raw posterior-accuracy records, one per study cell."""
    study = bundle.cfg["study"]
    estimators = study.get("posterior_estimators", ["mc"]) if estimators is None else estimators
    n_grid = study.get("posterior_n_grid", [5, 10, 20]) if n_grid is None else n_grid
    n_seeds = study.get("posterior_seeds", 10) if n_seeds is None else n_seeds
    n_data = study.get("n_data", 5) if n_data is None else n_data
    reference_n = study.get("posterior_reference_n", study["reference_n"]) \
        if reference_n is None else reference_n

    noise = bundle.noise()
    ref_stats = bundle.reference_stats(reference_n)
    # Error statistics are data-independent: compute each (estimator, N, seed)
    # cell once and reuse it across all data realizations.
    cells = []
    for s in range(n_seeds):
        seed = stream_seed(bundle.master_seed, "est", s)
        bundle.stream(seed, max(n_grid))
        for est in estimators:
            for N in n_grid:
                if est.startswith("sample-free"):
                    if s == 0:
                        cells.append((est, 0, 0, bundle.stats_for(est, 0, 0)))
                else:
                    cells.append((est, N, seed, bundle.stats_for(est, N, seed)))

    rows = []
    failures = 0
    for i in range(n_data):
        data = bundle.data_realization(i)
        ref_post = solve_bae(bundle.F, data.d, ref_stats, noise, bundle.prior_m,
                             tag="reference")
        ref_sqrt = psd_sqrt(ref_post.cov)
        # Reference vs itself: numerical-zero sanity record.
        rows.append({
            "data_id": i, "estimator": "reference", "N": ref_stats.N, "seed": ref_stats.seed,
            "map_err_sq": 0.0,
            "w2_sq": wasserstein2_sq(ref_post, ref_post, bundle.mass_m, sqrt_b=ref_sqrt),
        })
        # Ignore-errors baseline.
        base_post = solve_bae(bundle.F, data.d, zero_stats(bundle.p), noise,
                              bundle.prior_m, tag="ignore")
        rows.append({
            "data_id": i, "estimator": "ignore", "N": 0, "seed": 0,
            "map_err_sq": _map_err_sq(base_post, ref_post, bundle.mass_m),
            "w2_sq": wasserstein2_sq(base_post, ref_post, bundle.mass_m, sqrt_b=ref_sqrt),
        })
        # No-approximation-error baseline: true auxiliary field in the model.
        true_surr = bundle.true_aux_surrogate(data.truth)
        noerr_post = solve_bae(true_surr, data.d, zero_stats(bundle.p), noise,
                               bundle.prior_m, tag="no-error")
        rows.append({
            "data_id": i, "estimator": "no-error", "N": 0, "seed": 0,
            "map_err_sq": _map_err_sq(noerr_post, ref_post, bundle.mass_m),
            "w2_sq": wasserstein2_sq(noerr_post, ref_post, bundle.mass_m, sqrt_b=ref_sqrt),
        })
        def run_cell(cell):
            est, N, seed, stats = cell
            try:
                post = solve_bae(bundle.F, data.d, stats, noise, bundle.prior_m)
            except NumericalError as exc:
                log.warning("cell (%s, N=%d, seed=%d, data=%d) failed: %s",
                            est, N, seed, i, exc)
                return None
            return {
                "data_id": i, "estimator": est, "N": N, "seed": seed,
                "map_err_sq": _map_err_sq(post, ref_post, bundle.mass_m),
                "w2_sq": wasserstein2_sq(post, ref_post, bundle.mass_m, sqrt_b=ref_sqrt),
            }

        threads = getattr(bundle, "threads", 1)
        if threads > 1:
            # Cells are independent; reduction keeps the submission order so
            # output rows do not depend on completion order.
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(run_cell, cells))
        else:
            results = [run_cell(c) for c in cells]
        for res in results:
            if res is None:
                failures += 1
            else:
                rows.append(res)
    return rows, failures


def median_metric(rows, estimator, N=None, metric="w2_sq"):
    sel = [r[metric] for r in rows
           if r["estimator"] == estimator and (N is None or r["N"] == N)]
    return float(np.median(sel))


def posterior_study(bundle, out_dir):
    """Run the double-MC posterior study and write its report."""
    rows, failures = posterior_rows(bundle)
    paths = {
        "posterior": write_csv(
            os.path.join(out_dir, "posterior_metrics.csv"), POSTERIOR_COLUMNS,
            [[r[c] for c in POSTERIOR_COLUMNS] for r in rows],
        )
    }
    estimators = sorted({r["estimator"] for r in rows})
    summary = []
    for est in estimators:
        ns = sorted({r["N"] for r in rows if r["estimator"] == est})
        for N in ns:
            summary.append({
                "estimator": est, "N": N,
                "median_map_err_sq": median_metric(rows, est, N, "map_err_sq"),
                "median_w2_sq": median_metric(rows, est, N, "w2_sq"),
            })
    paths["summary"] = write_csv(
        os.path.join(out_dir, "posterior_summary.csv"),
        ["estimator", "N", "median_map_err_sq", "median_w2_sq"],
        [[r["estimator"], r["N"], r["median_map_err_sq"], r["median_w2_sq"]]
         for r in summary],
    )
    report = {
        "config": bundle.cfg,
        "master_seed": bundle.master_seed,
        "failures": failures,
        "outputs": {k: os.path.basename(v) for k, v in paths.items()},
    }
    write_json(os.path.join(out_dir, "posterior_report.json"), report)
    return {"rows": rows, "summary": summary, "paths": paths, "failures": failures}

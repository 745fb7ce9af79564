"""Experiment command line.

Subcommands mirror the pipeline stages: mesh export, prior sampling, error
statistics, spectra, a single inversion, the two study drivers, and the
solve-cost ledger.  Exit codes: 0 success, 2 configuration error,
3 numerical failure.
"""

import functools
import json
import os
import sys

import click
import numpy as np

from . import __version__
from .errors import ArgumentError, ConfigError, NumericalError
from .estimators import zero_stats
from .inversion import solve_bae
from .spectral import generalized_eig
from .studies import (
    bundle_from_config,
    canonical_config,
    convergence_study,
    cost_study,
    load_config,
    posterior_study,
    stream_seed,
)
from .studies.io import write_csv, write_json

CONFIG_ERROR_EXIT = 2
NUMERICAL_ERROR_EXIT = 3


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, ArgumentError, FileNotFoundError) as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(CONFIG_ERROR_EXIT)
        except NumericalError as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(NUMERICAL_ERROR_EXIT)

    return wrapper


def _load(config, default=None):
    if config is None:
        if default is None:
            raise ConfigError("--config is required (or use --example)")
        return canonical_config(default)
    return load_config(config)


def _common(fn):
    fn = click.option("--config", type=click.Path(), default=None,
                      help="Experiment config JSON.")(fn)
    fn = click.option("--example", type=click.Choice(["robin", "semilinear"]),
                      default=None, help="Use a built-in config.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True,
                      help="Master seed.")(fn)
    fn = click.option("--out", type=click.Path(), default="out", show_default=True,
                      help="Output directory.")(fn)
    fn = click.option("--threads", type=int, default=1, show_default=True,
                      help="Worker threads for independent study cells.")(fn)
    return fn


def _bundle(config, example, seed, threads):
    cfg = _load(config, default=example)
    return bundle_from_config(cfg, master_seed=seed, threads=threads)


@click.group()
@click.version_option(version=__version__)
def main():
    """Approximation-error statistics and corrected Bayesian inversion."""


@main.command()
@_common
@_handle_errors
def mesh(config, example, seed, out, threads):
    """Export the experiment mesh as JSON."""
    bundle = _bundle(config, example, seed, threads)
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "mesh.json")
    bundle.mesh.save(path)
    click.echo(f"mesh: {bundle.mesh.num_vertices} nodes, "
               f"{bundle.mesh.num_triangles} triangles -> {path}")


@main.command()
@_common
@click.option("-n", "--num-samples", type=int, default=3, show_default=True)
@_handle_errors
def sample(config, example, seed, out, threads, num_samples):
    """Draw prior samples of (m, beta) and write them as JSON."""
    bundle = _bundle(config, example, seed, threads)
    samples = bundle.prior_z.sample_array(stream_seed(seed, "est", 0), num_samples)
    path = write_json(os.path.join(out, "prior_samples.json"), {
        "space": bundle.prior_z.space_id,
        "n_m": bundle.n_m,
        "seed": seed,
        "samples": samples.tolist(),
    })
    click.echo(f"{num_samples} samples -> {path}")


@main.command()
@_common
@click.option("--estimator", type=click.Choice(
    ["mc", "cv-lin", "cv-quad", "sample-free-lin", "sample-free-quad"]),
    default="mc", show_default=True)
@click.option("-n", "--num-samples", type=int, default=100, show_default=True)
@_handle_errors
def estimate(config, example, seed, out, threads, estimator, num_samples):
    """Estimate approximation-error statistics with one estimator."""
    bundle = _bundle(config, example, seed, threads)
    stats = bundle.stats_for(estimator, num_samples, stream_seed(seed, "est", 0))
    path = write_json(os.path.join(out, f"stats_{estimator}.json"), stats.as_dict())
    click.echo(f"{estimator} stats (N={stats.N}) -> {path}")


@main.command()
@_common
@click.option("--estimator", default="mc", show_default=True)
@click.option("-n", "--num-samples", type=int, default=100, show_default=True)
@_handle_errors
def spectrum(config, example, seed, out, threads, estimator, num_samples):
    """Generalized spectrum of the estimated error covariance."""
    bundle = _bundle(config, example, seed, threads)
    stats = bundle.stats_for(estimator, num_samples, stream_seed(seed, "est", 0))
    noise = bundle.noise()
    lam, _ = generalized_eig(stats.cov, noise.cov())
    rows = [[estimator, stats.N, stats.seed, i, float(v * noise.delta**2),
             noise.delta**2] for i, v in enumerate(lam)]
    path = write_csv(os.path.join(out, "spectrum.csv"),
                     ["estimator", "N", "seed", "index", "eigenvalue", "noise_var"],
                     rows)
    click.echo(f"spectrum ({len(lam)} eigenvalues) -> {path}")


@main.command()
@_common
@click.option("--estimator", default="mc", show_default=True,
              help="Error-statistics estimator, or 'zero' to ignore errors.")
@click.option("-n", "--num-samples", type=int, default=100, show_default=True)
@click.option("--data-index", type=int, default=0, show_default=True)
@_handle_errors
def invert(config, example, seed, out, threads, estimator, num_samples, data_index):
    """Solve the corrected inverse problem for one data realization."""
    bundle = _bundle(config, example, seed, threads)
    noise = bundle.noise()
    data = bundle.data_realization(data_index)
    if estimator == "zero":
        stats = zero_stats(bundle.p)
    else:
        stats = bundle.stats_for(estimator, num_samples, stream_seed(seed, "est", 0))
    post = solve_bae(bundle.F, data.d, stats, noise, bundle.prior_m)
    obj = {
        "posterior": post.as_dict(),
        "data": {"d": data.d.tolist(), "seed": data.seed, "delta": data.delta},
        "truth_m": data.truth[: bundle.n_m].tolist(),
        "marginal": bundle.marginal_export(post, truth=data.truth, sample_seed=seed),
        "field": {"values": post.m_map.tolist()},
    }
    path = write_json(os.path.join(out, f"posterior_{estimator}.json"), obj)
    click.echo(f"MAP + Laplace covariance ({estimator}, N={stats.N}) -> {path}")


@main.command("study-convergence")
@_common
@_handle_errors
def study_convergence(config, example, seed, out, threads):
    """Convergence study of the error statistics (CSV outputs)."""
    bundle = _bundle(config, example, seed, threads)
    result = convergence_study(bundle, out)
    click.echo(f"convergence study: {len(result['rows'])} records -> "
               f"{result['paths']['convergence']}")


@main.command("study-posterior")
@_common
@_handle_errors
def study_posterior(config, example, seed, out, threads):
    """Double-loop posterior accuracy study (CSV outputs)."""
    bundle = _bundle(config, example, seed, threads)
    result = posterior_study(bundle, out)
    click.echo(f"posterior study: {len(result['rows'])} records, "
               f"{result['failures']} failures -> {result['paths']['posterior']}")


@main.command()
@_common
@click.option("-n", "--num-samples", type=int, default=5, show_default=True)
@_handle_errors
def cost(config, example, seed, out, threads, num_samples):
    """Measured per-sample linearized-solve counts (cost ledger)."""
    bundle = _bundle(config, example, seed, threads)
    result = cost_study(bundle, out, n_samples=num_samples, seed=stream_seed(seed, "est", 0))
    click.echo(f"cost ledger ({json.dumps(result['checks'])}) -> {result['path']}")


if __name__ == "__main__":
    main()

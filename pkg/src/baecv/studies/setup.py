"""Wiring a validated config into meshes, priors, maps, and noise.

The bundle is the single construction point for everything the estimators
and studies consume; it caches expensive derived objects (linearizations at
the prior mean, Taylor surrogates and moments, reference statistics) so that
different study entry points share them.

Seed discipline: every random stream derives from the master seed through a
fixed role offset, so the whole experiment is replayable from one integer.
"""

import numpy as np

from ..errors import ConfigError
from ..estimators import cv_stats, generate_error_samples, mc_stats, sample_free_stats
from ..fem import assemble_mass, build_rect_mesh, observation_matrix
from ..models import (
    NoiseModel,
    PinnedAuxiliary,
    RobinProblem,
    SemilinearProblem,
    auto_noise_level,
    make_data,
)
from ..priors import build_prior, product_prior
from ..taylor import TaylorSurrogate, linear_moments, quadratic_moments

_ROLE_OFFSETS = {"est": 10_000, "ref": 20_000, "data": 30_000}


def stream_seed(master, role, k=0):
    """Collision-free seed for a named stream (k < 10000)."""
    if k >= 10_000:
        raise ConfigError("stream index too large for the seed layout")
    return master * 100_000 + _ROLE_OFFSETS[role] + k


def _grid_points(spec, lx, ly):
    nx, ny = spec["nx"], spec["ny"]
    xs = np.linspace(lx / (nx + 1), nx * lx / (nx + 1), nx)
    ys = np.linspace(ly / (ny + 1), ny * ly / (ny + 1), ny)
    xv, yv = np.meshgrid(xs, ys)
    return np.column_stack([xv.ravel(), yv.ravel()])


class ExperimentBundle:
    """Everything one experiment needs, built once from a config."""

    def __init__(self, cfg, master_seed=0, threads=1):
        self.cfg = cfg
        self.master_seed = int(master_seed)
        self.threads = max(1, int(threads))
        mesh_cfg = cfg["mesh"]
        self.mesh = build_rect_mesh(
            mesh_cfg["nx"], mesh_cfg["ny"], mesh_cfg["lx"], mesh_cfg["ly"],
            labels=cfg["labels"],
        )
        obs = cfg["observations"]
        if "points" in obs:
            points = np.asarray(obs["points"], dtype=np.float64)
        elif "grid" in obs:
            points = _grid_points(obs["grid"], mesh_cfg["lx"], mesh_cfg["ly"])
        else:
            raise ConfigError("observations need 'points' or 'grid'")
        self.obs_points = points
        self.B = observation_matrix(self.mesh, points)

        pm = cfg["priors"]["m"]
        pb = cfg["priors"]["beta"]
        self.prior_m = build_prior(
            self.mesh, pm["space"], pm["mean"], pm["gamma"], pm["kappa"], pm["theta"],
            constraint=pm.get("constraint"),
        )
        self.prior_beta = build_prior(
            self.mesh, pb["space"], pb["mean"], pb["gamma"], pb["kappa"], pb["theta"],
            constraint=pb.get("constraint"),
        )
        self.prior_z = product_prior(self.prior_m, self.prior_beta)
        self.n_m = self.prior_m.dim

        if cfg["problem"] == "robin":
            self.problem = RobinProblem(
                self.mesh, obs_matrix=self.B, flux=cfg["model"].get("flux", 1.0),
            )
            self.G = self.problem.accurate()
            beta_star = cfg["surrogate"].get("beta_star", "prior-mean")
            if beta_star == "prior-mean":
                beta_star = self.prior_beta.mean
            else:
                beta_star = np.full(self.prior_beta.dim, float(beta_star))
            self.F = self.problem.surrogate(beta_star)
        else:
            mc = cfg["model"]
            self.problem = SemilinearProblem(
                self.mesh, obs_matrix=self.B,
                dirichlet_value=mc.get("dirichlet", 1.0),
                newton_rel_tol=mc.get("newton_rel_tol", 1e-10),
                max_newton=mc.get("max_newton", 25),
            )
            self.G = self.problem.accurate()
            self.F = self.problem.surrogate()

        self.mass_m = assemble_mass(self.mesh, pm["space"]).matrix
        self.p = self.B.shape[0]
        study = cfg["study"]
        self.study_orders = self.needed_orders(
            list(study.get("estimators", [])) + list(study.get("posterior_estimators", []))
        )
        self._lp_G = None
        self._lp_F = None
        self._surrogates = {}
        self._moments = {}
        self._factor = None
        self._noise = None
        self._stats_cache = {}
        self._stream_cache = {}

    # -- Taylor machinery ------------------------------------------------

    @property
    def lp_G(self):
        if self._lp_G is None:
            self._lp_G = self.G.linearize(self.prior_z.mean)
        return self._lp_G

    @property
    def lp_F(self):
        if self._lp_F is None:
            self._lp_F = self.F.linearize(self.prior_m.mean)
        return self._lp_F

    def taylor(self, order, mode="error"):
        key = (order, mode)
        if key not in self._surrogates:
            self._surrogates[key] = TaylorSurrogate(
                self.lp_G, self.lp_F, order=order, n_m=self.n_m, mode=mode
            )
        return self._surrogates[key]

    def factor(self):
        if self._factor is None:
            fac_cfg = self.cfg["factor"]
            self._factor = self.prior_z.factor(
                rank=fac_cfg.get("max_rank"), trace_tol=fac_cfg.get("trace_tol")
            )
            if fac_cfg.get("trace_tol") is not None and fac_cfg.get("max_rank"):
                by_tol = self.prior_z.factor(trace_tol=fac_cfg["trace_tol"])
                if by_tol.rank < self._factor.rank:
                    self._factor = by_tol
        return self._factor

    def moments(self, order, mode="error"):
        key = (order, mode)
        if key not in self._moments:
            surr = self.taylor(order, mode)
            if order == 1:
                self._moments[key] = linear_moments(surr, self.prior_z)
            else:
                self._moments[key] = quadratic_moments(surr, self.prior_z, self.factor())
        return self._moments[key]

    # -- Noise and data ---------------------------------------------------

    def noise(self):
        """Noise model with delta resolved once from the canonical truth."""
        if self._noise is None:
            ncfg = self.cfg["noise"]
            if "delta" in ncfg:
                delta = float(ncfg["delta"])
            else:
                truth = self.prior_z.sample_one(
                    stream_seed(self.master_seed, "data", ncfg.get("truth_seed", 0)), 0
                )
                y = self.G.evaluate(truth)
                delta = auto_noise_level(y, ncfg.get("relative_range", 0.01))
            self._noise = NoiseModel(delta, self.p)
        return self._noise

    def data_realization(self, index):
        """Truth draw and noisy data for one outer-loop realization."""
        seed = stream_seed(self.master_seed, "data", index)
        truth = self.prior_z.sample_one(seed, 0)
        return make_data(self.G, truth, self.noise(), seed)

    def true_aux_surrogate(self, truth):
        """No-approximation-error reference map: beta pinned at the truth."""
        beta_true = np.asarray(truth)[self.n_m:]
        if self.cfg["problem"] == "robin":
            return self.problem.surrogate(beta_true)
        return PinnedAuxiliary(self.G, beta_true, self.n_m)

    def marginal_export(self, post, truth=None, n_line=100, sample_seed=0):
        """One-dimensional marginal of a posterior for plotting.

        For a boundary-space parameter the marginal runs along the chain;
        for a domain parameter along the anti-diagonal line from (0, ly) to
        (lx, 0), interpolated with the P1 observation machinery.  Two
        posterior draws are included for band plots.
        """
        cov = np.asarray(post.cov)
        if self.cfg["priors"]["m"]["space"].startswith("boundary:"):
            label = self.cfg["priors"]["m"]["space"].split(":", 1)[1]
            nodes = self.mesh.boundary_nodes(label)
            x = self.mesh.vertices[nodes][:, 0]
            L = np.eye(self.prior_m.dim)
        else:
            lx = self.cfg["mesh"]["lx"]
            ly = self.cfg["mesh"]["ly"]
            t = np.linspace(0.0, 1.0, n_line)
            pts = np.column_stack([t * lx, (1.0 - t) * ly])
            L = observation_matrix(self.mesh, pts).toarray()
            x = t
        mean = L @ post.m_map
        sigma = np.sqrt(np.clip(np.diag(L @ cov @ L.T), 0.0, None))
        lam, vec = np.linalg.eigh(0.5 * (cov + cov.T))
        root = vec * np.sqrt(np.clip(lam, 0.0, None))
        rng = np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(entropy=int(sample_seed), spawn_key=(424242,))))
        samples = [
            (L @ (post.m_map + root @ rng.standard_normal(cov.shape[0]))).tolist()
            for _ in range(2)
        ]
        out = {
            "x": x.tolist(),
            "mean": mean.tolist(),
            "sigma": sigma.tolist(),
            "samples": samples,
        }
        if truth is not None:
            out["truth"] = (L @ np.asarray(truth)[: self.n_m]).tolist()
        return out

    # -- Estimator streams and stats --------------------------------------

    def needed_orders(self, estimators):
        orders = []
        if any(e in ("cv-lin",) for e in estimators):
            orders.append(1)
        if any(e in ("cv-quad",) for e in estimators):
            orders.append(2)
        return tuple(orders)

    def stream(self, seed, n, orders=None):
        """Cached error-sample stream (prefix-reusable per seed)."""
        orders = self.study_orders if orders is None else tuple(orders)
        key = (seed, orders)
        cached = self._stream_cache.get(key)
        if cached is not None and len(cached) >= n:
            return cached[: int(n)]
        taylor = self.taylor(max(orders)) if orders else None
        samples, _, _ = generate_error_samples(
            self.G, self.F, self.prior_z, n, seed, self.n_m,
            taylor=taylor, orders=orders or None,
        )
        self._stream_cache[key] = samples
        return samples

    def stats_for(self, estimator, N, seed, samples=None):
        """ErrorStats for one estimator tag, memoized; sampling estimators
        draw from the bundle's shared per-seed stream."""
        key = (estimator, int(N), int(seed))
        if key in self._stats_cache:
            return self._stats_cache[key]
        if estimator in ("mc", "cv-lin", "cv-quad") and samples is None:
            orders = None if estimator != "mc" else self._mc_stream_orders(seed)
            samples = self.stream(seed, N, orders=orders)
        if estimator == "mc":
            out = mc_stats(self.G, self.F, self.prior_z, N, seed, self.n_m,
                           samples=samples)
        elif estimator == "cv-lin":
            out = cv_stats(self.G, self.F, self.prior_z, self.taylor(1),
                           self.moments(1), N, seed, self.n_m, samples=samples)
        elif estimator == "cv-quad":
            out = cv_stats(self.G, self.F, self.prior_z, self.taylor(2),
                           self.moments(2), N, seed, self.n_m, samples=samples)
        elif estimator == "sample-free-lin":
            out = sample_free_stats(self.moments(1), seed=seed)
        elif estimator == "sample-free-quad":
            out = sample_free_stats(self.moments(2), seed=seed)
        else:
            raise ConfigError(f"unknown estimator {estimator!r}")
        self._stats_cache[key] = out
        return out

    def _mc_stream_orders(self, seed):
        # Reuse an existing CV stream for this seed when one is cached; a
        # pure-mc stream otherwise (no surrogate evaluations wasted).
        for key in self._stream_cache:
            if key[0] == seed:
                return key[1]
        return ()

    def reference_stats(self, N=None):
        N = self.cfg["study"]["reference_n"] if N is None else N
        seed = stream_seed(self.master_seed, "ref")
        samples = self.stream(seed, N, orders=())
        return self.stats_for("mc", N, seed, samples=samples)


def bundle_from_config(cfg, master_seed=0, threads=1):
    return ExperimentBundle(cfg, master_seed=master_seed, threads=threads)

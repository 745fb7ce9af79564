from .config import canonical_config, load_config, validate_config
from .convergence import convergence_rows, convergence_study, loglog_slope, summarize
from .cost import cost_ledger, cost_study
from .posterior import median_metric, posterior_rows, posterior_study
from .setup import ExperimentBundle, bundle_from_config, stream_seed
from .wasserstein import psd_sqrt, wasserstein2_sq

__all__ = [
    "ExperimentBundle",
    "bundle_from_config",
    "canonical_config",
    "convergence_rows",
    "convergence_study",
    "cost_ledger",
    "cost_study",
    "load_config",
    "loglog_slope",
    "median_metric",
    "posterior_rows",
    "posterior_study",
    "psd_sqrt",
    "stream_seed",
    "summarize",
    "validate_config",
    "wasserstein2_sq",
]

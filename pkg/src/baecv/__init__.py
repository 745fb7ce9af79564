"""Approximation-error statistics for surrogate-based Bayesian inversion.

The package estimates the mean and covariance of the discrepancy between an
accurate parameter-to-observable map and a cheaper surrogate (plain Monte
Carlo, Taylor control variates, or a fully sample-free Taylor model), folds
those statistics into the noise model, and solves the corrected inverse
problem with a Laplace posterior.
"""

__version__ = "0.1.0"

"""Exception hierarchy shared across the package.

``ArgumentError`` and ``ConfigError`` signal bad user input (CLI exit code 2),
the numerical errors signal a failed computation (CLI exit code 3).
"""


class ArgumentError(ValueError):
    """Invalid argument to a library operation."""


class ConfigError(ArgumentError):
    """Invalid or inconsistent experiment configuration."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class SolverError(NumericalError):
    """A PDE solve failed (singular system or non-convergent iteration)."""

    def __init__(self, message, residual_norm=None):
        super().__init__(message)
        self.residual_norm = residual_norm


class OptimizationError(NumericalError):
    """MAP optimization failed; carries the iteration trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class SamplingStallError(NumericalError):
    """Constraint rejection rate made prior sampling stall."""

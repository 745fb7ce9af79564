from .base import (
    DataRealization,
    NoiseModel,
    PinnedAuxiliary,
    SolveCounters,
    auto_noise_level,
    evaluate,
    make_data,
)
from .robin import RobinAccurate, RobinProblem, RobinSurrogate
from .semilinear import SemilinearAccurate, SemilinearProblem, SemilinearSurrogate
from .synthetic import AffineMap, QuadraticMap

__all__ = [
    "AffineMap",
    "PinnedAuxiliary",
    "DataRealization",
    "NoiseModel",
    "QuadraticMap",
    "RobinAccurate",
    "RobinProblem",
    "RobinSurrogate",
    "SemilinearAccurate",
    "SemilinearProblem",
    "SemilinearSurrogate",
    "SolveCounters",
    "auto_noise_level",
    "evaluate",
    "make_data",
]

"""Maximal quantum coherence of qudit states over reference bases."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CoherenceLabError,
    ConvergenceFailure,
    SolverFailure,
    ValidationError,
)
from .hermlin import DensityMatrix, density_from_spectrum, validate_density  # noqa: E402

__all__ = [
    "CoherenceLabError",
    "ConvergenceFailure",
    "DensityMatrix",
    "SolverFailure",
    "ValidationError",
    "density_from_spectrum",
    "validate_density",
]

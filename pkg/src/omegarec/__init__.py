"""Exact and certified computations for recurrence of Z-valued cocycles
over irrational rotations and periodic-type interval exchanges."""

__version__ = "0.1.0"

from .errors import DepthExhausted, OmegaRecError, PrecisionError, ValidationError

__all__ = [
    "DepthExhausted",
    "OmegaRecError",
    "PrecisionError",
    "ValidationError",
    "__version__",
]

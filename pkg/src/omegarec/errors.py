"""Exception types shared across the package."""


class OmegaRecError(Exception):
    """Base class for all package errors."""


class DepthExhausted(OmegaRecError):
    """An explicit digit list is too short for the requested operation."""


class PrecisionError(OmegaRecError):
    """Certified arithmetic could not resolve a comparison within its cap."""


class ValidationError(OmegaRecError, ValueError):
    """Invalid parameters, configuration or cocycle description."""

"""Exception hierarchy shared across the package."""


class GltError(Exception):
    """Base class for every error raised by :mod:`uglt`."""


class ConfigError(GltError):
    """Invalid configuration, unknown registry name, or malformed input."""


class SizeLimitError(GltError):
    """A matrix or grid would exceed a configured size cap."""


class DimensionError(GltError):
    """Matrix shape does not match the grid it is supposed to live on."""


class ContainmentError(GltError):
    """A grid (or domain) is not contained in the one it is mapped into."""


class DomainError(GltError):
    """Domain precondition violated (e.g. domain not inside a hypercube)."""


class EvaluationError(GltError):
    """A sampled function returned a non-finite value."""


class AsymmetryError(GltError):
    """A matrix expected to be symmetric/Hermitian is not."""

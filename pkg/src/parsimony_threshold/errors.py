"""Exception hierarchy shared across the package.

Validation failures map to CLI exit code 1 (HTTP 422); resource limits
map to exit code 2 (HTTP 413).
"""


class HarnessError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HarnessError, ValueError):
    """Invalid argument or malformed input."""


class RangeError(ValidationError):
    """Argument outside its documented range."""


class CoverError(ValidationError):
    """Vertex set misses at least one root-to-boundary path."""

    def __init__(self, message: str, escaping_vertex: int | None = None):
        super().__init__(message)
        self.escaping_vertex = escaping_vertex


class MinimalityError(ValidationError):
    """Vertex set covers every path but some vertex is removable."""

    def __init__(self, message: str, removable_vertex: int | None = None):
        super().__init__(message)
        self.removable_vertex = removable_vertex


class ResourceLimitError(HarnessError):
    """Request exceeds a configured size or memory cap."""


class NumericsError(HarnessError):
    """A computed value left its mathematically guaranteed range by more
    than the clamping tolerance."""

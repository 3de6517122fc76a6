"""Shared exception types."""


class CapacityError(RuntimeError):
    """Raised when an exact computation would exceed its resource guard."""


class MultipleTransverseStringsError(RuntimeError):
    """Raised when a unique transverse string was requested but several exist."""

class IsodiaError(Exception):
    """Base class for all errors raised by this package."""


class LatticeError(IsodiaError, ValueError):
    """Invalid lattice input: singular basis, non-SPD Gram, unknown family."""


class ResourceLimitError(IsodiaError):
    """An enumeration or construction exceeded its configured resource cap."""


class MinkowskiBoundError(IsodiaError, ValueError):
    """Requested volume lies outside (0, 2^d det L]."""


class PrecisionError(IsodiaError):
    """A stochastic estimate could not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class GeometryError(IsodiaError):
    """Computed combinatorics are inconsistent (usually a tolerance failure)."""

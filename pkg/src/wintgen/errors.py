"""Exception types raised across the package."""


class WintgenError(Exception):
    """Base class for all errors raised by :mod:`wintgen`."""


class DimensionError(WintgenError, ValueError):
    """Tangent/ambient dimensions outside the range an operation supports."""


class InvariantError(WintgenError, ValueError):
    """Input data violates a structural invariant (symmetry, unit length, ...)."""


class DegenerateWarpingError(WintgenError, ZeroDivisionError):
    """Warping function of a GRW model vanishes at the evaluation point."""


class IncompatibleModelError(WintgenError, ValueError):
    """An inequality was requested for an ambient model it does not apply to."""


class NotMinimalError(WintgenError, ValueError):
    """A minimal-submanifold inequality was requested for non-minimal data."""


class ConsistencyError(WintgenError, RuntimeError):
    """Two independent computations of the same quantity disagree."""

"""Exception and warning types shared across the package."""


class SkelclustError(Exception):
    """Base class for all errors raised by this package."""


class UsageError(SkelclustError, ValueError):
    """Caller passed arguments that violate an operation's contract."""


class DataError(SkelclustError, ValueError):
    """Input data could not be ingested (bad CSV cell, shape mismatch, ...)."""


class DegenerateGeometryError(SkelclustError):
    """Geometry too degenerate to proceed (coincident knots, zero-variance data)."""


class DegenerateSampleError(DegenerateGeometryError):
    """Too few or zero-spread points for a kernel bandwidth to exist."""


class DegenerateEdgeWarning(UserWarning):
    """An edge weight was forced to 0 because its local sample was unusable."""

"""Exception hierarchy."""


class WlaxError(Exception):
    """Base class for all package errors."""


class UnsupportedAlgebraError(WlaxError):
    """Unknown algebra kind or invalid dimension (e.g. sp with odd N)."""


class GradingError(WlaxError):
    """Triple/grading data is invalid or incompatible with the basis."""


class DegreeCapError(WlaxError):
    """A rewriting result would exceed the configured monomial-degree bound."""


class InversionError(WlaxError):
    """A series or matrix inversion precondition failed."""


class TruncationError(WlaxError):
    """Requested data lies below the truncation order of the input."""


class ExactDivisionError(WlaxError):
    """An exact polynomial division had a nonzero remainder."""


class ConsistencyError(WlaxError):
    """A theorem-backed runtime check failed; signals an implementation bug."""

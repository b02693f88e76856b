"""Exception types shared across the package."""


class PathCvxError(Exception):
    """Base class for all package errors."""


class DomainError(PathCvxError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class DimensionMismatch(PathCvxError, ValueError):
    """Array shapes are inconsistent with each other."""


class BudgetExceeded(PathCvxError):
    """Exact enumeration would produce more patterns than the budget allows."""


class DegenerateRow(PathCvxError):
    """A data row is identically zero, so no strict activation margin exists."""


class EmptyPatternSet(PathCvxError):
    """A convex program cannot be assembled from zero patterns."""


class NumericalFailure(PathCvxError):
    """The solver produced non-finite iterates."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class SingularSystem(PathCvxError):
    """A kernel system stayed singular after jitter escalation."""


class ParseError(PathCvxError):
    """A CSV cell could not be parsed; the message names row and column."""


class MissingLabel(PathCvxError):
    """The requested label column is absent from a CSV header."""


class GridError(PathCvxError):
    """An epsilon grid is not strictly decreasing or leaves (0, 1]."""

"""Exception hierarchy shared by every masslab module."""


class MasslabError(Exception):
    """Base class for all masslab failures."""


class ConfigurationError(MasslabError, ValueError):
    """Invalid grid, solver or run configuration."""


class ShapeError(MasslabError, ValueError):
    """Sample arrays that do not match their grid."""


class DomainError(MasslabError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ModelError(MasslabError, ValueError):
    """Field/model mismatch (wrong dimension, missing potential, ...)."""


class SolverError(MasslabError, RuntimeError):
    """An iterative solver could not produce a result."""


class AccuracyError(SolverError):
    """A solver finished but its certified residuals are too large."""


class NumericalError(SolverError):
    """Non-finite values appeared during an iteration."""


class InapplicableError(MasslabError, ValueError):
    """A probe was requested outside the regime where it is meaningful."""


class DiagnosticError(MasslabError, RuntimeError):
    """Contradictory numerical evidence; carries both witnesses."""

    def __init__(self, message, **witnesses):
        super().__init__(message)
        self.witnesses = witnesses


class TruncationError(MasslabError, ValueError):
    """A rescaled field lost mass beyond the tolerance at the grid boundary."""

"""Exception hierarchy shared by the library and the command line."""


class CochordError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class SchemaError(CochordError, ValueError):
    """Malformed input document or argument shape."""

    exit_code = 2


class DomainError(CochordError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 3


class ConvergenceError(CochordError, RuntimeError):
    """The solver stopped before meeting its tolerance.

    Parameters
    ----------
    message : str
        Human readable reason.
    best : float, optional
        Best objective value reached, a valid upper bound for the capacity.
    result : object, optional
        Partial result carrying diagnostics.
    """

    exit_code = 4

    def __init__(self, message, best=None, result=None):
        super().__init__(message)
        self.best = best
        self.result = result

"""Exceptions raised by Pompeiu Lab."""


class PompeiuLabError(Exception):
    """Base class for all lab errors."""


class PreconditionError(PompeiuLabError, ValueError):
    """An input violates an operation's precondition."""


class ConvergenceError(PompeiuLabError, ArithmeticError):
    """A numerical procedure did not reach its tolerance."""

    def __init__(self, message: str, estimate: float | None = None):
        super().__init__(message)
        self.estimate = estimate


class ConsistencyError(ConvergenceError):
    """Two independent evaluations of the same quantity disagree."""

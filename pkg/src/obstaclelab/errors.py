"""Exception types shared across the package."""


class ObstacleLabError(Exception):
    """Base class for all package errors."""


class DomainError(ObstacleLabError, ValueError):
    """A point or argument lies outside the domain of an operation."""


class PreconditionError(ObstacleLabError, ValueError):
    """An operation was called with inputs violating its contract."""


class DegenerateError(ObstacleLabError, ArithmeticError):
    """A functional has a vanishing denominator or a degenerate sample."""


class NonConvergenceError(ObstacleLabError, RuntimeError):
    """An iterative method stopped before reaching its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations

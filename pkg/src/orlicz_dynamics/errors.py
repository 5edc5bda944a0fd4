"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the domain of an operation (non-finite value, zero weight, ...)."""


class DivergenceError(ArithmeticError):
    """A supremum that does not exist: the objective kept increasing."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class PreconditionError(ValueError):
    """A documented precondition of an operation does not hold."""


class CapacityError(RuntimeError):
    """The brute-force oracle was asked for a problem larger than it supports."""

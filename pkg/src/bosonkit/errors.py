"""Exception types raised by bosonkit."""


class BosonKitError(Exception):
    """Base class for all library errors."""


class ShapeError(BosonKitError, ValueError):
    """Mismatched or non-square dimensions, pattern lengths, or totals."""


class SizeError(BosonKitError, ValueError):
    """Problem size exceeds a configured cap."""


class ParameterError(BosonKitError, ValueError):
    """A model or constructor parameter is outside its allowed range."""


class UnitarityError(BosonKitError, ValueError):
    """Matrix fails the unitarity check."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class DomainError(BosonKitError, ValueError):
    """Argument outside the domain where an operation is defined."""


class AccuracyError(BosonKitError, ArithmeticError):
    """Numerical quadrature did not reach the requested accuracy."""

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound

"""Exception types raised across the package."""


class HexSepError(Exception):
    """Base class for all package errors."""


class ValidationError(HexSepError, ValueError):
    """An argument falls outside the domain an operation accepts."""


class UnsupportedOrder(ValidationError):
    pass


class ShapeUnavailable(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class NumericalBudgetError(HexSepError, ArithmeticError):
    """A numerical routine could not reach its error target."""


class QuadratureNotConverged(NumericalBudgetError):
    pass


class IntegrationBudgetExceeded(NumericalBudgetError):
    pass

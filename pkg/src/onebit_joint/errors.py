"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Array shapes are inconsistent or sizes are out of range."""


class ParameterError(ValueError):
    """A scalar or configuration parameter is outside its valid range."""


class DataError(ValueError):
    """Input data contains values the operation cannot accept (e.g. NaN)."""


class NumericalError(ArithmeticError):
    """An iterate became non-finite during optimization."""

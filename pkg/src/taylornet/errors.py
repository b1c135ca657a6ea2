"""Exception types raised across the package."""


class TaylorNetError(Exception):
    """Base class for all package errors."""


class ShapeError(TaylorNetError, ValueError):
    """Array or head dimensions do not line up."""


class InputError(TaylorNetError, ValueError):
    """Input values are unusable (non-finite, wrong type)."""


class ConfigurationError(TaylorNetError, ValueError):
    """Invalid hyperparameters, split fractions or manifest contents."""


class InsufficientDataError(TaylorNetError, ValueError):
    """A series is too short for the requested windowing."""


class DataParseError(TaylorNetError, ValueError):
    """A delimited file could not be parsed into a numeric column."""


class DivergenceError(TaylorNetError, ArithmeticError):
    """A rollout or training run produced non-finite values."""

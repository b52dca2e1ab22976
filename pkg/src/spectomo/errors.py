class SpectomoError(Exception):
    """Base class for errors raised by spectomo."""


class GenerationError(SpectomoError, RuntimeError):
    """Random state generation exhausted its retry budget."""


class NumericalFailure(SpectomoError, ArithmeticError):
    """An eigensolver or other numerical routine did not converge."""


class UnsupportedParameterError(SpectomoError, ValueError):
    """A parameter is valid in general but not supported by a closed form."""

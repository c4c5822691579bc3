"""Exception types raised by lenscs."""


class LensCSError(Exception):
    """Base class for all lenscs errors."""


class InvalidArgumentError(LensCSError, ValueError):
    pass


class UnsupportedModeError(LensCSError, ValueError):
    """Operation called on a sensing spec of the wrong mode."""


class ResourceLimitError(LensCSError, MemoryError):
    pass


class ValidationError(LensCSError, ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class NumericalError(LensCSError, ArithmeticError):
    pass


class FormatError(LensCSError, OSError):
    """A file exists but is not in the expected format."""

"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, training divergence exits 3.
"""


class PlaylmpError(Exception):
    """Base class for all package errors."""


class ShapeError(PlaylmpError, ValueError):
    """Operands have incompatible shapes for the requested operation."""


class NonFiniteError(PlaylmpError, FloatingPointError):
    """A forward value, gradient, or loss stopped being finite."""


class TapeError(PlaylmpError, RuntimeError):
    """Misuse of the gradient tape (double backward, non-scalar loss, ...)."""


class DataFormatError(PlaylmpError, ValueError):
    """A dataset, config, or checkpoint file is malformed or inconsistent."""


class CorruptRecordError(DataFormatError):
    """A record failed its integrity check on load."""


class ConfigMismatchError(DataFormatError):
    """An artifact was produced under a different environment config."""


class DivergenceError(PlaylmpError, RuntimeError):
    """Training produced a non-finite loss or gradient."""

"""Exception hierarchy shared by every module."""


class FusionError(Exception):
    """Base class for all errors raised by bwfusion."""


class ShapeError(FusionError, ValueError):
    """Raster dimensions, band counts or decomposition levels disagree."""


class ParameterError(FusionError, ValueError):
    """An argument is outside its allowed domain."""


class NumericError(FusionError, ArithmeticError):
    """A computation produced a non-finite or ill-conditioned result."""


class FormatError(FusionError, ValueError):
    """A raster file is malformed.

    ``offset`` is the byte position where the problem was detected.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)

class CmfsError(Exception):
    """Base class for toolkit errors."""


class DataError(CmfsError, ValueError):
    """Malformed or unusable input data."""


class NumericError(CmfsError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class ConvergenceError(NumericError):
    def __init__(self, message: str, off_norm: float):
        super().__init__(message)
        self.off_norm = off_norm

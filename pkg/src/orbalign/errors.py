"""Exception hierarchy shared by the loaders, the numeric kernels and the CLI."""

from __future__ import annotations


class DataError(ValueError):
    """Input data is malformed or inconsistent."""


class ParseError(DataError):
    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{self.path}:{line_no}: {message}")


class DimensionError(DataError):
    pass


class ValidationError(DataError):
    pass


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""


class TrainingError(NumericError):
    def __init__(self, epoch: int, message: str = "non-finite loss"):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}: {message}")

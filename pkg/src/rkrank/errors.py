"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class RankingError(Exception):
    """Base class for all errors raised by rkrank."""


class ParameterError(RankingError, ValueError):
    """An argument is outside its documented domain."""


class DegenerateEstimateError(RankingError, ValueError):
    """A preference estimate hit 0 or 1, so its logit is infinite."""

    def __init__(self, message: str, edge: tuple[int, int] | None = None) -> None:
        super().__init__(message)
        self.edge = edge


class ConfigurationError(RankingError, ValueError):
    """Incompatible options, e.g. an evaluation-only stopping rule without ground truth."""


class NumericError(RankingError, ArithmeticError):
    """An iterative routine failed to converge or produced non-finite values."""


class MatchFileError(ParameterError):
    """A match file could not be parsed."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

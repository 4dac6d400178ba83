"""
Exception hierarchy shared by the library and the command line.

Every error carries the process exit code the CLI reports for it.
"""

from typing import Any, Optional


class BorderfluxError(Exception):
    """Base exception for all borderflux errors."""

    exit_code = 1


class ValidationError(BorderfluxError):
    """Input violates a documented precondition."""

    exit_code = 2


class ParseError(BorderfluxError):
    """An input file could not be parsed."""

    exit_code = 3

    def __init__(self, message: str, line: Optional[int] = None, path: Any = None):
        self.line = line
        self.path = path
        if line is not None:
            message = f"line {line}: {message}"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message)


class NumericalError(BorderfluxError):
    """A numerical procedure could not produce a result."""

    exit_code = 4


class DegenerateInputError(NumericalError):
    """Input is structurally degenerate (zero weight, coincident points)."""

    pass


class FitFailureError(NumericalError):
    """Iterative fit did not converge."""

    def __init__(self, message: str, best: Any = None):
        self.best = best
        super().__init__(message)


class FitDegeneracyError(NumericalError):
    """Design matrix of a linear fit is rank deficient."""

    pass

"""Exception types shared across the package.

Everything derives from ``ImmunetError`` (itself a ``ValueError``) so callers
can catch validation problems with a single except clause. Size-cap errors are
kept distinct because they signal "instance too large for exact methods", not
bad input.
"""

from __future__ import annotations


class ImmunetError(ValueError):
    """Base class for validation and domain errors raised by this package."""


class GraphError(ImmunetError):
    """A graph violates a structural invariant (ids, self-loops, duplicates)."""


class InvalidProbabilityError(GraphError):
    """A probability fell outside [0, 1]."""


class GraphFormatError(GraphError):
    """A graph or groups file failed to parse; message carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(ImmunetError):
    """Invalid configuration (generator parameters, estimator settings, ...)."""


class DomainError(ImmunetError):
    """Argument outside the mathematical domain of a formula."""


class BudgetError(ImmunetError):
    """Selection budget incompatible with the candidate set."""


class ThresholdError(ImmunetError):
    """Effective-degree threshold leaves no room in the budget."""

    def __init__(self, message: str, n_s: int):
        super().__init__(message)
        self.n_s = n_s


class SizeCapError(ImmunetError):
    """Instance exceeds the configured cap for exact enumeration."""

    def __init__(self, message: str, size: int):
        super().__init__(message)
        self.size = size

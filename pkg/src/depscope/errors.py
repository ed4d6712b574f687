"""Exception taxonomy shared by every depscope module.

Each class carries the exit code the CLI maps it to:

    1  unexpected internal failure (base class)
    2  parse or validation failure in an input document
    3  network or cache failure while fetching the vulnerability database
    4  centrality iteration failed to converge
    5  filesystem problem or a required external tool is missing
"""

from __future__ import annotations


class DepscopeError(Exception):
    """Base class for all errors raised by depscope."""

    exit_code = 1


class ParseError(DepscopeError):
    """An input document could not be parsed at all."""

    exit_code = 2

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(DepscopeError):
    """A document parsed but violates a structural contract."""

    exit_code = 2


class NotFoundError(DepscopeError):
    """A referenced node or package id does not exist."""

    exit_code = 2


class DomainError(DepscopeError):
    """An operation was called outside its domain (empty input, bad parameter)."""

    exit_code = 2


class FetchError(DepscopeError):
    """The vulnerability database could not be obtained.

    ``stale_cache_available`` distinguishes "nothing cached at all" from
    "a cache exists but is older than the allowed age".
    """

    exit_code = 3

    def __init__(self, message: str, *, stale_cache_available: bool = False):
        super().__init__(message)
        self.stale_cache_available = stale_cache_available


class DivergenceError(DepscopeError):
    """Katz iteration did not converge within the iteration budget."""

    exit_code = 4

    def __init__(self, message: str, *, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class MissingToolError(DepscopeError):
    """A required external executable (git) is not on PATH."""

    exit_code = 5

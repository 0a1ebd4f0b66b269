"""Exception types shared across the package."""

from __future__ import annotations


class RamtelError(Exception):
    """Base class for errors raised by ramtel."""


class DomainError(RamtelError, ValueError):
    """An operation was applied outside its mathematical domain."""


class PoleError(DomainError):
    """A denominator factor vanished at the requested point."""


class DivergenceError(DomainError):
    """A series does not converge geometrically at the requested point."""


class NotHypergeometricError(DomainError):
    """A shift quotient is not a rational function."""


class TermSyntaxError(RamtelError, ValueError):
    """Malformed term DSL text.  Carries 1-based line and column."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line else ""
        super().__init__(message + where)


class UndeclaredVariableError(TermSyntaxError):
    pass


class ZeroBaseError(TermSyntaxError):
    pass

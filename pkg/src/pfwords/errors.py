"""Exception hierarchy shared by the library and the command line."""

from __future__ import annotations


class PfWordsError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ValidationError(PfWordsError, ValueError):
    """Bad input: malformed words, chains, or parameters."""

    exit_code = 2


class DimensionError(ValidationError):
    """Words of different lengths or over different alphabets were combined."""


class DomainError(ValidationError):
    """An argument lies outside the domain of the operation (e.g. ell > n)."""


class InfeasibleWordError(ValidationError):
    """A word uses a transition the Markov chain forbids."""

    def __init__(self, message: str, position: int, source: str, target: str):
        super().__init__(message)
        self.position = position
        self.source = source
        self.target = target


class EmptyClassError(PfWordsError):
    """No output word exists at the requested distance."""

    exit_code = 2


class CapacityError(PfWordsError):
    """An oracle was asked to enumerate more than it is allowed to."""

    exit_code = 3


class NumericError(PfWordsError, ArithmeticError):
    """Quadrature failed to reach its error target.

    ``estimate`` and ``error_bound`` carry what was achieved.
    """

    exit_code = 4

    def __init__(self, message: str, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound

"""Distance-class combinatorics with exact integer counts.

A candidate set of output words is summarised by how many words sit at each
Hamming distance from the sensitive word.  Everything downstream (the class
pmf, the automaton samplers) only needs these multiplicities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DomainError, ValidationError


def binomial(n: int, k: int) -> int:
    if n < 0 or k < 0:
        raise DomainError("binomial arguments must be non-negative")
    if k > n:
        return 0
    return math.comb(n, k)


def class_count(n: int, m: int, ell: int) -> int:
    """Number of words of length ``n`` over ``m`` symbols at distance ``ell``."""
    if m < 2:
        raise DomainError("alphabet size m must be >= 2")
    if not 0 <= ell <= n:
        raise DomainError(f"distance {ell} outside [0, {n}]")
    return math.comb(n, ell) * (m - 1) ** ell


def log_count(x: int) -> float:
    """Natural log of a (possibly huge) positive integer.

    ``math.log`` works on Python ints of any size without overflow.
    """
    if x < 1:
        raise DomainError("log_count needs x >= 1; empty classes must be skipped")
    return math.log(x)


@dataclass(frozen=True)
class DistanceSpectrum:
    """Counts of candidate words at each distance ``0..n``.

    ``m`` is set only for the unconstrained spectrum over an ``m``-letter
    alphabet; it enables closed forms elsewhere.
    """

    n: int
    counts: tuple[int, ...]
    m: Optional[int] = None

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if self.n < 1:
            raise ValidationError("spectrum needs n >= 1")
        if len(counts) != self.n + 1:
            raise ValidationError(f"expected {self.n + 1} class counts, got {len(counts)}")
        if any(c < 0 for c in counts):
            raise ValidationError("class counts must be non-negative")
        if counts[0] != 1:
            raise ValidationError("the sensitive word itself must be the only class-0 member")
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "DistanceSpectrum":
        return cls(len(counts) - 1, tuple(counts))

    @property
    def classes(self) -> list[tuple[int, int]]:
        return list(enumerate(self.counts))

    @property
    def support(self) -> list[int]:
        """Distances with at least one candidate word."""
        return [ell for ell, c in enumerate(self.counts) if c > 0]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def count(self, ell: int) -> int:
        if not 0 <= ell <= self.n:
            raise DomainError(f"distance {ell} outside [0, {self.n}]")
        return self.counts[ell]

    @property
    def is_full(self) -> bool:
        return self.m is not None


def full_spectrum(n: int, m: int) -> DistanceSpectrum:
    if n < 1:
        raise DomainError("word length n must be >= 1")
    return DistanceSpectrum(n, tuple(class_count(n, m, ell) for ell in range(n + 1)), m=m)

"""Alphabets, words, Hamming distance and the utility function."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DimensionError, DomainError, ValidationError


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct, non-empty symbol labels."""

    symbols: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if len(symbols) < 2:
            raise ValidationError("an alphabet needs at least two symbols")
        if any(not s for s in symbols):
            raise ValidationError("symbols must be non-empty strings")
        if len(set(symbols)) != len(symbols):
            raise ValidationError(f"duplicate symbols in alphabet {symbols!r}")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def parse(cls, text: str) -> "Alphabet":
        """Parse ``"a,b,c"``; an unseparated ``"abc"`` means single characters."""
        text = text.strip()
        if "," in text:
            return cls(tuple(s.strip() for s in text.split(",")))
        return cls(tuple(text))

    @property
    def m(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ValidationError(f"symbol {symbol!r} is not in the alphabet") from None

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols)


@dataclass(frozen=True)
class Word:
    """A fixed-length sequence of symbol indices over an alphabet."""

    alphabet: Alphabet
    symbols: tuple[int, ...]

    def __post_init__(self):
        symbols = tuple(int(s) for s in self.symbols)
        if not symbols:
            raise ValidationError("words must have length n >= 1")
        m = self.alphabet.m
        for s in symbols:
            if not 0 <= s < m:
                raise ValidationError(f"symbol index {s} out of range for m={m}")
        object.__setattr__(self, "symbols", symbols)

    @classmethod
    def from_labels(cls, alphabet: Alphabet, labels: Iterable[str]) -> "Word":
        return cls(alphabet, tuple(alphabet.index(s) for s in labels))

    @classmethod
    def parse(cls, alphabet: Alphabet, text: str) -> "Word":
        """Parse ``"a,b,c"``, or ``"abc"`` when every symbol is one character."""
        text = text.strip()
        if "," in text or not alphabet.single_char:
            labels = [s.strip() for s in text.split(",")]
        else:
            labels = list(text)
        return cls.from_labels(alphabet, labels)

    @property
    def n(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.alphabet.symbols[s] for s in self.symbols)

    def format(self) -> str:
        return ",".join(self.labels)

    def __str__(self) -> str:
        return self.format()


@dataclass(frozen=True)
class PrivacyParams:
    """Privacy level ``epsilon`` and adjacency radius ``b``.

    The sensitivity of the utility is at most ``b``, so both mechanisms use
    ``epsilon / (2 b)`` as the exponent scale.
    """

    epsilon: float
    b: int = 1

    def __post_init__(self):
        eps = float(self.epsilon)
        if not math.isfinite(eps) or eps < 0:
            raise DomainError(f"epsilon must be a finite non-negative real, got {self.epsilon!r}")
        if isinstance(self.b, bool) or int(self.b) != self.b or self.b < 1:
            raise DomainError(f"adjacency b must be a positive integer, got {self.b!r}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "b", int(self.b))

    @property
    def scale(self) -> float:
        """Exponent per unit of distance: epsilon / (2 b)."""
        return self.epsilon / (2 * self.b)


def _check_compatible(w: Word, v: Word) -> None:
    if w.alphabet != v.alphabet:
        raise DimensionError("words are over different alphabets")
    if w.n != v.n:
        raise DimensionError(f"word lengths differ ({w.n} vs {v.n})")


def hamming_distance(w: Word, v: Word) -> int:
    _check_compatible(w, v)
    return sum(a != b for a, b in zip(w.symbols, v.symbols))


def utility(w: Word, v: Word) -> int:
    return -hamming_distance(w, v)


def is_adjacent(w: Word, v: Word, b: int) -> bool:
    if b < 1:
        raise DomainError("adjacency b must be >= 1")
    return hamming_distance(w, v) <= b


def all_words(alphabet: Alphabet, n: int) -> list[Word]:
    """Every word of length ``n`` in lexicographic index order."""
    return [Word(alphabet, t) for t in itertools.product(range(alphabet.m), repeat=n)]


def substitute(w: Word, positions: Sequence[int], symbols: Sequence[int]) -> Word:
    out = list(w.symbols)
    for p, s in zip(positions, symbols):
        out[p] = s
    return Word(w.alphabet, tuple(out))

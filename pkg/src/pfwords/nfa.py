"""Hamming-distance automata and uniform sampling of their languages.

The automaton for a word ``w`` and distance ``ell`` has states ``(i, j)``:
``i`` symbols emitted, ``j`` of them different from ``w``.  Emitting
``w[i]`` keeps ``j``; any other symbol increments it.  Only states from which
exactly ``ell`` errors are still attainable are kept, so every path from the
start reaches the single accepting state ``(n, ell)``.

Counting accepting completions ``V`` backwards and branching with
probability ``V(next) / V(here)`` samples the language uniformly.  Branches
are drawn as an exact integer in ``[0, V(here))``.
"""

from __future__ import annotations

import bisect
import functools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Hashable, Iterator, Mapping, Optional

from .errors import DomainError, EmptyClassError, ValidationError
from .words import Alphabet, Word


@dataclass(frozen=True, eq=False)
class LayeredNfa:
    """A trimmed, layered automaton whose accepted words all have length ``n``.

    ``transitions`` maps each state to its ``(symbol, next_state)`` edges;
    ``counts`` (completion counts) is filled in by policy synthesis.
    """

    alphabet: Alphabet
    n: int
    start: Hashable
    accepting: frozenset
    transitions: Mapping[Hashable, tuple]
    counts: Optional[Mapping[Hashable, int]] = None

    @property
    def states(self) -> list:
        return list(self.transitions)

    @property
    def synthesized(self) -> bool:
        return self.counts is not None

    def _require_counts(self) -> Mapping[Hashable, int]:
        if self.counts is None:
            raise ValidationError("policy not synthesized yet")
        return self.counts

    @property
    def language_size(self) -> int:
        """Number of accepted words, ``V(start)``."""
        return self._require_counts().get(self.start, 0)

    def policy(self, state) -> dict[tuple, Fraction]:
        """Branch probabilities ``{(next_state, symbol): V(next) / V(state)}``."""
        counts = self._require_counts()
        total = counts[state]
        return {(nxt, sym): Fraction(counts[nxt], total) for sym, nxt in self.transitions[state]}

    @functools.cached_property
    def _branches(self) -> dict:
        counts = self._require_counts()
        table = {}
        for state, edges in self.transitions.items():
            cum, acc = [], 0
            for _, nxt in edges:
                acc += counts[nxt]
                cum.append(acc)
            table[state] = (cum, edges)
        return table

    def sample_symbols(self, rng) -> tuple[int, ...]:
        if self.language_size == 0:
            raise EmptyClassError("the automaton accepts no words")
        branches = self._branches
        state, out = self.start, []
        for _ in range(self.n):
            cum, edges = branches[state]
            k = bisect.bisect_right(cum, rng.randrange(cum[-1]))
            sym, state = edges[k]
            out.append(sym)
        return tuple(out)

    def accepts(self, symbols) -> bool:
        current = {self.start}
        for sym in symbols:
            current = {nxt for q in current for s, nxt in self.transitions.get(q, ()) if s == sym}
        return bool(current & self.accepting)

    def iter_language(self) -> Iterator[tuple[int, ...]]:
        """All accepted symbol sequences by depth-first path enumeration."""

        def walk(state, prefix):
            if len(prefix) == self.n:
                if state in self.accepting:
                    yield tuple(prefix)
                return
            for sym, nxt in self.transitions[state]:
                yield from walk(nxt, prefix + [sym])

        yield from walk(self.start, [])

    def _state_label(self, state) -> str:
        return str(state)

    def export(self) -> str:
        """Line-oriented dump of states, ``V`` values and branch ratios."""
        lab = self._state_label
        lines = [f"start {lab(self.start)}"]
        lines += [f"accept {lab(q)}" for q in sorted(self.accepting, key=repr) if q in self.transitions]
        counts = self.counts or {}
        for state, edges in self.transitions.items():
            lines.append(f"state {lab(state)} V={counts.get(state, '?')}")
            pol = self.policy(state) if self.counts is not None else {}
            for sym, nxt in edges:
                mu = pol.get((nxt, sym), "?")
                lines.append(f"edge {lab(state)} {self.alphabet.symbols[sym]} {lab(nxt)} mu={mu}")
        return "\n".join(lines) + "\n"


def backward_counts(nfa: LayeredNfa) -> dict:
    """Completion counts by one backward sweep over the layers."""
    counts = {}
    for state in reversed(list(nfa.transitions)):
        if state in nfa.accepting:
            counts[state] = 1
        else:
            counts[state] = sum(counts[nxt] for _, nxt in nfa.transitions[state])
    return counts


@dataclass(frozen=True, eq=False)
class HammingNfa(LayeredNfa):
    word: Optional[Word] = None
    ell: int = 0

    def _state_label(self, state) -> str:
        return f"{state[0]}^{state[1]}"

    def sample(self, rng) -> Word:
        return Word(self.alphabet, self.sample_symbols(rng))


def build_mnfa(w: Word, ell: int) -> HammingNfa:
    """Automaton accepting exactly the words at Hamming distance ``ell`` from ``w``.

    States are created layer by layer so that ``transitions`` is in
    topological order.
    """
    n, m = w.n, w.alphabet.m
    if not 0 <= ell <= n:
        raise DomainError(f"distance {ell} outside [0, {n}]")

    def live(i, j):
        return 0 <= j <= min(i, ell) and ell - j <= n - i

    transitions = {}
    for i in range(n + 1):
        for j in range(max(0, ell - (n - i)), min(i, ell) + 1):
            edges = []
            if i < n:
                target = w.symbols[i]
                for sym in range(m):
                    nxt = (i + 1, j) if sym == target else (i + 1, j + 1)
                    if live(*nxt):
                        edges.append((sym, nxt))
            transitions[(i, j)] = tuple(edges)
    return HammingNfa(
        alphabet=w.alphabet,
        n=n,
        start=(0, 0),
        accepting=frozenset({(n, ell)}),
        transitions=transitions,
        word=w,
        ell=ell,
    )


def synthesize_policy(nfa: LayeredNfa) -> LayeredNfa:
    """Return a copy of ``nfa`` with completion counts filled in."""
    return replace(nfa, counts=backward_counts(nfa))


def sample_word(nfa: LayeredNfa, rng) -> Word:
    """Uniform draw from the accepted language; ``rng`` is a ``random.Random``."""
    return Word(nfa.alphabet, nfa.sample_symbols(rng))

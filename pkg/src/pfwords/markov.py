"""Markov chains, feasible trajectories and the product automaton.

A trajectory ``w = y1 ... yn`` is feasible when every step, starting from the
fixed initial state ``y0``, has positive transition probability.  The
initial state is never part of the privatized word.  Only the zero pattern
of the transition matrix matters to the mechanism; the probabilities are
kept for validation and for generating synthetic trajectories.
"""

from __future__ import annotations

import bisect
import json
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError, DomainError, InfeasibleWordError, ValidationError
from .nfa import LayeredNfa, backward_counts
from .spectrum import DistanceSpectrum
from .words import Alphabet, Word

ROW_SUM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class MarkovChain:
    states: Alphabet
    transitions: np.ndarray
    initial: int

    def __post_init__(self):
        t = np.array(self.transitions, dtype=float)
        k = self.states.m
        if t.shape != (k, k):
            raise ValidationError(f"transition matrix must be {k}x{k}, got {t.shape}")
        if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
            raise ValidationError("transition probabilities must lie in [0, 1]")
        bad = np.flatnonzero(np.abs(t.sum(axis=1) - 1.0) > ROW_SUM_TOL)
        if bad.size:
            row = self.states.symbols[bad[0]]
            raise ValidationError(f"row {row!r} sums to {t[bad[0]].sum()!r}, not 1")
        if not 0 <= self.initial < k:
            raise ValidationError("initial state out of range")
        t.setflags(write=False)
        object.__setattr__(self, "transitions", t)
        object.__setattr__(
            self, "_succ", tuple(tuple(int(j) for j in np.flatnonzero(row > 0)) for row in t)
        )

    @property
    def size(self) -> int:
        return self.states.m

    def successors(self, y: int) -> tuple[int, ...]:
        return self._succ[y]

    def feasible_step(self, y: int, y_next: int) -> bool:
        return self.transitions[y, y_next] > 0

    def word(self, labels: Sequence[str]) -> Word:
        return Word.from_labels(self.states, labels)

    def to_dict(self) -> dict:
        return {
            "states": list(self.states.symbols),
            "initial": self.states.symbols[self.initial],
            "transitions": [[float(x) for x in row] for row in self.transitions],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MarkovChain":
        try:
            states = Alphabet(tuple(data["states"]))
            initial = data["initial"]
            rows = data["transitions"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"chain object is missing a field: {exc}") from None
        if initial not in states.symbols:
            raise ValidationError(f"initial state {initial!r} is not one of the states")
        return cls(states, np.array(rows, dtype=float), states.index(initial))


def load_chain(path) -> MarkovChain:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return MarkovChain.from_dict(data)


def save_chain(chain: MarkovChain, path) -> None:
    Path(path).write_text(json.dumps(chain.to_dict(), indent=2) + "\n", encoding="utf-8")


def _check_alphabet(chain: MarkovChain, w: Word) -> None:
    if w.alphabet != chain.states:
        raise DimensionError("word is not over the chain's state alphabet")


def first_infeasible(chain: MarkovChain, w: Word) -> Optional[int]:
    """Index ``t`` of the first forbidden step into ``w[t]``, or ``None``."""
    _check_alphabet(chain, w)
    prev = chain.initial
    for t, y in enumerate(w.symbols):
        if not chain.feasible_step(prev, y):
            return t
        prev = y
    return None


def is_feasible(chain: MarkovChain, w: Word) -> bool:
    return first_infeasible(chain, w) is None


def require_feasible(chain: MarkovChain, w: Word) -> None:
    t = first_infeasible(chain, w)
    if t is None:
        return
    labels = chain.states.symbols
    src = labels[chain.initial] if t == 0 else labels[w.symbols[t - 1]]
    dst = labels[w.symbols[t]]
    raise InfeasibleWordError(
        f"word is infeasible: transition {src}->{dst} at position {t + 1} has probability 0",
        t,
        src,
        dst,
    )


@dataclass(frozen=True, eq=False)
class ProductNfa(LayeredNfa):
    """Hamming automaton synchronised with a chain; states are ``(i, j, y)``."""

    chain: Optional[MarkovChain] = None
    word: Optional[Word] = None
    ell: int = 0

    def _state_label(self, state) -> str:
        i, j, y = state
        return f"{i}^{j},{self.alphabet.symbols[y]}"

    def sample(self, rng) -> Word:
        return Word(self.alphabet, self.sample_symbols(rng))


def build_product(chain: MarkovChain, w: Word, ell: int) -> ProductNfa:
    """Product automaton accepting feasible words at distance exactly ``ell``.

    Forward construction from ``(0, 0, y0)`` followed by a backward
    reachability pass that removes states with no accepting completion.
    """
    require_feasible(chain, w)
    n = w.n
    if not 0 <= ell <= n:
        raise DomainError(f"distance {ell} outside [0, {n}]")

    start = (0, 0, chain.initial)
    layers = [[start]]
    edges: dict = {}
    for i in range(n):
        seen = {}
        for state in layers[i]:
            _, j, y = state
            out = []
            for y2 in chain.successors(y):
                j2 = j + (y2 != w.symbols[i])
                if j2 <= ell and ell - j2 <= n - i - 1:
                    nxt = (i + 1, j2, y2)
                    out.append((y2, nxt))
                    seen.setdefault(nxt, None)
            edges[state] = out
        layers.append(sorted(seen))
    for state in layers[n]:
        edges[state] = []

    alive = {s for s in layers[n] if s[1] == ell}
    for i in range(n - 1, -1, -1):
        for state in layers[i]:
            if any(nxt in alive for _, nxt in edges[state]):
                alive.add(state)
    transitions = {}
    for layer in layers:
        for state in layer:
            if state in alive:
                transitions[state] = tuple((s, nxt) for s, nxt in edges[state] if nxt in alive)
    if start not in transitions:
        # No feasible word at this distance: keep a bare start state.
        transitions = {start: ()}
    accepting = frozenset(s for s in transitions if s[0] == n)
    return ProductNfa(
        alphabet=chain.states,
        n=n,
        start=start,
        accepting=accepting,
        transitions=transitions,
        chain=chain,
        word=w,
        ell=ell,
    )


def synthesize_product_policy(pnfa: ProductNfa) -> ProductNfa:
    """Fill completion counts; ``V(start) == 0`` signals an empty class."""
    if pnfa.transitions[pnfa.start] == () and pnfa.start not in pnfa.accepting:
        return replace(pnfa, counts={pnfa.start: 0})
    return replace(pnfa, counts=backward_counts(pnfa))


def sample_feasible_word(pnfa: ProductNfa, rng) -> Word:
    return pnfa.sample(rng)


def feasible_spectrum(chain: MarkovChain, w: Word) -> DistanceSpectrum:
    """Number of feasible words at each distance from ``w``.

    One backward pass over ``(position, chain state)``; each entry holds the
    count of feasible completions indexed by the number of further errors.
    """
    require_feasible(chain, w)
    n, k = w.n, chain.size
    tail = [[1] for _ in range(k)]
    for i in range(n - 1, -1, -1):
        target = w.symbols[i]
        new = []
        for y in range(k):
            acc = [0] * (n - i + 1)
            for y2 in chain.successors(y):
                shift = int(y2 != target)
                for e, c in enumerate(tail[y2]):
                    acc[e + shift] += c
            new.append(acc)
        tail = new
    return DistanceSpectrum(n, tuple(tail[chain.initial]))


def count_feasible(chain: MarkovChain, n: int) -> int:
    """Number of feasible length-``n`` words from the initial state."""
    vec = [0] * chain.size
    vec[chain.initial] = 1
    for _ in range(n):
        nxt = [0] * chain.size
        for y, c in enumerate(vec):
            if c:
                for y2 in chain.successors(y):
                    nxt[y2] += c
        vec = nxt
    return sum(vec)


def sample_trajectory(chain: MarkovChain, n: int, rng: random.Random) -> Word:
    """Walk the chain ``n`` steps from ``y0`` according to its probabilities."""
    if n < 1:
        raise DomainError("trajectory length must be >= 1")
    cum = [list(np.cumsum(row)) for row in chain.transitions]
    y, out = chain.initial, []
    for _ in range(n):
        row = cum[y]
        # bisect_right never lands on a zero-probability entry.
        y = bisect.bisect_right(row, rng.random() * row[-1])
        out.append(y)
    return Word(chain.states, tuple(out))


def generate_chain(n_states: int, density: float, seed: int) -> MarkovChain:
    """Random row-stochastic chain; each entry is nonzero with prob ``density``.

    Every row keeps at least one positive entry.  ``density == 1`` gives a
    fully connected chain.
    """
    if n_states < 2:
        raise DomainError("a chain needs at least two states")
    if not 0 < density <= 1:
        raise DomainError("density must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    mask = rng.random((n_states, n_states)) < density
    for row in mask:
        if not row.any():
            row[rng.integers(n_states)] = True
    weights = np.where(mask, rng.random((n_states, n_states)) + 0.05, 0.0)
    t = weights / weights.sum(axis=1, keepdims=True)
    labels = tuple(f"s{i}" for i in range(n_states))
    return MarkovChain(Alphabet(labels), t, 0)


def reachable_states(chain: MarkovChain, steps: int) -> list[int]:
    """States reachable from ``y0`` in at most ``steps`` transitions."""
    seen = {chain.initial}
    frontier = {chain.initial}
    for _ in range(steps):
        frontier = {y2 for y in frontier for y2 in chain.successors(y)} - seen
        if not frontier:
            break
        seen |= frontier
    return sorted(seen)

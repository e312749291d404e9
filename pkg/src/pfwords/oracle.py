"""Brute-force ground truth for small instances.

Nothing here shares code with the quadrature or the automata: the literal
alternating subset sum, the shuffle-then-accept sampler and the exhaustive
DP-ratio check are independent definitions of the same mechanism.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import CapacityError, DimensionError
from .words import PrivacyParams, Word, hamming_distance

MAX_SUBSET_CANDIDATES = 24


@dataclass(frozen=True)
class ExactPmf:
    support: tuple[Word, ...]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (len(self.support),):
            raise DimensionError("support and probabilities differ in length")
        object.__setattr__(self, "support", tuple(self.support))
        object.__setattr__(self, "probs", probs)

    def as_dict(self) -> dict[Word, float]:
        return dict(zip(self.support, self.probs))

    def __getitem__(self, word: Word) -> float:
        return self.as_dict()[word]


def psi_literal(utilities: Sequence[float], exclude: int, params: PrivacyParams) -> float:
    """Alternating subset sum over every subset of candidates except ``exclude``.

    Each subset ``S`` contributes ``(-1)^|S| / (|S|+1) * prod exp(eps u_s / 2b)``.
    All ``2^(N-1)`` subsets are materialised, hence the size cap.
    """
    if len(utilities) > MAX_SUBSET_CANDIDATES:
        raise CapacityError(
            f"{len(utilities)} candidates exceeds the subset-enumeration cap of "
            f"{MAX_SUBSET_CANDIDATES}"
        )
    prods = np.ones(1)
    sizes = np.zeros(1, dtype=np.int64)
    for j, u in enumerate(utilities):
        if j == exclude:
            continue
        f = math.exp(params.scale * u)
        prods = np.concatenate([prods, prods * f])
        sizes = np.concatenate([sizes, sizes + 1])
    signs = np.where(sizes % 2 == 0, 1.0, -1.0)
    return math.fsum(signs * prods / (sizes + 1))


def exact_pf_pmf(w: Word, candidates: Sequence[Word], params: PrivacyParams) -> ExactPmf:
    """Permute-and-flip output pmf over ``candidates`` by direct evaluation."""
    if len(candidates) > MAX_SUBSET_CANDIDATES:
        raise CapacityError(f"{len(candidates)} candidates exceeds the cap of {MAX_SUBSET_CANDIDATES}")
    utils = [-hamming_distance(w, v) for v in candidates]
    # Excluding any member of a utility class leaves the same multiset.
    psi_by_utility: dict[int, float] = {}
    probs = []
    for j, u in enumerate(utils):
        if u not in psi_by_utility:
            psi_by_utility[u] = psi_literal(utils, j, params)
        probs.append(math.exp(params.scale * u) * psi_by_utility[u])
    return ExactPmf(tuple(candidates), np.array(probs))


def _as_numpy(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, random.Random):
        return np.random.default_rng(rng.getrandbits(64))
    return np.random.default_rng(rng)


def simulate_pf(
    w: Word,
    candidates: Sequence[Word],
    params: PrivacyParams,
    trials: int,
    rng,
    chunk: int = 100_000,
) -> np.ndarray:
    """Empirical pmf of the shuffle-then-accept form of permute-and-flip.

    Candidates are visited in uniformly random order and candidate ``r`` is
    accepted with probability ``exp(eps (u_r - u_max) / 2b)``.  The best
    candidate is accepted with certainty, so each trial stops within
    ``len(candidates)`` flips.
    """
    gen = _as_numpy(rng)
    utils = np.array([-hamming_distance(w, v) for v in candidates], dtype=float)
    accept = np.exp(params.scale * (utils - utils.max()))
    k = len(candidates)
    counts = np.zeros(k, dtype=np.int64)
    done = 0
    while done < trials:
        size = min(chunk, trials - done)
        order = np.argsort(gen.random((size, k)), axis=1)
        flips = gen.random((size, k)) < accept[order]
        first = np.argmax(flips, axis=1)
        chosen = order[np.arange(size), first]
        counts += np.bincount(chosen, minlength=k)
        done += size
    return counts / trials


@dataclass(frozen=True)
class DpCheck:
    """Largest privacy loss found over adjacent inputs and common outputs."""

    max_log_ratio: float
    witness: Optional[tuple[Word, Word, Word]]
    pairs_checked: int

    def holds(self, epsilon: float, slack: float = 1e-9) -> bool:
        return self.max_log_ratio <= epsilon + slack


def verify_dp(pmf_family: Mapping[Word, ExactPmf], b: int) -> DpCheck:
    """Maximise ``ln(pmf_w(o) / pmf_v(o))`` over all ``d(w, v) <= b``.

    An output that one input can produce and an adjacent one cannot is an
    unbounded loss and is reported as ``inf``.
    """
    words = list(pmf_family)
    if not words:
        return DpCheck(0.0, None, 0)
    support = pmf_family[words[0]].support
    index = {o: i for i, o in enumerate(support)}
    rows = []
    for w in words:
        pmf = pmf_family[w]
        row = np.zeros(len(support))
        for o, p in zip(pmf.support, pmf.probs):
            if o not in index:
                raise DimensionError("pmfs must share one output support")
            row[index[o]] = p
        rows.append(row)
    with np.errstate(divide="ignore"):
        logs = np.log(np.array(rows))

    best, witness, pairs = 0.0, None, 0
    for i, w in enumerate(words):
        for j, v in enumerate(words):
            if i == j or hamming_distance(w, v) > b:
                continue
            pairs += 1
            a, c = logs[i], logs[j]
            with np.errstate(invalid="ignore"):
                diff = np.where(np.isneginf(a) & np.isneginf(c), 0.0, a - c)
            k = int(np.argmax(diff))
            if diff[k] > best:
                best, witness = float(diff[k]), (w, v, support[k])
    return DpCheck(best, witness, pairs)

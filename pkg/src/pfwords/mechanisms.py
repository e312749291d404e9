"""End-to-end word privatization.

Both mechanisms draw a distance class first and then a word uniformly from
that class by running an automaton once.  ``pf-*`` uses the permute-and-flip
class pmf, ``em-*`` the exponential-mechanism baseline; ``*-markov`` restricts
candidates to trajectories the chain can produce.
"""

from __future__ import annotations

import hashlib
import random
import time
from dataclasses import asdict, dataclass
from typing import Optional, Union

from .distribution import ClassDistribution, em_class_distribution, pf_class_distribution, sample_class
from .errors import CapacityError, ValidationError
from .markov import (
    MarkovChain,
    build_product,
    feasible_spectrum,
    require_feasible,
    synthesize_product_policy,
)
from .nfa import LayeredNfa, build_mnfa, synthesize_policy
from .oracle import ExactPmf
from .spectrum import full_spectrum
from .words import PrivacyParams, Word, all_words, hamming_distance

MECHANISMS = ("pf-word", "pf-markov", "em-word", "em-markov")
MAX_ENUMERATION = 4096

RngLike = Union[random.Random, int, None]


def derive_seed(master: int, *parts) -> int:
    """Deterministic 63-bit seed from a master seed and any labels."""
    text = repr((int(master),) + tuple(parts)).encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "big") >> 1


def make_rng(rng: RngLike) -> random.Random:
    if isinstance(rng, random.Random):
        return rng
    return random.Random(rng)


@dataclass(frozen=True)
class MechanismReport:
    mechanism: str
    epsilon: float
    b: int
    input: str
    output: str
    ell: int
    seed: Optional[int] = None
    wall_time: Optional[float] = None

    def to_dict(self, include_time: bool = True) -> dict:
        data = asdict(self)
        if not include_time:
            data.pop("wall_time")
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "MechanismReport":
        return cls(**data)


class Privatizer:
    """Reusable sampler for one sensitive word.

    The class distribution is built once per instance; automata are built
    lazily per distance and cached, since they do not depend on epsilon.
    """

    def __init__(
        self,
        w: Word,
        params: PrivacyParams,
        kind: str = "pf",
        chain: Optional[MarkovChain] = None,
        automata: Optional[dict] = None,
    ):
        if kind not in ("pf", "em"):
            raise ValidationError(f"unknown mechanism kind {kind!r}")
        self.w = w
        self.params = params
        self.kind = kind
        self.chain = chain
        if chain is not None:
            require_feasible(chain, w)
            self.spectrum = feasible_spectrum(chain, w)
        else:
            self.spectrum = full_spectrum(w.n, w.alphabet.m)
        build = pf_class_distribution if kind == "pf" else em_class_distribution
        self.distribution: ClassDistribution = build(self.spectrum, params)
        self._automata = {} if automata is None else automata

    @property
    def mechanism_id(self) -> str:
        return f"{self.kind}-{'markov' if self.chain is not None else 'word'}"

    def automaton(self, ell: int) -> LayeredNfa:
        nfa = self._automata.get(ell)
        if nfa is None:
            if self.chain is not None:
                nfa = synthesize_product_policy(build_product(self.chain, self.w, ell))
            else:
                nfa = synthesize_policy(build_mnfa(self.w, ell))
            self._automata[ell] = nfa
        return nfa

    def sample(self, rng: random.Random) -> tuple[int, Word]:
        ell = sample_class(self.distribution, rng)
        return ell, Word(self.w.alphabet, self.automaton(ell).sample_symbols(rng))

    def run(self, rng: RngLike = None, seed: Optional[int] = None) -> MechanismReport:
        if seed is not None:
            rng = random.Random(seed)
        start = time.perf_counter()
        ell, out = self.sample(make_rng(rng))
        elapsed = time.perf_counter() - start
        return MechanismReport(
            self.mechanism_id,
            self.params.epsilon,
            self.params.b,
            self.w.format(),
            out.format(),
            ell,
            seed,
            elapsed,
        )

    def candidates(self) -> list[Word]:
        if self.chain is not None:
            return enumerate_feasible(self.chain, self.w.n)
        if self.w.alphabet.m ** self.w.n > MAX_ENUMERATION:
            raise CapacityError(f"{self.w.alphabet.m}^{self.w.n} words exceeds {MAX_ENUMERATION}")
        return all_words(self.w.alphabet, self.w.n)

    def pmf(self) -> ExactPmf:
        """Exact output pmf: class probability split evenly across the class."""
        words = self.candidates()
        probs = self.distribution.probs
        counts = self.spectrum.counts
        return ExactPmf(
            tuple(words),
            [probs[d] / counts[d] for d in (hamming_distance(self.w, v) for v in words)],
        )


def enumerate_feasible(chain: MarkovChain, n: int) -> list[Word]:
    """All feasible words of length ``n``, by depth-first extension."""
    out: list[tuple[int, ...]] = []

    def extend(prefix, y):
        if len(prefix) == n:
            out.append(tuple(prefix))
            if len(out) > MAX_ENUMERATION:
                raise CapacityError(f"more than {MAX_ENUMERATION} feasible words")
            return
        for y2 in chain.successors(y):
            extend(prefix + [y2], y2)

    extend([], chain.initial)
    return [Word(chain.states, t) for t in out]


def mechanism1(w: Word, params: PrivacyParams, rng: RngLike = None) -> MechanismReport:
    """Permute-and-flip over all words of the same length."""
    return Privatizer(w, params, "pf").run(rng)


def mechanism2(chain: MarkovChain, w: Word, params: PrivacyParams, rng: RngLike = None) -> MechanismReport:
    """Permute-and-flip over the chain's feasible trajectories."""
    return Privatizer(w, params, "pf", chain=chain).run(rng)


def em_mechanism(
    w: Word, params: PrivacyParams, rng: RngLike = None, chain: Optional[MarkovChain] = None
) -> MechanismReport:
    """Exponential-mechanism baseline with the same two-stage sampler."""
    return Privatizer(w, params, "em", chain=chain).run(rng)

from __future__ import annotations

import random
from collections import Counter
from fractions import Fraction
from math import comb
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from pfwords.errors import DomainError, EmptyClassError, ValidationError
from pfwords.nfa import build_mnfa, sample_word, synthesize_policy
from pfwords.spectrum import class_count
from pfwords.words import Alphabet, Word, all_words, hamming_distance

DATA = Path(__file__).parent / "data"


def _nfa(w, ell):
    return synthesize_policy(build_mnfa(w, ell))


def test_fig1_export_golden(word_abc):
    assert _nfa(word_abc, 2).export() == (DATA / "fig1_mnfa.txt").read_text()


def test_fig1_branch_ratios(word_abc):
    nfa = _nfa(word_abc, 2)
    a, b, c = 0, 1, 2
    assert nfa.counts[(0, 0)] == 12
    start = nfa.policy((0, 0))
    assert start == {((1, 0), a): Fraction(1, 3), ((1, 1), b): Fraction(1, 3), ((1, 1), c): Fraction(1, 3)}
    mid = nfa.policy((1, 1))
    assert mid[((2, 1), b)] == Fraction(1, 2)
    assert mid[((2, 2), a)] == Fraction(1, 4) and mid[((2, 2), c)] == Fraction(1, 4)


def test_unsynthesized_policy_raises(word_abc):
    with pytest.raises(ValidationError):
        build_mnfa(word_abc, 1).policy((0, 0))


def test_out_of_range_distance(word_abc):
    with pytest.raises(DomainError):
        build_mnfa(word_abc, 4)


def test_distance_zero_single_path(word_abc, rng):
    nfa = _nfa(word_abc, 0)
    assert nfa.language_size == 1
    assert all(p == 1 for s in nfa.transitions if nfa.transitions[s] for p in nfa.policy(s).values())
    assert sample_word(nfa, rng) == word_abc


def test_complement_binary():
    alpha = Alphabet(("0", "1"))
    w = Word.parse(alpha, "0110")
    nfa = _nfa(w, 4)
    assert nfa.language_size == 1
    assert list(nfa.iter_language()) == [(1, 0, 0, 1)]


@pytest.mark.parametrize("n", [1, 4, 9, 20])
@pytest.mark.parametrize("m", [2, 5, 43])
def test_counts_closed_form(n, m):
    alpha = Alphabet(tuple(f"s{i}" for i in range(m)))
    w = Word(alpha, tuple(i % m for i in range(n)))
    for ell in {0, n // 2, n}:
        nfa = _nfa(w, ell)
        assert nfa.language_size == class_count(n, m, ell)
        for (i, j), v in nfa.counts.items():
            assert v == comb(n - i, ell - j) * (m - 1) ** (ell - j)


@pytest.mark.parametrize("n", [6, 12])
def test_branch_probabilities_sum_to_one(n):
    alpha = Alphabet(tuple("abcd"))
    w = Word(alpha, tuple(i % 4 for i in range(n)))
    nfa = _nfa(w, n // 2)
    for state, edges in nfa.transitions.items():
        if edges:
            assert sum(nfa.policy(state).values()) == 1


@pytest.mark.parametrize("n,m", [(1, 2), (3, 2), (5, 2), (3, 3), (4, 3)])
def test_language_equals_distance_class(n, m):
    alpha = Alphabet(tuple(str(i) for i in range(m)))
    w = Word(alpha, tuple((i * 7) % m for i in range(n)))
    everything = all_words(alpha, n)
    for ell in range(n + 1):
        nfa = _nfa(w, ell)
        lang = sorted(nfa.iter_language())
        assert lang == sorted(v.symbols for v in everything if hamming_distance(w, v) == ell)
        assert all(nfa.accepts(s) for s in lang)


def test_rejects_other_distances(word_abc):
    nfa = _nfa(word_abc, 2)
    assert not nfa.accepts((0, 1, 2))
    assert not nfa.accepts((1, 2, 0))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(1, 12), st.data())
def test_samples_have_exact_distance(m, n, data):
    alpha = Alphabet(tuple(f"s{i}" for i in range(m)))
    w = Word(alpha, tuple(data.draw(st.lists(st.integers(0, m - 1), min_size=n, max_size=n))))
    ell = data.draw(st.integers(0, n))
    seed = data.draw(st.integers(0, 2**32))
    nfa = _nfa(w, ell)
    rng = random.Random(seed)
    for _ in range(5):
        assert hamming_distance(w, sample_word(nfa, rng)) == ell


def test_fig1_sampler_uniform(word_abc):
    nfa = _nfa(word_abc, 2)
    rng = random.Random(2024)
    draws = Counter(nfa.sample_symbols(rng) for _ in range(24_000))
    lang = list(nfa.iter_language())
    assert set(draws) == set(lang)
    assert stats.chisquare([draws[s] for s in lang]).pvalue > 1e-3


def test_huge_counts_sample_exactly():
    # V exceeds 2**53; integer draws must still reach every branch.
    alpha = Alphabet(tuple(f"s{i}" for i in range(43)))
    w = Word(alpha, (0,) * 14)
    nfa = _nfa(w, 10)
    assert nfa.language_size > 2**53
    rng = random.Random(1)
    first = Counter(nfa.sample_symbols(rng)[0] == 0 for _ in range(4000))
    # P(first symbol equals w[0]) = C(13, 10) / C(14, 10) = 4/14.
    assert first[True] / 4000 == pytest.approx(4 / 14, abs=0.03)


def test_empty_language_raises():
    import numpy as np

    from pfwords.markov import MarkovChain, build_product, synthesize_product_policy

    # A deterministic chain admits a single trajectory, so every other class is empty.
    chain = MarkovChain(Alphabet(("y0", "y1")), np.array([[0.0, 1.0], [0.0, 1.0]]), 0)
    w = chain.word(["y1", "y1", "y1"])
    pnfa = synthesize_product_policy(build_product(chain, w, 2))
    assert pnfa.language_size == 0
    with pytest.raises(EmptyClassError):
        pnfa.sample_symbols(random.Random(0))

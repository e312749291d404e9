from __future__ import annotations

import random
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from pfwords.errors import CapacityError, InfeasibleWordError, ValidationError
from pfwords.markov import generate_chain, is_feasible, sample_trajectory
from pfwords.mechanisms import (
    MechanismReport,
    Privatizer,
    derive_seed,
    em_mechanism,
    enumerate_feasible,
    mechanism1,
    mechanism2,
)
from pfwords.oracle import exact_pf_pmf, verify_dp
from pfwords.words import Alphabet, PrivacyParams, Word, all_words, hamming_distance

BINARY = Alphabet(("0", "1"))


@pytest.mark.parametrize("eps,b", [(0.5, 1), (1.0, 1), (5.0, 1), (1.0, 2)])
@pytest.mark.parametrize("kind", ["pf", "em"])
def test_word_dp_exact(eps, b, kind):
    params = PrivacyParams(eps, b)
    family = {w: Privatizer(w, params, kind).pmf() for w in all_words(BINARY, 3)}
    assert verify_dp(family, b).holds(eps)


@pytest.mark.parametrize("kind", ["pf", "em"])
def test_markov_dp_exact(fig2_chain, kind):
    params = PrivacyParams(1.0)
    words = enumerate_feasible(fig2_chain, 3)
    family = {w: Privatizer(w, params, kind, chain=fig2_chain).pmf() for w in words}
    check = verify_dp(family, 1)
    assert check.holds(1.0) and check.pairs_checked > 0


@pytest.mark.parametrize("n,m", [(2, 2), (3, 2), (2, 3)])
def test_word_pmf_equals_oracle(n, m):
    alpha = Alphabet(tuple(str(i) for i in range(m)))
    params = PrivacyParams(1.7)
    w = Word(alpha, (0,) * n)
    cands = all_words(alpha, n)
    np.testing.assert_allclose(Privatizer(w, params).pmf().probs, exact_pf_pmf(w, cands, params).probs, rtol=1e-11)


def test_markov_pmf_equals_oracle(fig2_chain, fig2_word):
    params = PrivacyParams(1.0)
    cands = enumerate_feasible(fig2_chain, 3)
    ours = Privatizer(fig2_word, params, chain=fig2_chain).pmf()
    np.testing.assert_allclose(ours.probs, exact_pf_pmf(fig2_word, cands, params).probs, rtol=1e-11)


def test_empirical_word_pmf_close_to_oracle():
    w = Word(BINARY, (0, 1, 0))
    params = PrivacyParams(1.0)
    priv = Privatizer(w, params)
    rng = random.Random(17)
    trials = 100_000
    tally = Counter(priv.sample(rng)[1] for _ in range(trials))
    exact = exact_pf_pmf(w, all_words(BINARY, 3), params)
    tv = 0.5 * sum(abs(tally[v] / trials - p) for v, p in zip(exact.support, exact.probs))
    assert tv < 0.01


def test_markov_outputs_feasible_and_match_class():
    chain = generate_chain(6, 0.4, 2)
    w = sample_trajectory(chain, 8, random.Random(2))
    priv = Privatizer(w, PrivacyParams(0.5), chain=chain)
    rng = random.Random(0)
    for _ in range(300):
        ell, out = priv.sample(rng)
        assert is_feasible(chain, out) and hamming_distance(w, out) == ell


def test_large_epsilon_returns_input(word_abc, fig2_chain, fig2_word):
    rng = random.Random(0)
    for _ in range(1000):
        assert mechanism1(word_abc, PrivacyParams(200.0), rng).output == "a,b,c"
    assert mechanism2(fig2_chain, fig2_word, PrivacyParams(200.0), 5).output == "y1,y2,y3"


def test_epsilon_zero_uniform():
    w = Word(BINARY, (0, 0))
    priv = Privatizer(w, PrivacyParams(0.0))
    rng = random.Random(1)
    tally = Counter(priv.sample(rng)[1] for _ in range(40_000))
    assert len(tally) == 4
    assert stats.chisquare(list(tally.values())).pvalue > 1e-3


def test_em_class_draws_are_binomial():
    n, m, eps = 6, 3, 1.0
    alpha = Alphabet(("a", "b", "c"))
    w = Word(alpha, (0,) * n)
    priv = Privatizer(w, PrivacyParams(eps), "em")
    rng = random.Random(11)
    draws = np.bincount([priv.sample(rng)[0] for _ in range(60_000)], minlength=n + 1)
    c = (m - 1) * np.exp(-eps / 2)
    expected = 60_000 * stats.binom.pmf(range(n + 1), n, c / (1 + c))
    assert expected.min() > 5
    assert stats.chisquare(draws, expected).pvalue > 1e-3


def test_determinism(word_abc):
    a = Privatizer(word_abc, PrivacyParams(1.0)).run(seed=42).to_dict(include_time=False)
    b = Privatizer(word_abc, PrivacyParams(1.0)).run(seed=42).to_dict(include_time=False)
    assert a == b


def test_report_fields_and_round_trip(fig2_chain, fig2_word):
    rep = em_mechanism(fig2_word, PrivacyParams(1.0), 3, chain=fig2_chain)
    assert rep.mechanism == "em-markov"
    assert hamming_distance(fig2_word, fig2_chain.word(rep.output.split(","))) == rep.ell
    assert MechanismReport.from_dict(rep.to_dict()) == rep
    assert "wall_time" not in rep.to_dict(include_time=False)


def test_infeasible_input_rejected(fig2_chain):
    with pytest.raises(InfeasibleWordError):
        mechanism2(fig2_chain, fig2_chain.word(["y3", "y1", "y1"]), PrivacyParams(1.0))


def test_unknown_kind(word_abc):
    with pytest.raises(ValidationError):
        Privatizer(word_abc, PrivacyParams(1.0), "lap")


def test_enumeration_cap():
    alpha = Alphabet(tuple("abcd"))
    with pytest.raises(CapacityError):
        Privatizer(Word(alpha, (0,) * 7), PrivacyParams(1.0)).pmf()


def test_derive_seed_stable_and_distinct():
    assert derive_seed(1, "pf-word", 0, 0) == derive_seed(1, "pf-word", 0, 0)
    seeds = {derive_seed(1, mech, k, t) for mech in ("pf-word", "em-word") for k in range(3) for t in range(50)}
    assert len(seeds) == 300
    assert 0 <= derive_seed(7) < 2**63


def test_pf_mean_not_above_em_markov():
    chain = generate_chain(10, 0.3, 4)
    w = sample_trajectory(chain, 10, random.Random(4))
    for eps in (0.1, 1.0, 3.0, 8.0):
        pf = Privatizer(w, PrivacyParams(eps), "pf", chain=chain).distribution.mean
        em = Privatizer(w, PrivacyParams(eps), "em", chain=chain).distribution.mean
        assert pf <= em + 1e-12

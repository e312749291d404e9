from __future__ import annotations

import math
import random

import numpy as np
import pytest

from pfwords.errors import CapacityError
from pfwords.oracle import DpCheck, ExactPmf, exact_pf_pmf, psi_literal, simulate_pf, verify_dp
from pfwords.words import Alphabet, PrivacyParams, Word, all_words


def test_psi_two_candidates():
    params = PrivacyParams(2.0)
    q = math.exp(-1.0)
    assert psi_literal([0, -1], 0, params) == pytest.approx(1 - q / 2, rel=1e-15)
    assert psi_literal([0, -1], 1, params) == pytest.approx(1 - 1 / 2, rel=1e-15)


def test_psi_three_candidates_by_hand():
    params = PrivacyParams(1.0)
    a, b = math.exp(-0.5), math.exp(-1.0)
    expected = 1 - (a + b) / 2 + a * b / 3
    assert psi_literal([0, -1, -2], 0, params) == pytest.approx(expected, rel=1e-15)


def test_psi_capacity():
    with pytest.raises(CapacityError):
        psi_literal([0] * 25, 0, PrivacyParams(1.0))


def test_exact_pmf_sums_to_one(word_abc):
    cands = all_words(word_abc.alphabet, 2)
    w = Word.parse(word_abc.alphabet, "ab")
    pmf = exact_pf_pmf(w, cands, PrivacyParams(1.3))
    assert math.fsum(pmf.probs) == pytest.approx(1.0, abs=1e-12)
    assert pmf[w] == max(pmf.probs)


def test_exact_pmf_capacity():
    alpha = Alphabet(("0", "1"))
    with pytest.raises(CapacityError):
        exact_pf_pmf(Word(alpha, (0,) * 5), all_words(alpha, 5), PrivacyParams(1.0))


def test_simulation_matches_exact():
    alpha = Alphabet(("0", "1"))
    w = Word(alpha, (0, 1, 1))
    cands = all_words(alpha, 3)
    params = PrivacyParams(1.0)
    emp = simulate_pf(w, cands, params, 200_000, np.random.default_rng(5))
    exact = exact_pf_pmf(w, cands, params).probs
    assert 0.5 * np.abs(emp - exact).sum() < 0.01


def test_simulation_accepts_python_rng():
    alpha = Alphabet(("0", "1"))
    w = Word(alpha, (0,))
    a = simulate_pf(w, all_words(alpha, 1), PrivacyParams(1.0), 1000, random.Random(3))
    b = simulate_pf(w, all_words(alpha, 1), PrivacyParams(1.0), 1000, random.Random(3))
    np.testing.assert_array_equal(a, b)


def _family(eps_used, n=2):
    alpha = Alphabet(("0", "1"))
    cands = all_words(alpha, n)
    return {w: exact_pf_pmf(w, cands, PrivacyParams(eps_used)) for w in cands}


def test_verify_dp_holds_and_is_tight_enough():
    check = verify_dp(_family(1.0), 1)
    assert check.holds(1.0)
    assert 0.3 < check.max_log_ratio <= 1.0 + 1e-9
    assert check.pairs_checked == 8


def test_verify_dp_detects_violation():
    check = verify_dp(_family(3.0), 1)
    assert not check.holds(1.0)
    w, v, o = check.witness
    assert math.log(_family(3.0)[w][o] / _family(3.0)[v][o]) == pytest.approx(check.max_log_ratio)


def test_verify_dp_disjoint_support_is_infinite():
    alpha = Alphabet(("0", "1"))
    w0, w1 = Word(alpha, (0,)), Word(alpha, (1,))
    fam = {w0: ExactPmf((w0, w1), [1.0, 0.0]), w1: ExactPmf((w0, w1), [0.0, 1.0])}
    check = verify_dp(fam, 1)
    assert math.isinf(check.max_log_ratio) and not check.holds(100.0)


def test_empty_family():
    assert verify_dp({}, 1) == DpCheck(0.0, None, 0)

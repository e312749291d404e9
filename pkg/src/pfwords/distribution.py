"""Class-level permute-and-flip distribution and the exponential baseline.

For a sensitive word, the permute-and-flip probability of an output word only
depends on its distance ``ell`` and on the multiset of all candidate
distances, so the mechanism can be run in two stages: draw a distance class,
then draw a word uniformly inside it.  The class weight is

    exp(-eps * ell / 2b) * count(ell) * Phi(ell)

where ``Phi(ell)`` is the alternating subset sum over all candidates except
one word of class ``ell``.  Expanding the elementary symmetric polynomials
and integrating term by term gives

    Phi(ell) = int_0^1 prod_{j != i(ell)} (1 - t q_j) dt,   q_d = exp(-eps d / 2b)

which is what is evaluated here, in the log domain, with every class of
``count(d)`` identical factors collapsed into one power.
"""

from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError, NumericError
from .spectrum import DistanceSpectrum
from .words import PrivacyParams

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)

RTOL = 1e-13
MAX_DEPTH = 48
# Largest spectrum whose counts and scale still fit a double comfortably.
MAX_LOG_TOTAL = 700.0


def _gauss_legendre(func, a, b):
    half = 0.5 * (b - a)
    x = 0.5 * (a + b) + half * _GL_NODES
    return half * (_GL_WEIGHTS @ func(x))


def _adaptive(func, a, b, whole, floor, depth=0):
    """Vector-valued adaptive Gauss-Legendre on ``[a, b]``.

    Each panel is compared against its two halves; a component is converged
    when the difference is below ``RTOL`` relative to itself or below the
    per-component ``floor``.  Returns ``(estimate, error_bound)``.
    """
    mid = 0.5 * (a + b)
    left = _gauss_legendre(func, a, mid)
    right = _gauss_legendre(func, mid, b)
    both = left + right
    err = np.abs(both - whole)
    if np.all(err <= np.maximum(RTOL * np.abs(both), floor)):
        return both, err
    if depth >= MAX_DEPTH:
        raise NumericError(
            f"quadrature did not converge on [{a!r}, {b!r}]",
            estimate=both,
            error_bound=err,
        )
    l_est, l_err = _adaptive(func, a, mid, left, floor, depth + 1)
    r_est, r_err = _adaptive(func, mid, b, right, floor, depth + 1)
    return l_est + r_est, l_err + r_err


@dataclass(frozen=True)
class PhiTable:
    """``log Phi`` for every class and the gaps ``Phi(0) - Phi(ell)``.

    Empty classes carry ``nan``.  The gaps are integrated directly from a
    positive integrand, so they stay accurate even when they are far below
    the rounding level of ``Phi`` itself.
    """

    log_phi: np.ndarray
    gap: np.ndarray
    error_bound: np.ndarray


def phi_table(spectrum: DistanceSpectrum, params: PrivacyParams) -> PhiTable:
    return _phi_table_cached(spectrum.counts, params.epsilon, params.b)


@functools.lru_cache(maxsize=4096)
def _phi_table_cached(counts: tuple, epsilon: float, b: int) -> PhiTable:
    n = len(counts) - 1
    scale = epsilon / (2 * b)
    support = np.array([d for d, c in enumerate(counts) if c > 0])
    log_cnt = np.array([math.log(counts[d]) for d in support])
    if logsumexp(log_cnt) > MAX_LOG_TOTAL:
        raise NumericError("spectrum too large for double-precision evaluation")
    cnt = np.array([float(counts[d]) for d in support])
    log_q = -scale * support
    one_minus_q = -np.expm1(log_q)
    log_s = float(logsumexp(log_cnt + log_q))
    s = math.exp(log_s)
    r = np.exp(log_q - log_s)  # q_d / S: per-unit-x slope of each factor
    k = len(support)
    # Coefficient matrix: row c is "all classes, minus one word of class c".
    coef = np.tile(cnt, (k, 1)) - np.eye(k)
    gap_rows = [c for c in range(k) if support[c] != 0 and one_minus_q[c] > 0]
    zero_idx = int(np.flatnonzero(support == 0)[0])
    # Gap integrand: the full product divided by the class-0 and class-c factors.
    gap_coef = np.tile(cnt, (len(gap_rows), 1))
    for row, c in enumerate(gap_rows):
        gap_coef[row, zero_idx] -= 1.0
        gap_coef[row, c] -= 1.0
    all_coef = np.vstack([coef, gap_coef]) if gap_rows else coef
    gap_factor = one_minus_q[gap_rows]

    def logs(x):
        y = np.minimum(np.outer(x, r), 1.0 - 2.0**-53)
        return np.log1p(-y)

    def integrand(x):
        lg = logs(x) @ all_coef.T
        out = np.exp(lg)
        if gap_rows:
            out[:, k:] *= x[:, None] * gap_factor
        return out

    def log_envelope(x):
        # Upper bound on every integrand for arguments >= x.
        t = min(x / s, 1.0 - 2.0**-53)
        full = float(logs(np.array([x]))[0] @ cnt)
        return full - 2.0 * math.log1p(-t) + log_s + math.log(max(s - x, 0.0) + 1e-300)

    total = np.zeros(all_coef.shape[0])
    error = np.zeros_like(total)
    a, width = 0.0, 0.5
    while a < s:
        b_ = min(a + width, s)
        floor = np.maximum(1e-3 * RTOL * np.abs(total), 1e-300)
        whole = _gauss_legendre(integrand, a, b_)
        est, err = _adaptive(integrand, a, b_, whole, floor)
        total += est
        error += err
        a = b_
        width = max(width, a)
        if a < s:
            nonzero = total[total > 0]
            if nonzero.size and log_envelope(a) < math.log(nonzero.min()) - 46.0:
                break

    if np.any(total[:k] <= 0):
        raise NumericError("Phi integral underflowed", estimate=total[:k], error_bound=error[:k])
    log_phi = np.full(n + 1, np.nan)
    log_phi[support] = np.log(total[:k]) - log_s
    gap = np.full(n + 1, np.nan)
    gap[support] = 0.0
    for row, c in enumerate(gap_rows):
        gap[support[c]] = total[k + row] / s / s
    err_rel = np.full(n + 1, np.nan)
    err_rel[support] = error[:k] / total[:k]
    for arr in (log_phi, gap, err_rel):
        arr.setflags(write=False)
    return PhiTable(log_phi, gap, err_rel)


def phi(spectrum: DistanceSpectrum, params: PrivacyParams, ell: int) -> float:
    """``log Phi(ell)`` for the given candidate spectrum."""
    if spectrum.count(ell) < 1:
        raise DomainError(f"class {ell} is empty; Phi is undefined there")
    return float(phi_table(spectrum, params).log_phi[ell])


def phi_gap(spectrum: DistanceSpectrum, params: PrivacyParams, ell: int) -> float:
    """``Phi(0) - Phi(ell)``, computed without cancellation."""
    if spectrum.count(ell) < 1:
        raise DomainError(f"class {ell} is empty; Phi is undefined there")
    return float(phi_table(spectrum, params).gap[ell])


@dataclass(frozen=True, eq=False)
class ClassDistribution:
    """Probability of each distance class for one mechanism.

    ``probs[ell]`` is exactly 0 for empty classes.  ``mean`` is the expected
    distance; for permute-and-flip it is evaluated as the exponential
    baseline mean minus a covariance correction so that it keeps full
    relative accuracy when the two differ by less than rounding error.
    """

    kind: str
    spectrum: DistanceSpectrum
    params: PrivacyParams
    log_weights: np.ndarray
    probs: np.ndarray
    mean: float
    prenormalization_sum: float
    log_phi: Optional[np.ndarray] = None
    phi_gap: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.spectrum.n

    @functools.cached_property
    def cumulative(self) -> list[float]:
        return list(np.cumsum(self.probs))

    def to_dict(self) -> dict:
        classes = []
        for ell, count in self.spectrum.classes:
            row = {"ell": ell, "count": count, "prob": float(self.probs[ell])}
            if self.log_phi is not None:
                row["log_phi"] = None if count == 0 else float(self.log_phi[ell])
            classes.append(row)
        return {
            "mechanism": self.kind,
            "n": self.n,
            "epsilon": self.params.epsilon,
            "b": self.params.b,
            "expected_error": self.mean,
            "prenormalization_sum": self.prenormalization_sum,
            "classes": classes,
        }


def _normalize(log_w: np.ndarray) -> tuple[np.ndarray, float]:
    finite = np.isfinite(log_w)
    log_z = float(logsumexp(log_w[finite]))
    probs = np.zeros_like(log_w)
    probs[finite] = np.exp(log_w[finite] - log_z)
    return probs, log_z


def _em_parts(spectrum: DistanceSpectrum, params: PrivacyParams):
    log_w = np.full(spectrum.n + 1, -np.inf)
    for ell, c in spectrum.classes:
        if c > 0:
            log_w[ell] = -params.scale * ell + math.log(c)
    probs, log_z = _normalize(log_w)
    if spectrum.m is not None:
        c = (spectrum.m - 1) * math.exp(-params.scale)
        mean = spectrum.n * c / (1.0 + c)
    else:
        mean = math.fsum(ell * p for ell, p in enumerate(probs))
    return log_w, probs, log_z, mean


def em_class_distribution(spectrum: DistanceSpectrum, params: PrivacyParams) -> ClassDistribution:
    """Exponential-mechanism class pmf, ``P(ell) ~ exp(-eps ell / 2b) count(ell)``."""
    log_w, probs, log_z, mean = _em_parts(spectrum, params)
    for arr in (log_w, probs):
        arr.setflags(write=False)
    return ClassDistribution("em", spectrum, params, log_w, probs, mean, math.exp(log_z))


def pf_class_distribution(spectrum: DistanceSpectrum, params: PrivacyParams) -> ClassDistribution:
    """Permute-and-flip class pmf."""
    table = phi_table(spectrum, params)
    em_log_w, em_probs, _, em_mean = _em_parts(spectrum, params)
    log_w = em_log_w + np.where(np.isfinite(em_log_w), table.log_phi, 0.0)
    probs, log_z = _normalize(log_w)

    support = spectrum.support
    e_em_phi = math.fsum(em_probs[ell] * math.exp(table.log_phi[ell]) for ell in support)
    cov = math.fsum(em_probs[ell] * (ell - em_mean) * table.gap[ell] for ell in support)
    mean = em_mean - cov / e_em_phi
    for arr in (log_w, probs):
        arr.setflags(write=False)
    return ClassDistribution(
        "pf", spectrum, params, log_w, probs, mean, math.exp(log_z), table.log_phi, table.gap
    )


def sample_class(dist: ClassDistribution, rng) -> int:
    """Draw a distance from ``dist`` using one uniform from ``rng``."""
    cum = dist.cumulative
    ell = bisect.bisect_right(cum, rng.random() * cum[-1])
    if ell > dist.n or dist.probs[ell] == 0.0:
        ell = max(i for i, p in enumerate(dist.probs) if p > 0)
    return ell


def expected_error(dist: ClassDistribution) -> float:
    """Expected Hamming distance between input and output."""
    return dist.mean

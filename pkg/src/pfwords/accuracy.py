"""Bounds on the expected output distance of the permute-and-flip mechanism."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

from .distribution import phi_table, em_class_distribution
from .errors import DomainError
from .spectrum import DistanceSpectrum
from .words import PrivacyParams


def _c(m: int, params: PrivacyParams) -> float:
    if m < 2:
        raise DomainError("alphabet size m must be >= 2")
    return (m - 1) * math.exp(-params.scale)


def upper_bound(n: int, m: int, params: PrivacyParams) -> float:
    """``n C / (1 + C)`` with ``C = (m - 1) exp(-eps / 2b)``.

    This is also the exact expected distance of the exponential baseline.
    """
    c = _c(m, params)
    return n * c / (1.0 + c)


def hoeffding_tail(n: int, t: float) -> float:
    """Bound on ``P(|ell - E[ell]| >= t)`` for a distance confined to ``[0, n]``."""
    if t <= 0:
        raise DomainError("t must be positive")
    return 2.0 * math.exp(-2.0 * t * t / (n * n))


@dataclass(frozen=True)
class BoundReport:
    n: int
    epsilon: float
    b: int
    C: Optional[float]
    upper: float
    lower: float
    e_em_phi: float
    phi0: float
    phin: float
    top_class: int
    substituted: bool

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BoundReport":
        return cls(**data)


def bound_report(spectrum: DistanceSpectrum, params: PrivacyParams) -> BoundReport:
    """Upper and lower bounds for one candidate spectrum.

    The upper bound is the exponential baseline's mean over the same
    spectrum (closed form when the spectrum is unconstrained).  When class
    ``n`` is empty, as can happen for Markov-restricted spectra, ``Phi`` at the
    largest non-empty class stands in for ``Phi(n)`` and ``substituted`` is set.
    """
    n = spectrum.n
    table = phi_table(spectrum, params)
    em = em_class_distribution(spectrum, params)
    top = max(spectrum.support)
    e_em_phi = math.fsum(em.probs[ell] * math.exp(table.log_phi[ell]) for ell in spectrum.support)
    upper = em.mean
    lower = upper - n * table.gap[top] / (4.0 * e_em_phi)
    c = _c(spectrum.m, params) if spectrum.m is not None else None
    return BoundReport(
        n=n,
        epsilon=params.epsilon,
        b=params.b,
        C=c,
        upper=upper,
        lower=lower,
        e_em_phi=e_em_phi,
        phi0=math.exp(table.log_phi[0]),
        phin=math.exp(table.log_phi[top]),
        top_class=top,
        substituted=top != n,
    )


def lower_bound(spectrum: DistanceSpectrum, params: PrivacyParams) -> float:
    return bound_report(spectrum, params).lower

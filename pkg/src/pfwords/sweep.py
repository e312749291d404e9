"""Error-versus-epsilon sweeps comparing permute-and-flip with the baseline."""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

from .accuracy import bound_report
from .errors import ValidationError
from .markov import MarkovChain, sample_trajectory
from .mechanisms import Privatizer, derive_seed
from .words import Alphabet, PrivacyParams, Word

CSV_HEADER = ("mechanism", "epsilon", "b", "n", "m", "trial", "ell", "seed")


@dataclass(frozen=True)
class SweepConfig:
    epsilons: tuple[float, ...]
    b: int = 1
    trials: int = 2000
    mechanisms: tuple[str, ...] = ("pf", "em")
    chain: Optional[MarkovChain] = None
    n: Optional[int] = None
    m: Optional[int] = None
    word: Optional[Word] = None
    seed: int = 0

    def __post_init__(self):
        if not self.epsilons:
            raise ValidationError("epsilon grid is empty")
        if any(e < 0 for e in self.epsilons):
            raise ValidationError("epsilon values must be >= 0")
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")
        for mech in self.mechanisms:
            if mech not in ("pf", "em"):
                raise ValidationError(f"unknown mechanism {mech!r}")
        if self.word is None and self.n is None:
            raise ValidationError("give either a sensitive word or a length n")
        if self.chain is None and self.word is None and self.m is None:
            raise ValidationError("word sweeps need an alphabet size m")


@dataclass(frozen=True)
class SweepRow:
    mechanism: str
    epsilon: float
    b: int
    n: int
    m: int
    trial: int
    ell: int
    seed: int


@dataclass
class SweepResult:
    word: Word
    rows: list[SweepRow] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in self.rows:
            writer.writerow([getattr(r, k) for k in CSV_HEADER])
        return buf.getvalue()

    def summary_dict(self) -> dict:
        return {"word": self.word.format(), "summary": self.summary}

    def to_json(self) -> str:
        data = self.summary_dict()
        data["rows"] = [asdict(r) for r in self.rows]
        return json.dumps(data, indent=1) + "\n"


def sensitive_word(config: SweepConfig) -> Word:
    """The configured word, or one generated deterministically from the seed."""
    if config.word is not None:
        return config.word
    rng = random.Random(derive_seed(config.seed, "sensitive-word"))
    if config.chain is not None:
        return sample_trajectory(config.chain, config.n, rng)
    alphabet = Alphabet(tuple(f"a{i}" for i in range(config.m)))
    return Word(alphabet, tuple(rng.randrange(config.m) for _ in range(config.n)))


def run_sweep(config: SweepConfig) -> SweepResult:
    w = sensitive_word(config)
    n, m = w.n, w.alphabet.m
    result = SweepResult(w)
    automata: dict = {}
    for k, eps in enumerate(config.epsilons):
        params = PrivacyParams(eps, config.b)
        means = {}
        expected = {}
        for mech in config.mechanisms:
            priv = Privatizer(w, params, mech, chain=config.chain, automata=automata)
            total = 0
            for trial in range(config.trials):
                seed = derive_seed(config.seed, priv.mechanism_id, k, trial)
                ell, _ = priv.sample(random.Random(seed))
                total += ell
                result.rows.append(SweepRow(priv.mechanism_id, eps, config.b, n, m, trial, ell, seed))
            means[mech] = total / config.trials
            expected[mech] = priv.distribution.mean
        entry = {"epsilon": eps, "b": config.b, "trials": config.trials}
        for mech in config.mechanisms:
            entry[f"mean_{mech}"] = means[mech]
            entry[f"expected_{mech}"] = expected[mech]
        bounds = bound_report(priv.spectrum, params)
        entry["upper_bound"] = bounds.upper
        entry["lower_bound"] = bounds.lower
        if "pf" in means and "em" in means:
            entry["reduction_pct"] = 100.0 * (1 - means["pf"] / means["em"]) if means["em"] > 0 else 0.0
            entry["expected_reduction_pct"] = (
                100.0 * (1 - expected["pf"] / expected["em"]) if expected["em"] > 0 else 0.0
            )
        result.summary.append(entry)
    return result


def parse_grid(values: Sequence[str]) -> tuple[float, ...]:
    """Accepts ``0.1,0.5`` lists and ``start:stop:count`` ranges."""
    out: list[float] = []
    for item in values:
        for part in item.split(","):
            part = part.strip()
            if not part:
                continue
            if ":" in part:
                lo, hi, cnt = part.split(":")
                lo, hi, cnt = float(lo), float(hi), int(cnt)
                if cnt < 1:
                    raise ValidationError("grid count must be >= 1")
                step = (hi - lo) / (cnt - 1) if cnt > 1 else 0.0
                out.extend(lo + i * step for i in range(cnt))
            else:
                out.append(float(part))
    return tuple(out)

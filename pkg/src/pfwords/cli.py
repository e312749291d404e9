"""Command-line interface.

Every subcommand writes JSON to standard output (or to ``--out``).  Errors go
to standard error, and the exit status encodes their kind: 2 for invalid
input, 3 for capacity limits, 4 for numerical failures and 5 for I/O.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .accuracy import bound_report, hoeffding_tail
from .distribution import em_class_distribution, pf_class_distribution, phi_table
from .errors import CapacityError, PfWordsError, ValidationError
from .markov import MarkovChain, generate_chain, load_chain, reachable_states
from .mechanisms import Privatizer, enumerate_feasible
from .oracle import exact_pf_pmf, psi_literal, verify_dp
from .spectrum import full_spectrum
from .sweep import SweepConfig, parse_grid, run_sweep
from .words import Alphabet, PrivacyParams, Word, all_words, hamming_distance, utility

EXIT_IO = 5
EXIT_DP_VIOLATION = 1
ORACLE_RTOL = 1e-9
MAX_DP_INPUTS = 256


def _dump(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _params(args) -> PrivacyParams:
    return PrivacyParams(args.epsilon, args.adjacency)


def _chain_word(args) -> tuple[MarkovChain, Word]:
    chain = load_chain(args.chain)
    if not args.word:
        raise ValidationError("--word is required with --chain")
    return chain, Word.parse(chain.states, args.word)


def _alphabet_word(args) -> Word:
    if not args.word or not args.alphabet:
        raise ValidationError("--word and --alphabet are required")
    return Word.parse(Alphabet.parse(args.alphabet), args.word)


def _report(priv: Privatizer, args) -> str:
    report = priv.run(seed=args.seed)
    return _dump(report.to_dict(include_time=args.timing))


def cmd_privatize_word(args) -> int:
    priv = Privatizer(_alphabet_word(args), _params(args), args.mechanism)
    _emit(_report(priv, args), args.out)
    return 0


def cmd_privatize_trajectory(args) -> int:
    chain, w = _chain_word(args)
    priv = Privatizer(w, _params(args), args.mechanism, chain=chain)
    _emit(_report(priv, args), args.out)
    return 0


def _spectrum_from_args(args):
    """Either a chain plus word, or an unconstrained ``(n, m)`` spectrum."""
    if args.chain:
        chain, w = _chain_word(args)
        return Privatizer(w, PrivacyParams(0.0), chain=chain).spectrum
    if args.n is None or args.m is None:
        raise ValidationError("give --n and --m, or --chain and --word")
    return full_spectrum(args.n, args.m)


def cmd_pmf(args) -> int:
    spectrum = _spectrum_from_args(args)
    params = _params(args)
    kinds = ("pf", "em") if args.mechanism == "both" else (args.mechanism,)
    data = {"n": spectrum.n, "counts": list(spectrum.counts)}
    for kind in kinds:
        build = pf_class_distribution if kind == "pf" else em_class_distribution
        data[kind] = build(spectrum, params).to_dict()
    _emit(_dump(data), args.out)
    return 0


def cmd_bounds(args) -> int:
    spectrum = _spectrum_from_args(args)
    params = _params(args)
    report = bound_report(spectrum, params)
    data = report.to_dict()
    data["expected_pf"] = pf_class_distribution(spectrum, params).mean
    ts = parse_grid(args.t) if args.t else ()
    data["hoeffding"] = [{"t": t, "tail": hoeffding_tail(spectrum.n, t)} for t in ts]
    _emit(_dump(data), args.out)
    return 0


def cmd_sweep(args) -> int:
    chain = load_chain(args.chain) if args.chain else None
    word = None
    if args.word:
        word = Word.parse(chain.states if chain else Alphabet.parse(args.alphabet or ""), args.word)
    config = SweepConfig(
        epsilons=parse_grid(args.epsilon),
        b=args.adjacency,
        trials=args.trials,
        mechanisms=tuple(args.mechanisms.split(",")),
        chain=chain,
        n=args.n,
        m=args.m,
        word=word,
        seed=args.seed,
    )
    result = run_sweep(config)
    body = result.to_csv() if args.format == "csv" else result.to_json()
    if args.out:
        Path(args.out).write_text(body, encoding="utf-8")
        sys.stdout.write(_dump(result.summary_dict()))
    else:
        sys.stdout.write(body)
    return 0


def cmd_gen_chain(args) -> int:
    chain = generate_chain(args.states, args.density, args.seed)
    text = _dump(chain.to_dict())
    reach = [chain.states.symbols[y] for y in reachable_states(chain, args.n_max)]
    info = {"states": chain.size, "n_max": args.n_max, "reachable": reach}
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        info["out"] = args.out
        sys.stdout.write(_dump(info))
    else:
        sys.stdout.write(text)
        sys.stderr.write(_dump(info))
    return 0


def _inputs(args) -> tuple[list[Word], Optional[MarkovChain]]:
    """Sensitive inputs for the exhaustive checks."""
    if args.chain:
        chain = load_chain(args.chain)
        if args.n is None:
            raise ValidationError("--n is required with --chain")
        return enumerate_feasible(chain, args.n), chain
    if args.n is None or args.alphabet is None:
        raise ValidationError("give --n and --alphabet, or --chain and --n")
    return all_words(Alphabet.parse(args.alphabet), args.n), None


def cmd_verify_dp(args) -> int:
    params = _params(args)
    words, chain = _inputs(args)
    if len(words) > MAX_DP_INPUTS:
        raise CapacityError(f"{len(words)} sensitive inputs exceeds the limit of {MAX_DP_INPUTS}")
    family = {w: Privatizer(w, params, args.mechanism, chain=chain).pmf() for w in words}
    check = verify_dp(family, params.b)
    holds = check.holds(params.epsilon)
    data = {
        "epsilon": params.epsilon,
        "b": params.b,
        "mechanism": args.mechanism,
        "inputs": len(words),
        "pairs_checked": check.pairs_checked,
        "max_log_ratio": check.max_log_ratio if math.isfinite(check.max_log_ratio) else "inf",
        "holds": holds,
        "witness": [str(x) for x in check.witness] if check.witness else None,
    }
    _emit(_dump(data), args.out)
    return 0 if holds else EXIT_DP_VIOLATION


def cmd_oracle_compare(args) -> int:
    """Quadrature against the literal subset sum, and class pmf against the word pmf."""
    params = _params(args)
    if args.chain:
        chain, w = _chain_word(args)
        candidates = enumerate_feasible(chain, w.n)
        priv = Privatizer(w, params, "pf", chain=chain)
    else:
        w = _alphabet_word(args)
        priv = Privatizer(w, params, "pf")
        candidates = priv.candidates()
    spectrum = priv.spectrum
    table = phi_table(spectrum, params)
    utils = [utility(w, v) for v in candidates]
    rows = []
    worst = 0.0
    for ell in spectrum.support:
        idx = next(i for i, v in enumerate(candidates) if hamming_distance(w, v) == ell)
        literal = psi_literal(utils, idx, params)
        quad = math.exp(table.log_phi[ell])
        rel = abs(quad - literal) / abs(literal)
        worst = max(worst, rel)
        rows.append({"ell": ell, "phi": quad, "psi_literal": literal, "rel_error": rel})
    exact = exact_pf_pmf(w, candidates, params).as_dict()
    ours = priv.pmf().as_dict()
    pmf_err = max(abs(exact[v] - ours[v]) / exact[v] for v in exact if exact[v] > 0)
    worst = max(worst, pmf_err)
    ok = bool(worst <= ORACLE_RTOL)
    data = {"classes": rows, "pmf_max_rel_error": pmf_err, "max_rel_error": worst, "agrees": ok}
    _emit(_dump(data), args.out)
    return 0 if ok else EXIT_DP_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfwords", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, epsilon=True):
        if epsilon:
            p.add_argument("--epsilon", type=float, required=True)
        p.add_argument("--adjacency", type=int, default=1, help="adjacency radius b")
        p.add_argument("--out", help="write to this file instead of standard output")

    def instance(p):
        p.add_argument("--chain", help="Markov chain JSON file")
        p.add_argument("--word", help="sensitive word, comma separated")
        p.add_argument("--alphabet", help="alphabet symbols, comma separated")
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)

    for name, func, needs_chain in (
        ("privatize-word", cmd_privatize_word, False),
        ("privatize-trajectory", cmd_privatize_trajectory, True),
    ):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--word", required=True)
        if needs_chain:
            p.add_argument("--chain", required=True)
        else:
            p.add_argument("--alphabet", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--mechanism", choices=("pf", "em"), default="pf")
        p.add_argument("--timing", action="store_true", help="include wall_time in the report")
        p.set_defaults(func=func)

    p = sub.add_parser("pmf")
    common(p)
    instance(p)
    p.add_argument("--mechanism", choices=("pf", "em", "both"), default="both")
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("bounds")
    common(p)
    instance(p)
    p.add_argument("--t", action="append", help="Hoeffding deviations, e.g. 1,2,3")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep")
    p.add_argument("--epsilon", action="append", required=True, help="list or start:stop:count")
    p.add_argument("--adjacency", type=int, default=1)
    p.add_argument("--out")
    instance(p)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--mechanisms", default="pf,em")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-chain")
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--density", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", type=int, default=14, help="horizon for the reachability report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_chain)

    p = sub.add_parser("verify-dp")
    common(p)
    instance(p)
    p.add_argument("--mechanism", choices=("pf", "em"), default="pf")
    p.set_defaults(func=cmd_verify_dp)

    p = sub.add_parser("oracle-compare")
    common(p)
    instance(p)
    p.set_defaults(func=cmd_oracle_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PfWordsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ValidationError.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

Exit codes: 0 success, 1 a verification check failed, 2 bad configuration,
3 a subcode enumeration exceeded its cap.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import rates as cap
from .construction import RateTooSmall, choose_ell, choose_prime, prime_bound
from .errors import ConfigError, EnumerationTooLarge
from .fields import PrimeField
from .report import FORMATS, render
from .scenario import U64_MAX, Scenario, load_scenario, parse_scenario
from .simulate import ensemble_fraction_good, resolve_threads, run_scenario
from .verify import LEVELS, verify_suite

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_ENUMERATION = 0, 1, 2, 3


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _threads(text: str) -> int | str:
    return text if text == "auto" else _positive_int(text)


def _receiver(text: str) -> tuple[int, float]:
    try:
        m, s2 = text.split(":")
        return int(m), float(s2)
    except ValueError:
        raise argparse.ArgumentTypeError("receiver must look like M:SIGMA2, e.g. 1:0.5") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, help="master seed (overrides the scenario)")
    common.add_argument("--trials", type=_positive_int, help="trials per receiver (overrides the scenario)")
    common.add_argument("--out", type=Path, help="write output here instead of stdout")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--threads", type=_threads, default=1, help="worker processes, or 'auto'")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="latticecast", description="Lattice multicast with coded side information.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", parents=[common], help="choose p and ell for a target rate")
    p.add_argument("--K", type=_positive_int, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--p", type=int, help="use this prime instead of the smallest admissible one")

    c = sub.add_parser("capacity", parents=[common], help="multicast capacity and per-receiver thresholds")
    c.add_argument("--K", type=_positive_int, required=True)
    c.add_argument("--receiver", type=_receiver, action="append", required=True, metavar="M:SIGMA2")
    c.add_argument("--R", type=float, help="evaluate the per-receiver threshold at this rate")
    c.add_argument("--epsilon", type=float, default=0.0)

    for name, text in (("simulate", "run a scenario"), ("network", "run a scenario against every side-information subspace")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("scenario", type=Path)
        if name == "network":
            noise = s.add_mutually_exclusive_group()
            noise.add_argument("--sigma2", type=float)
            noise.add_argument("--snr-db", type=float)

    v = sub.add_parser("verify", parents=[common], help="run the oracle checks")
    v.add_argument("--level", choices=LEVELS, default="quick")

    e = sub.add_parser("ensemble", parents=[common], help="fraction of random codebooks below an error threshold")
    e.add_argument("scenario", type=Path)
    e.add_argument("--codebooks", type=_positive_int, required=True)
    e.add_argument("--threshold", type=float, default=0.1)
    return parser


def _scenario(args, drop: tuple[str, ...] = (), **forced) -> Scenario:
    """Load the scenario file and apply command-line overrides."""
    sc = load_scenario(args.scenario)
    update = {k: v for k, v in forced.items() if v is not None}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.trials is not None:
        update["trials"] = args.trials
    if not update:
        return sc
    base = {k: v for k, v in sc.model_dump(exclude_unset=True).items() if k not in drop}
    return parse_scenario({**base, **update})


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _cmd_params(args) -> int:
    try:
        field = PrimeField(args.p) if args.p is not None else choose_prime(args.K, args.R, args.epsilon)
        ell = choose_ell(args.n, args.R, field.p, args.K)
    except (ValueError, RateTooSmall) as exc:
        raise ConfigError(str(exc)) from None
    bound = prime_bound(args.K, args.R, args.epsilon)
    if field.p < bound:
        logging.getLogger(__name__).warning("p=%d is below the prime bound %.4g", field.p, bound)
    _emit(
        _dump(
            {
                "p": field.p,
                "prime_bound": bound,
                "prime_meets_bound": field.p >= bound,
                "ell": ell,
                "n": args.n,
                "achieved_rate": ell * math.log2(field.p) / args.n,
            }
        ),
        args.out,
    )
    return EXIT_OK


def _cmd_capacity(args) -> int:
    rows = []
    try:
        for M, s2 in args.receiver:
            row = {"M": M, "sigma2": s2, "capacity_term_bits": cap.capacity_term(M, s2, args.K)}
            if args.R is not None:
                row["threshold_satisfied"] = cap.threshold_check(M, s2, args.R, args.epsilon, args.K).satisfied
            rows.append(row)
        total = cap.capacity(args.receiver, args.K)
    except ValueError as exc:
        raise ConfigError(str(exc), "receiver") from None
    _emit(_dump({"K": args.K, "capacity_bits": total, "receivers": rows}), args.out)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    if args.command == "network":
        drop = ("network_sigma2", "network_snr_db") if args.sigma2 is not None or args.snr_db is not None else ()
        sc = _scenario(args, drop, network_mode=True, network_sigma2=args.sigma2, network_snr_db=args.snr_db)
    else:
        sc = _scenario(args)
    summary = run_scenario(sc, threads=resolve_threads(args.threads))
    _emit(render(summary, args.format), args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    report = verify_suite(args.level, seed=args.seed or 0)
    _emit(report.model_dump_json(indent=2) + "\n", args.out)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name} ({c.seconds:.2f}s)", file=sys.stderr)
    return EXIT_OK if report.all_passed else EXIT_CHECK_FAILED


def _cmd_ensemble(args) -> int:
    sc = _scenario(args)
    res = ensemble_fraction_good(sc, args.codebooks, args.threshold, threads=resolve_threads(args.threads))
    _emit(res.model_dump_json(indent=2) + "\n", args.out)
    return EXIT_OK


COMMANDS = {
    "params": _cmd_params,
    "capacity": _cmd_capacity,
    "simulate": _cmd_simulate,
    "network": _cmd_simulate,
    "verify": _cmd_verify,
    "ensemble": _cmd_ensemble,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationTooLarge as exc:
        print(f"enumeration too large: {exc}", file=sys.stderr)
        return EXIT_ENUMERATION


if __name__ == "__main__":
    sys.exit(main())

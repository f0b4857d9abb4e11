"""Command-line harness: select, verify, simulate, bench.

Exit codes: 0 success (verify: fit not rejected), 1 statistical failure,
2 usage or configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .bench import load_bench_spec, rows_to_csv, run_bench
from .errors import (
    AttemptCapExceededError,
    ConfigError,
    EmptyTableError,
    StakeOverflowError,
    StakewheelError,
    ZeroTotalError,
)
from .gossip import load_sim_config, run_simulation
from .registry import load_stakes
from .rng import RandomSource
from .selection import (
    DEFAULT_ATTEMPT_CAP,
    SamplerKind,
    exact_probabilities,
    select_many,
)
from .stats import DEFAULT_SIGNIFICANCE, FitResult, chi_square

EXIT_OK = 0
EXIT_STATISTICAL_FAIL = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3

_SELECT_CHUNK = 1 << 16


def _add_common_sampling_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--stakes", required=True, metavar="FILE",
                        help="stake file, one peer_id,stake per line")
    parser.add_argument("--sampler", default="sa",
                        choices=[k.value for k in SamplerKind],
                        help="selection strategy (default: sa)")
    parser.add_argument("--seed", type=int, default=0, metavar="U64",
                        help="random seed (default: 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stakewheel",
        description="Stake-weighted peer selection, verification, "
                    "simulation and benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="draw peers and print them")
    _add_common_sampling_args(p_select)
    p_select.add_argument("--count", type=int, default=1, metavar="N",
                          help="number of selections (default: 1)")
    p_select.add_argument("--attempt-cap", type=int,
                          default=DEFAULT_ATTEMPT_CAP, metavar="N",
                          help="acceptance-loop cap per draw")

    p_verify = sub.add_parser(
        "verify", help="chi-square check of empirical vs exact shares")
    _add_common_sampling_args(p_verify)
    p_verify.add_argument("--draws", type=int, default=100_000, metavar="N",
                          help="number of draws, at least 10000 "
                               "(default: 100000)")
    p_verify.add_argument("--alpha", type=float, default=DEFAULT_SIGNIFICANCE,
                          metavar="P", help="significance floor (default: 1e-3)")

    p_sim = sub.add_parser("simulate", help="run the gossip simulator")
    p_sim.add_argument("--config", required=True, metavar="FILE",
                       help="simulation config (JSON)")
    p_sim.add_argument("--format", default="json", choices=["json", "csv"],
                       help="report as JSON or per-peer counts CSV")
    p_sim.add_argument("--out", metavar="FILE",
                       help="also write the output to this file")

    p_bench = sub.add_parser("bench", help="time ns/selection across sizes")
    p_bench.add_argument("--config", required=True, metavar="FILE",
                         help="benchmark spec (JSON)")
    p_bench.add_argument("--out", metavar="FILE",
                         help="also write the CSV to this file")

    return parser


def _emit(text: str, out_path: str | None) -> None:
    sys.stdout.write(text)
    if not text.endswith("\n"):
        sys.stdout.write("\n")
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def cmd_select(args: argparse.Namespace) -> int:
    registry = load_stakes(args.stakes)
    table, peer_ids = registry.snapshot()
    kind = SamplerKind.parse(args.sampler)
    if args.count < 1:
        raise ConfigError(["--count: must be >= 1"])
    rng = RandomSource(args.seed)

    counts = np.zeros(table.size, dtype=np.int64)
    attempts_total = 0
    remaining = args.count
    while remaining > 0:
        chunk = min(remaining, _SELECT_CHUNK)
        indices, attempts = select_many(table, kind, rng, chunk, args.attempt_cap)
        counts += np.bincount(indices, minlength=table.size)
        attempts_total += int(attempts.sum())
        sys.stdout.write("\n".join(peer_ids[i] for i in indices))
        sys.stdout.write("\n")
        remaining -= chunk

    summary = {
        "draws": args.count,
        "sampler": kind.value,
        "seed": args.seed,
        "counts": {pid: int(c) for pid, c in zip(peer_ids, counts.tolist())},
        "shares": {pid: c / args.count for pid, c in zip(peer_ids, counts.tolist())},
        "mean_attempts": attempts_total / args.count,
    }
    sys.stdout.write(json.dumps(summary) + "\n")
    return EXIT_OK


def _verify_fit(table, kind, draws, seed, alpha) -> FitResult:
    rng = RandomSource(seed)
    indices, _attempts = select_many(table, kind, rng, draws)
    counts = np.bincount(indices, minlength=table.size).tolist()
    if table.size == 1:
        # One category carries the whole distribution; the fit is exact by
        # construction (zero degrees of freedom).
        return FitResult(0.0, 0, 1.0, True)
    return chi_square(counts, exact_probabilities(table), significance=alpha)


def cmd_verify(args: argparse.Namespace) -> int:
    registry = load_stakes(args.stakes)
    table, _peer_ids = registry.snapshot()
    kind = SamplerKind.parse(args.sampler)
    if args.draws < 10_000:
        raise ConfigError(["--draws: need at least 10000 draws for a "
                           "meaningful goodness-of-fit test"])
    fit = _verify_fit(table, kind, args.draws, args.seed, args.alpha)
    payload = {
        "statistic": fit.statistic,
        "degrees_of_freedom": fit.degrees_of_freedom,
        "p_value": fit.p_value,
        "passed": fit.passed,
        "draws": args.draws,
        "sampler": kind.value,
        "seed": args.seed,
        "alpha": args.alpha,
    }
    sys.stdout.write(json.dumps(payload) + "\n")
    return EXIT_OK if fit.passed else EXIT_STATISTICAL_FAIL


def cmd_simulate(args: argparse.Namespace) -> int:
    config = load_sim_config(args.config)
    report = run_simulation(config)
    if args.format == "csv":
        text = report.counts_csv()
    else:
        # Timing is excluded so that a fixed seed yields fixed bytes.
        text = report.to_json(include_timing=False)
    _emit(text, args.out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    spec = load_bench_spec(args.config)
    rows = run_bench(spec)
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


_COMMANDS = {
    "select": cmd_select,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError,) as exc:
        for line in exc.messages:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_USAGE
    except (EmptyTableError, ZeroTotalError, StakeOverflowError,
            ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AttemptCapExceededError, StakewheelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

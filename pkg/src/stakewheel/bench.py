"""Micro-benchmark harness: mean nanoseconds per selection across sizes.

The interesting quantity is per-draw cost as the peer count N grows: the
linear sampler scans O(N) cumulative sums per draw, binary search probes
O(log N), and stochastic acceptance does a constant expected amount of work
regardless of N (as long as max_weight does not dwarf the average stake).
Timing wraps the compiled batch kernels, so a cell measures the selection
work itself rather than interpreter overhead, and reports a per-draw mean
over at least ten thousand draws, taken from the fastest of a few repeated
runs to shrug off scheduler noise. Scaling claims should always be judged
on ratios between sizes, never on absolute times from any particular
machine.
"""

from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import dataclass
from io import StringIO

from .errors import ConfigError, StakeOverflowError
from .rng import RandomSource, derive_seed
from .selection import (
    MAX_STAKE,
    SamplerKind,
    StakeTable,
    build_table,
    select_many,
)

WEIGHT_PROFILES = ("uniform", "linear_ramp", "one_dominant", "zipf")

# Stake assigned to ordinary peers by the uniform and one_dominant profiles,
# and to the lightest peer by zipf; keeps profile fractions reasonably exact
# without inflating totals.
BASE_STAKE = 1000

MIN_DRAWS_PER_SIZE = 10_000
DEFAULT_WARMUP_DRAWS = 1000
DEFAULT_REPEATS = 3
MAX_REPEATS = 100

# A single run at or above this duration is already noise-immune; repeats
# would only burn the time budget.
LONG_RUN_SECONDS = 0.5

CSV_HEADER = "N,sampler,ns_per_selection,mean_attempts"


@dataclass
class BenchSpec:
    """What to measure: table sizes x samplers for one weight profile."""

    sizes: list[int]
    weight_profile: str
    samplers: list[SamplerKind]
    draws_per_size: int
    seed: int = 0
    warmup_draws: int = DEFAULT_WARMUP_DRAWS
    repeats: int = DEFAULT_REPEATS
    profile_param: float | None = None


@dataclass
class BenchRow:
    """One timed cell."""

    n: int
    sampler: str
    ns_per_selection: float
    mean_attempts: float


def profile_weights(profile: str, n: int, param: float | None = None) -> list[int]:
    """Generate n integer stakes for a named weight profile.

    uniform: every peer holds BASE_STAKE.
    linear_ramp: peer i holds i + 1.
    one_dominant(f): peer 0 holds fraction f of the total, the rest hold
      BASE_STAKE each; this is the stochastic-acceptance worst case since
      max_weight >> mean weight.
    zipf(s): peer i holds ~ BASE_STAKE * (n / (i + 1))**s, so the lightest
      peer stays near BASE_STAKE.
    """
    if n < 1:
        raise ValueError(f"profile size must be >= 1, got {n}")
    if profile == "uniform":
        return [BASE_STAKE] * n
    if profile == "linear_ramp":
        return list(range(1, n + 1))
    if profile == "one_dominant":
        if param is None or not 0.0 < param < 1.0:
            raise ValueError(f"one_dominant needs a fraction in (0, 1), got {param}")
        if n < 2:
            raise ValueError("one_dominant needs at least 2 peers")
        dominant = round(param / (1.0 - param) * (n - 1) * BASE_STAKE)
        if dominant > MAX_STAKE:
            raise StakeOverflowError(
                f"one_dominant({param}) at N={n} needs a stake of {dominant}, "
                f"beyond the {MAX_STAKE} cap"
            )
        return [dominant] + [BASE_STAKE] * (n - 1)
    if profile == "zipf":
        if param is None or param <= 0.0:
            raise ValueError(f"zipf needs an exponent > 0, got {param}")
        scale = BASE_STAKE * float(n) ** param
        if scale > MAX_STAKE:
            raise StakeOverflowError(
                f"zipf({param}) at N={n} needs a top stake of ~{scale:.0f}, "
                f"beyond the {MAX_STAKE} cap"
            )
        return [max(1, round(scale / float(rank) ** param)) for rank in range(1, n + 1)]
    raise ValueError(f"unknown weight profile {profile!r}")


def load_bench_spec(path: str | os.PathLike) -> BenchSpec:
    """Parse and validate a benchmark spec JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{path}: invalid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a JSON object"])
    return bench_spec_from_dict(data)


def bench_spec_from_dict(data: dict) -> BenchSpec:
    errors: list[str] = []

    sizes = data.get("sizes")
    if (
        not isinstance(sizes, list)
        or not sizes
        or not all(isinstance(s, int) and not isinstance(s, bool) and s >= 1 for s in sizes)
    ):
        errors.append("sizes: must be a non-empty list of positive integers")
        sizes = []
    elif any(b <= a for a, b in zip(sizes, sizes[1:])):
        errors.append("sizes: must be strictly ascending")

    profile = data.get("weight_profile")
    param = None
    if isinstance(profile, dict) and len(profile) == 1:
        name, value = next(iter(profile.items()))
        if name in ("one_dominant", "zipf") and isinstance(value, (int, float)):
            profile, param = name, float(value)
        else:
            errors.append(f"weight_profile: unknown parameterized profile {profile!r}")
            profile = None
    if profile is not None and profile not in WEIGHT_PROFILES:
        errors.append(
            f"weight_profile: must be one of {WEIGHT_PROFILES} "
            f"(one_dominant and zipf take a parameter), got {profile!r}"
        )
        profile = None
    if profile in ("one_dominant", "zipf") and param is None:
        errors.append(f"weight_profile: {profile} requires a parameter")
        profile = None
    if profile == "one_dominant" and param is not None and not 0.0 < param < 1.0:
        errors.append(f"weight_profile: one_dominant fraction must be in (0, 1), got {param}")
    if profile == "zipf" and param is not None and param <= 0.0:
        errors.append(f"weight_profile: zipf exponent must be > 0, got {param}")

    samplers: list[SamplerKind] = []
    raw_samplers = data.get("samplers", [k.value for k in SamplerKind])
    if not isinstance(raw_samplers, list) or not raw_samplers:
        errors.append("samplers: must be a non-empty list")
    else:
        for name in raw_samplers:
            try:
                kind = SamplerKind.parse(name)
            except (ValueError, TypeError):
                errors.append(f"samplers: unknown sampler {name!r}")
                continue
            if kind not in samplers:
                samplers.append(kind)

    draws = data.get("draws_per_size")
    if not isinstance(draws, int) or isinstance(draws, bool):
        errors.append("draws_per_size: required integer field")
        draws = 0
    elif draws < MIN_DRAWS_PER_SIZE:
        errors.append(
            f"draws_per_size: must be >= {MIN_DRAWS_PER_SIZE} for timing "
            f"stability, got {draws}"
        )

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        errors.append(f"seed: must be an integer, got {seed!r}")
        seed = 0

    warmup = data.get("warmup_draws", DEFAULT_WARMUP_DRAWS)
    if not isinstance(warmup, int) or isinstance(warmup, bool) or warmup < 0:
        errors.append(f"warmup_draws: must be a non-negative integer, got {warmup!r}")
        warmup = DEFAULT_WARMUP_DRAWS

    repeats = data.get("repeats", DEFAULT_REPEATS)
    if (not isinstance(repeats, int) or isinstance(repeats, bool)
            or not 1 <= repeats <= MAX_REPEATS):
        errors.append(
            f"repeats: must be an integer in [1, {MAX_REPEATS}], got {repeats!r}"
        )
        repeats = DEFAULT_REPEATS

    unknown = set(data) - {
        "sizes", "weight_profile", "samplers", "draws_per_size", "seed",
        "warmup_draws", "repeats",
    }
    for name in sorted(unknown):
        errors.append(f"{name}: unknown field")

    if errors:
        raise ConfigError(errors)
    return BenchSpec(
        sizes=list(sizes),
        weight_profile=profile,
        samplers=samplers,
        draws_per_size=draws,
        seed=seed,
        warmup_draws=warmup,
        repeats=repeats,
        profile_param=param,
    )


def _warm_cell(table: StakeTable, kind: SamplerKind, rng: RandomSource,
               warmup_draws: int) -> None:
    # Compile/load the kernel and bring the table into cache: a few real
    # draws plus one sequential pass over both arrays.
    if warmup_draws > 0:
        select_many(table, kind, rng, warmup_draws)
    _ = int(table.weights.sum(dtype="uint64")) + int(table.prefix.sum(dtype="uint64"))


def _time_cell(table: StakeTable, kind: SamplerKind, cell_seed: int,
               spec: BenchSpec) -> BenchRow:
    # Fastest of up to spec.repeats identical runs: the draw stream resets
    # per run, so repeats re-time the very same work and the minimum
    # filters out scheduler and host noise. Runs already half a second
    # long are reported as-is.
    best_ns = None
    mean_attempts = 1.0
    for _ in range(spec.repeats):
        rng = RandomSource(cell_seed)
        _warm_cell(table, kind, rng, spec.warmup_draws)
        started = time.perf_counter_ns()
        _indices, attempts = select_many(table, kind, rng, spec.draws_per_size)
        elapsed_ns = time.perf_counter_ns() - started
        if best_ns is None or elapsed_ns < best_ns:
            best_ns = elapsed_ns
            mean_attempts = float(attempts.mean())
        if elapsed_ns >= LONG_RUN_SECONDS * 1e9:
            break
    return BenchRow(
        n=table.size,
        sampler=kind.value,
        ns_per_selection=best_ns / spec.draws_per_size,
        mean_attempts=mean_attempts,
    )


def run_bench(spec: BenchSpec) -> list[BenchRow]:
    """Time every (size, sampler) cell and return one row per cell.

    Each cell draws from its own substream of the spec seed, so reruns of
    the same spec differ only in the timing column.
    """
    rows: list[BenchRow] = []
    for size_index, n in enumerate(spec.sizes):
        weights = profile_weights(spec.weight_profile, n, spec.profile_param)
        table = build_table(weights)
        for kind_index, kind in enumerate(spec.samplers):
            cell_seed = derive_seed(spec.seed, size_index, kind_index)
            rows.append(_time_cell(table, kind, cell_seed, spec))
    return rows


def rows_to_csv(rows: list[BenchRow]) -> str:
    out = StringIO()
    out.write(CSV_HEADER + "\n")
    for row in rows:
        out.write(f"{row.n},{row.sampler},{row.ns_per_selection},{row.mean_attempts}\n")
    return out.getvalue()


def rows_from_csv(text: str) -> list[BenchRow]:
    reader = csv.DictReader(StringIO(text))
    if reader.fieldnames != CSV_HEADER.split(","):
        raise ValueError(f"unexpected bench CSV header: {reader.fieldnames}")
    return [
        BenchRow(
            n=int(rec["N"]),
            sampler=rec["sampler"],
            ns_per_selection=float(rec["ns_per_selection"]),
            mean_attempts=float(rec["mean_attempts"]),
        )
        for rec in reader
    ]

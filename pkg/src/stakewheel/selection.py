"""Stake tables and the three weighted-selection strategies.

A StakeTable freezes a population of peers with integer stakes. Selection is
proportional to stake: peer i is drawn with probability weights[i] / total.
Three interchangeable strategies realize that distribution:

* linear: draw u uniform on [0, total), scan the cumulative sums from the
  left, O(N) per draw;
* binary: same draw, bisect the cumulative sums, O(log N) per draw;
* stochastic acceptance: pick a candidate uniformly, accept with probability
  weights[candidate] / max_weight, retry on rejection, expected O(1) per
  draw (the expected attempt count is N * max_weight / total).

All stake arithmetic is integer-exact. The acceptance test is the integer
comparison r < weights[candidate] with r uniform on [0, max_weight), which
realizes the acceptance probability exactly, with no floating point.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import (
    AttemptCapExceededError,
    EmptyTableError,
    OutOfRangeError,
    StakeOverflowError,
    ZeroTotalError,
)
from .rng import RandomSource

# Per-peer stakes are 32-bit so that totals always fit the doubled 64-bit
# width with room to spare (2**32 peers would be needed to overflow).
MAX_STAKE = 2**32 - 1
MAX_TOTAL = 2**64 - 1

# Acceptance-loop cap. False trips are impossible in practice for sane
# tables: the per-attempt success probability is total / (N * max_weight),
# so even a 1e-3 success rate fails 2**20 straight attempts with
# probability under 1e-450.
DEFAULT_ATTEMPT_CAP = 1 << 20


class SamplerKind(Enum):
    """Closed set of selection strategies; all target the same distribution."""

    LINEAR = "linear"
    BINARY = "binary"
    STOCHASTIC_ACCEPTANCE = "sa"

    @classmethod
    def parse(cls, text: str) -> "SamplerKind":
        for kind in cls:
            if kind.value == text:
                return kind
        valid = ", ".join(k.value for k in cls)
        raise ValueError(f"unknown sampler {text!r} (expected one of: {valid})")


@dataclass(frozen=True, eq=False)
class StakeTable:
    """Immutable stake snapshot with cumulative sums.

    weights[i] is peer i's stake (uint32); prefix[i] is the exact cumulative
    sum weights[0] + ... + weights[i] (uint64). Both arrays are read-only,
    so a table may be shared freely across selection workers.
    """

    weights: np.ndarray
    prefix: np.ndarray
    total: int
    max_weight: int

    @property
    def size(self) -> int:
        return int(self.weights.shape[0])

    def weight_of(self, index: int) -> int:
        if not 0 <= index < self.size:
            raise OutOfRangeError(f"peer index {index} not in [0, {self.size})")
        return int(self.weights[index])


@dataclass(frozen=True)
class Selection:
    """One selection outcome.

    attempts counts acceptance-loop iterations; it is always 1 for the
    search-based strategies.
    """

    index: int
    attempts: int


def build_table(weights: Sequence[int] | Iterable[int]) -> StakeTable:
    """Freeze a stake list into a StakeTable, preserving order.

    Zero stakes are allowed (such peers are simply never selected); a table
    with no positive stake at all is rejected.
    """
    values = [int(w) for w in weights]
    if not values:
        raise EmptyTableError("a stake table needs at least one peer")
    total = 0
    max_weight = 0
    for i, w in enumerate(values):
        if w < 0:
            raise ValueError(f"stake must be non-negative, got {w} at index {i}")
        if w > MAX_STAKE:
            raise StakeOverflowError(
                f"stake {w} at index {i} exceeds the {MAX_STAKE} per-peer cap"
            )
        total += w
        if w > max_weight:
            max_weight = w
    if total == 0:
        raise ZeroTotalError("all stakes are zero; nothing is selectable")
    if total > MAX_TOTAL:
        raise StakeOverflowError(f"stake total {total} exceeds 64 bits")
    weights_arr = np.asarray(values, dtype=np.uint32)
    prefix = np.cumsum(weights_arr, dtype=np.uint64)
    weights_arr.flags.writeable = False
    prefix.flags.writeable = False
    return StakeTable(weights_arr, prefix, total, max_weight)


def exact_probabilities(table: StakeTable) -> list[float]:
    """Target distribution: p_i = weights[i] / total."""
    total = table.total
    return [w / total for w in table.weights.tolist()]


def _check_u(table: StakeTable, u: int) -> None:
    if not 0 <= u < table.total:
        raise OutOfRangeError(f"u={u} not in [0, {table.total})")


def locate_linear(table: StakeTable, u: int) -> int:
    """Smallest index i with prefix[i] > u, found by a left-to-right scan."""
    _check_u(table, u)
    prefix = table.prefix
    for i in range(table.size):
        if u < prefix[i]:
            return i
    raise AssertionError("unreachable: u < total implies a hit")


def locate_binary(table: StakeTable, u: int) -> int:
    """Same contract as locate_linear, via bisection of the prefix sums."""
    _check_u(table, u)
    return bisect_right(table.prefix, u)


def accept(table: StakeTable, candidate: int, r: int) -> bool:
    """Integer acceptance test: true iff r < weights[candidate].

    With r uniform on [0, max_weight) this accepts candidate i with
    probability exactly weights[i] / max_weight.
    """
    if not 0 <= candidate < table.size:
        raise OutOfRangeError(
            f"candidate {candidate} not in [0, {table.size})"
        )
    if not 0 <= r < table.max_weight:
        raise OutOfRangeError(f"r={r} not in [0, {table.max_weight})")
    return r < int(table.weights[candidate])


def expected_attempts(table: StakeTable) -> float:
    """Mean acceptance-loop length: N * max_weight / total.

    The attempt count is geometric with per-attempt success probability
    total / (N * max_weight).
    """
    return table.size * table.max_weight / table.total


def select(
    table: StakeTable,
    kind: SamplerKind,
    rng: RandomSource,
    attempt_cap: int = DEFAULT_ATTEMPT_CAP,
) -> Selection:
    """Draw one peer with probability proportional to stake.

    Every strategy consumes rng deterministically, so a fixed seed fixes
    the whole selection sequence.
    """
    if kind is SamplerKind.LINEAR:
        return Selection(locate_linear(table, rng.next_below(table.total)), 1)
    if kind is SamplerKind.BINARY:
        return Selection(locate_binary(table, rng.next_below(table.total)), 1)
    n = table.size
    max_weight = table.max_weight
    weights = table.weights
    for attempt in range(1, attempt_cap + 1):
        candidate = rng.next_below(n)
        r = rng.next_below(max_weight)
        if r < int(weights[candidate]):
            return Selection(candidate, attempt)
    raise AttemptCapExceededError(
        f"no candidate accepted after {attempt_cap} attempts"
    )


def select_many(
    table: StakeTable,
    kind: SamplerKind,
    rng: RandomSource,
    count: int,
    attempt_cap: int = DEFAULT_ATTEMPT_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """Batch form of select(); returns (indices, attempts) as int64 arrays.

    Consumes the exact same draw stream as `count` sequential select()
    calls and leaves rng in the same final state; it only runs faster.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    out_idx = np.empty(count, dtype=np.int64)
    out_attempts = np.ones(count, dtype=np.int64)
    if count == 0:
        return out_idx, out_attempts
    state = np.uint64(rng.state)
    if kind is SamplerKind.LINEAR:
        state = _kernels.select_linear_batch(
            table.prefix, np.uint64(table.total), state, count, out_idx
        )
    elif kind is SamplerKind.BINARY:
        state = _kernels.select_binary_batch(
            table.prefix, np.uint64(table.total), state, count, out_idx
        )
    else:
        state, completed = _kernels.select_sa_batch(
            table.weights,
            np.uint64(table.size),
            np.uint64(table.max_weight),
            state,
            count,
            attempt_cap,
            out_idx,
            out_attempts,
        )
        if completed != count:
            rng.set_state(int(state))
            raise AttemptCapExceededError(
                f"no candidate accepted after {attempt_cap} attempts "
                f"(draw {completed} of {count})"
            )
    rng.set_state(int(state))
    return out_idx, out_attempts

"""Round-based gossip-selection simulator.

Each round, every node independently picks `fanout` peers with probability
proportional to stake, using the configured sampler. The simulator is
single-threaded and fully deterministic: node n in round r draws from the
substream derived from (seed, n, r), so results do not depend on execution
order. The report aggregates selection counts and summarizes how evenly
selection spread over the peers (dominance ratio, entropy, Gini).
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass
from io import StringIO

from .errors import AttemptCapExceededError, ConfigError
from .registry import StakeRegistry, load_stakes
from .rng import RandomSource
from .selection import SamplerKind, StakeTable, select
from .stats import gini, shannon_entropy

# Total rejected draws (self-selections plus fanout duplicates) tolerated
# per node per round before the configuration is declared infeasible.
REDRAW_CAP = 1 << 20


@dataclass
class SimConfig:
    """Simulation parameters.

    Exactly one of `stakes` (inline, insertion-ordered) or `stakes_file`
    must be provided.
    """

    rounds: int
    fanout: int
    sampler: SamplerKind = SamplerKind.STOCHASTIC_ACCEPTANCE
    seed: int = 0
    allow_self: bool = False
    distinct_fanout: bool = True
    stakes: dict[str, int] | None = None
    stakes_file: str | os.PathLike | None = None


@dataclass
class _DrawCounters:
    """Tally of every sampler invocation, including redrawn discards."""

    draws: int = 0
    attempts: int = 0


@dataclass
class SimReport:
    """Aggregated outcome of a simulation run."""

    peer_ids: list[str]
    selection_counts: list[int]
    dominance_ratio: float
    shannon_entropy: float
    gini: float
    mean_attempts: float
    elapsed_seconds: float
    rounds: int
    fanout: int
    sampler: str
    seed: int

    def to_json(self, include_timing: bool = True) -> str:
        """Render as a single JSON object.

        With include_timing=False the volatile elapsed_seconds field is
        dropped, making the output byte-stable for a fixed seed.
        """
        payload = {
            "peer_ids": self.peer_ids,
            "selection_counts": self.selection_counts,
            "dominance_ratio": self.dominance_ratio,
            "shannon_entropy": self.shannon_entropy,
            "gini": self.gini,
            "mean_attempts": self.mean_attempts,
            "rounds": self.rounds,
            "fanout": self.fanout,
            "sampler": self.sampler,
            "seed": self.seed,
        }
        if include_timing:
            payload["elapsed_seconds"] = self.elapsed_seconds
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SimReport":
        data = json.loads(text)
        return cls(
            peer_ids=list(data["peer_ids"]),
            selection_counts=[int(c) for c in data["selection_counts"]],
            dominance_ratio=float(data["dominance_ratio"]),
            shannon_entropy=float(data["shannon_entropy"]),
            gini=float(data["gini"]),
            mean_attempts=float(data["mean_attempts"]),
            elapsed_seconds=float(data.get("elapsed_seconds", 0.0)),
            rounds=int(data["rounds"]),
            fanout=int(data["fanout"]),
            sampler=str(data["sampler"]),
            seed=int(data["seed"]),
        )

    def counts_csv(self) -> str:
        """Per-peer counts as `peer_id,count,share` CSV text."""
        total = sum(self.selection_counts)
        out = StringIO()
        out.write("peer_id,count,share\n")
        for peer_id, count in zip(self.peer_ids, self.selection_counts):
            out.write(f"{peer_id},{count},{count / total}\n")
        return out.getvalue()


def load_sim_config(path: str | os.PathLike) -> SimConfig:
    """Parse and validate a simulation config JSON file."""
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{path}: invalid JSON: {exc}"]) from None
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a JSON object"])
    return sim_config_from_dict(data)


def sim_config_from_dict(data: dict) -> SimConfig:
    """Build a SimConfig from a parsed JSON object, with per-field errors."""
    errors: list[str] = []

    def take_int(name, minimum=None, default=None):
        if name not in data:
            if default is not None:
                return default
            errors.append(f"{name}: required field is missing")
            return None
        value = data[name]
        if not isinstance(value, int) or isinstance(value, bool):
            errors.append(f"{name}: must be an integer, got {value!r}")
            return None
        if minimum is not None and value < minimum:
            errors.append(f"{name}: must be >= {minimum}, got {value}")
            return None
        return value

    def take_bool(name, default):
        value = data.get(name, default)
        if not isinstance(value, bool):
            errors.append(f"{name}: must be true or false, got {value!r}")
            return default
        return value

    rounds = take_int("rounds", minimum=1)
    fanout = take_int("fanout", minimum=1)
    seed = take_int("seed", default=0)
    allow_self = take_bool("allow_self", False)
    distinct_fanout = take_bool("distinct_fanout", True)

    sampler = SamplerKind.STOCHASTIC_ACCEPTANCE
    if "sampler" in data:
        try:
            sampler = SamplerKind.parse(data["sampler"])
        except (ValueError, TypeError):
            errors.append(f"sampler: unknown value {data['sampler']!r}")

    stakes = data.get("stakes")
    stakes_file = data.get("stakes_file")
    if (stakes is None) == (stakes_file is None):
        errors.append("stakes/stakes_file: provide exactly one stake source")
    if stakes is not None:
        if not isinstance(stakes, dict) or not all(
            isinstance(k, str) and isinstance(v, int) and not isinstance(v, bool)
            for k, v in stakes.items()
        ):
            errors.append("stakes: must map peer ids to integer stakes")
            stakes = None
    if stakes_file is not None and not isinstance(stakes_file, str):
        errors.append(f"stakes_file: must be a path string, got {stakes_file!r}")
        stakes_file = None

    unknown = set(data) - {
        "rounds", "fanout", "seed", "allow_self", "distinct_fanout",
        "sampler", "stakes", "stakes_file",
    }
    for name in sorted(unknown):
        errors.append(f"{name}: unknown field")

    if errors:
        raise ConfigError(errors)
    return SimConfig(
        rounds=rounds,
        fanout=fanout,
        sampler=sampler,
        seed=seed,
        allow_self=allow_self,
        distinct_fanout=distinct_fanout,
        stakes=stakes,
        stakes_file=stakes_file,
    )


def _load_registry(config: SimConfig) -> StakeRegistry:
    if (config.stakes is None) == (config.stakes_file is None):
        raise ConfigError(["stakes/stakes_file: provide exactly one stake source"])
    if config.stakes_file is not None:
        return load_stakes(config.stakes_file)
    registry = StakeRegistry()
    for peer_id, stake in config.stakes.items():
        registry.upsert(peer_id, stake)
    return registry


def _validate_against_table(config: SimConfig, table: StakeTable) -> None:
    errors = []
    if config.distinct_fanout and config.fanout >= table.size:
        errors.append(
            f"fanout: must be < number of peers ({table.size}) "
            "when distinct_fanout is set"
        )
    if errors:
        raise ConfigError(errors)


def run_round(
    table: StakeTable,
    config: SimConfig,
    rng: RandomSource,
    round_index: int = 0,
    counters: _DrawCounters | None = None,
) -> list[tuple[int, list[int]]]:
    """Run one gossip round; returns (selector, selected peers) per node.

    Each node draws from the substream (rng seed, node, round_index).
    Self-selections (unless allowed) and, with distinct_fanout, repeated
    peers are rejected and redrawn; REDRAW_CAP total rejections per node
    turn an infeasible configuration into an error instead of a hang.
    """
    results: list[tuple[int, list[int]]] = []
    for node in range(table.size):
        node_rng = rng.derive(node, round_index)
        chosen: list[int] = []
        redraws = 0
        while len(chosen) < config.fanout:
            picked = select(table, config.sampler, node_rng)
            if counters is not None:
                counters.draws += 1
                counters.attempts += picked.attempts
            rejected = (
                (not config.allow_self and picked.index == node)
                or (config.distinct_fanout and picked.index in chosen)
            )
            if rejected:
                redraws += 1
                if redraws >= REDRAW_CAP:
                    raise AttemptCapExceededError(
                        f"node {node}, round {round_index}: could not pick "
                        f"{config.fanout} peers after {redraws} redraws"
                    )
                continue
            chosen.append(picked.index)
        results.append((node, chosen))
    return results


def run_simulation(config: SimConfig) -> SimReport:
    """Run all rounds and aggregate fairness metrics.

    Deterministic: the same config (including seed) always produces an
    identical report apart from elapsed_seconds.
    """
    registry = _load_registry(config)
    table, peer_ids = registry.snapshot()
    _validate_against_table(config, table)

    counts = [0] * table.size
    counters = _DrawCounters()
    rng = RandomSource(config.seed)
    started = time.perf_counter()
    for round_index in range(config.rounds):
        for _node, chosen in run_round(table, config, rng, round_index, counters):
            for index in chosen:
                counts[index] += 1
    elapsed = time.perf_counter() - started

    total_selections = sum(counts)
    assert total_selections == config.rounds * table.size * config.fanout
    return SimReport(
        peer_ids=peer_ids,
        selection_counts=counts,
        dominance_ratio=max(counts) / total_selections,
        shannon_entropy=shannon_entropy(counts),
        gini=gini(counts),
        mean_attempts=counters.attempts / counters.draws,
        elapsed_seconds=elapsed,
        rounds=config.rounds,
        fanout=config.fanout,
        sampler=config.sampler.value,
        seed=config.seed,
    )

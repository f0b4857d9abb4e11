"""Mutable peer/stake store feeding snapshots to the samplers.

The registry keeps an insertion-ordered map of peer id to stake with an
exactly-maintained running total and a lazily-maintained maximum: updates
are O(1), and a full rescan happens only when the maximum might be stale.

Concurrency contract: single writer, any number of readers of snapshots.
Mutations must be serialized by the caller; snapshots are immutable
StakeTables and may be shared freely. The registry itself takes no locks.
"""

from __future__ import annotations

import os
from typing import Iterable

from .errors import EmptyTableError, StakeOverflowError
from .selection import MAX_STAKE, MAX_TOTAL, StakeTable, build_table

PeerId = str


class StakeRegistry:
    """Insertion-ordered peer stakes with O(1) totals and lazy maximum."""

    def __init__(self, entries: Iterable[tuple[PeerId, int]] = ()):
        self._entries: dict[PeerId, int] = {}
        self._total = 0
        self._max = 0
        self._dirty_max = False
        for peer_id, stake in entries:
            self.upsert(peer_id, stake)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, peer_id: PeerId) -> bool:
        return peer_id in self._entries

    def get(self, peer_id: PeerId) -> int | None:
        return self._entries.get(peer_id)

    def items(self) -> list[tuple[PeerId, int]]:
        """Entries in insertion order (the snapshot order)."""
        return list(self._entries.items())

    @property
    def total_stake(self) -> int:
        return self._total

    @property
    def max_stake(self) -> int:
        if self._dirty_max:
            self._refresh_max()
        return self._max

    def _refresh_max(self) -> None:
        self._max = max(self._entries.values(), default=0)
        self._dirty_max = False

    def upsert(self, peer_id: PeerId, stake: int) -> int | None:
        """Set a peer's stake; returns the previous stake, or None if new.

        The running total is adjusted exactly. The cached maximum is kept
        current when possible and marked stale when the replaced value was
        (or may have been) the maximum.
        """
        stake = int(stake)
        if stake < 0:
            raise ValueError(f"stake must be non-negative, got {stake}")
        if stake > MAX_STAKE:
            raise StakeOverflowError(
                f"stake {stake} exceeds the {MAX_STAKE} per-peer cap"
            )
        previous = self._entries.get(peer_id)
        new_total = self._total - (previous or 0) + stake
        if new_total > MAX_TOTAL:
            raise StakeOverflowError(
                f"total stake {new_total} would exceed 64 bits"
            )
        self._entries[peer_id] = stake
        self._total = new_total
        if stake >= self._max:
            # At least as large as every stake the cache has seen, so the
            # cache is exact again even if it was stale.
            self._max = stake
            self._dirty_max = False
        elif previous is not None and previous == self._max:
            self._dirty_max = True
        return previous

    def remove(self, peer_id: PeerId) -> int | None:
        """Delete a peer; returns its stake, or None if it was absent."""
        value = self._entries.pop(peer_id, None)
        if value is None:
            return None
        self._total -= value
        if not self._entries:
            self._max = 0
            self._dirty_max = False
        elif value == self._max:
            self._dirty_max = True
        return value

    def snapshot(self) -> tuple[StakeTable, list[PeerId]]:
        """Freeze current stakes into a table plus index-to-peer mapping.

        Weights follow insertion order, so index i in the table is
        mapping[i] here. Resolves a stale maximum with one O(N) rescan.
        """
        if not self._entries:
            raise EmptyTableError("registry holds no peers")
        if self._dirty_max:
            self._refresh_max()
        ids = list(self._entries.keys())
        table = build_table(self._entries.values())
        assert table.total == self._total and table.max_weight == self._max
        return table, ids


def load_stakes(path: str | os.PathLike) -> StakeRegistry:
    """Read a stake file: one `peer_id,stake` per line, UTF-8.

    Everything after a `#` is a comment; blank lines are skipped. A peer id
    repeated later in the file overwrites the earlier stake.
    """
    registry = StakeRegistry()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2 or not parts[0]:
                raise ValueError(
                    f"{path}:{lineno}: expected 'peer_id,stake', got {raw.rstrip()!r}"
                )
            try:
                stake = int(parts[1])
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: stake must be an integer, got {parts[1]!r}"
                ) from None
            if stake < 0:
                raise ValueError(f"{path}:{lineno}: stake must be non-negative")
            registry.upsert(parts[0], stake)
    if len(registry) == 0:
        raise ValueError(f"{path}: no stake entries found")
    return registry


def save_stakes(registry: StakeRegistry, path: str | os.PathLike) -> None:
    """Write a registry back out in the stake-file format."""
    with open(path, "w", encoding="utf-8") as fh:
        for peer_id, stake in registry.items():
            fh.write(f"{peer_id},{stake}\n")

"""Registry bookkeeping, snapshots, and the stake-file format."""

import random

import pytest

from stakewheel import registry as registry_mod
from stakewheel.errors import EmptyTableError, StakeOverflowError, ZeroTotalError
from stakewheel.registry import StakeRegistry, load_stakes, save_stakes
from stakewheel.selection import MAX_STAKE


class TestUpsert:
    def test_insert_new(self):
        reg = StakeRegistry()
        assert reg.upsert("A", 5) is None
        assert reg.total_stake == 5
        assert reg.max_stake == 5

    def test_replace_shrinks_max_lazily(self):
        reg = StakeRegistry()
        reg.upsert("A", 5)
        assert reg.upsert("A", 2) == 5
        assert reg.total_stake == 2
        assert reg.max_stake == 2  # recomputed on demand
        table, _ = reg.snapshot()
        assert table.max_weight == 2

    def test_insert_third_peer(self):
        reg = StakeRegistry([("A", 5), ("B", 3)])
        assert reg.upsert("C", 9) is None
        assert reg.total_stake == 17
        assert reg.max_stake == 9

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            StakeRegistry().upsert("A", -1)

    def test_per_peer_overflow(self):
        with pytest.raises(StakeOverflowError):
            StakeRegistry().upsert("A", MAX_STAKE + 1)

    def test_total_overflow_leaves_state_unchanged(self, monkeypatch):
        monkeypatch.setattr(registry_mod, "MAX_TOTAL", 10)
        reg = StakeRegistry([("A", 6)])
        with pytest.raises(StakeOverflowError):
            reg.upsert("B", 5)
        assert reg.total_stake == 6
        assert "B" not in reg
        reg.upsert("B", 4)  # exactly at the cap is fine
        assert reg.total_stake == 10


class TestRemove:
    def test_remove_max_refreshes_lazily(self):
        reg = StakeRegistry([("A", 5), ("B", 3)])
        assert reg.remove("A") == 5
        assert reg.total_stake == 3
        assert reg.max_stake == 3
        table, ids = reg.snapshot()
        assert table.weights.tolist() == [3]
        assert ids == ["B"]

    def test_remove_absent_is_noop(self):
        reg = StakeRegistry([("A", 5)])
        assert reg.remove("Z") is None
        assert reg.total_stake == 5
        assert len(reg) == 1

    def test_remove_last_peer_empties(self):
        reg = StakeRegistry([("A", 5)])
        assert reg.remove("A") == 5
        assert len(reg) == 0
        assert reg.total_stake == 0
        with pytest.raises(EmptyTableError):
            reg.snapshot()


class TestSnapshot:
    def test_insertion_order_mapping(self):
        reg = StakeRegistry([("A", 1), ("B", 2), ("C", 3), ("D", 4)])
        table, ids = reg.snapshot()
        assert ids == ["A", "B", "C", "D"]
        assert table.weights.tolist() == [1, 2, 3, 4]

    def test_reinsert_keeps_first_position(self):
        reg = StakeRegistry([("A", 1), ("B", 2)])
        reg.upsert("A", 7)
        _, ids = reg.snapshot()
        assert ids == ["A", "B"]

    def test_all_zero_is_zero_total(self):
        reg = StakeRegistry([("A", 0), ("B", 0)])
        with pytest.raises(ZeroTotalError):
            reg.snapshot()

    def test_zero_stake_peers_included(self):
        reg = StakeRegistry([("A", 0), ("B", 7)])
        table, ids = reg.snapshot()
        assert ids == ["A", "B"]
        assert table.weights.tolist() == [0, 7]


def test_random_operation_sequences_match_recomputation():
    # Model-based smoke version of the acceptance-scale consistency run.
    rnd = random.Random(1337)
    ids = [f"p{i}" for i in range(30)]
    for _ in range(300):
        reg = StakeRegistry()
        model: dict[str, int] = {}
        for _ in range(rnd.randrange(1, 40)):
            peer = rnd.choice(ids)
            if rnd.random() < 0.3:
                assert reg.remove(peer) == model.pop(peer, None)
            else:
                stake = rnd.randrange(0, 1000)
                assert reg.upsert(peer, stake) == model.get(peer)
                model[peer] = stake
        assert reg.total_stake == sum(model.values())
        assert reg.max_stake == max(model.values(), default=0)
        if model and sum(model.values()) > 0:
            table, snap_ids = reg.snapshot()
            assert snap_ids == list(model.keys())
            assert table.weights.tolist() == list(model.values())
            assert table.total == sum(model.values())
            assert table.max_weight == max(model.values())


class TestStakeFiles:
    def test_round_trip(self, tmp_path):
        reg = StakeRegistry([("alice", 10), ("bob", 0), ("carol", 25)])
        path = tmp_path / "stakes.txt"
        save_stakes(reg, path)
        loaded = load_stakes(path)
        assert loaded.items() == reg.items()

    def test_comments_and_blank_lines(self, tmp_path):
        path = tmp_path / "stakes.txt"
        path.write_text(
            "# leading comment\n"
            "\n"
            "A,1\n"
            "B,2  # trailing comment\n"
            "   \n"
            "C , 3\n",
            encoding="utf-8",
        )
        reg = load_stakes(path)
        assert reg.items() == [("A", 1), ("B", 2), ("C", 3)]

    def test_utf8_ids(self, tmp_path):
        path = tmp_path / "stakes.txt"
        path.write_text("peër-α,5\n", encoding="utf-8")
        assert load_stakes(path).items() == [("peër-α", 5)]

    def test_duplicate_id_last_wins(self, tmp_path):
        path = tmp_path / "stakes.txt"
        path.write_text("A,1\nA,9\n", encoding="utf-8")
        reg = load_stakes(path)
        assert reg.items() == [("A", 9)]

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "stakes.txt"
        path.write_text("A,1\nnot-a-pair\n", encoding="utf-8")
        with pytest.raises(ValueError, match=":2"):
            load_stakes(path)

    def test_bad_stake_value(self, tmp_path):
        path = tmp_path / "stakes.txt"
        path.write_text("A,many\n", encoding="utf-8")
        with pytest.raises(ValueError, match="integer"):
            load_stakes(path)
        path.write_text("A,-4\n", encoding="utf-8")
        with pytest.raises(ValueError, match="non-negative"):
            load_stakes(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "stakes.txt"
        path.write_text("# nothing here\n", encoding="utf-8")
        with pytest.raises(ValueError, match="no stake entries"):
            load_stakes(path)

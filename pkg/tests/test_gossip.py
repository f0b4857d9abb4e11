"""Gossip simulation: rounds, fanout constraints, metrics, determinism."""

import json
import math

import pytest

from stakewheel import gossip
from stakewheel.errors import AttemptCapExceededError, ConfigError
from stakewheel.gossip import (
    SimConfig,
    SimReport,
    load_sim_config,
    run_round,
    run_simulation,
    sim_config_from_dict,
)
from stakewheel.rng import RandomSource
from stakewheel.selection import SamplerKind, build_table
from stakewheel.stats import chi_square


def uniform_config(**overrides):
    base = dict(
        rounds=100,
        fanout=1,
        sampler=SamplerKind.STOCHASTIC_ACCEPTANCE,
        seed=5,
        stakes={f"p{i}": 10 for i in range(6)},
    )
    base.update(overrides)
    return SimConfig(**base)


class TestRunRound:
    def test_single_positive_stake_selected_by_all(self):
        table = build_table([0, 7])
        config = uniform_config(fanout=1, allow_self=True, stakes=None,
                                stakes_file=None)
        for kind in SamplerKind:
            config.sampler = kind
            results = run_round(table, config, RandomSource(3), 0)
            assert [sel for _, sel in results] == [[1], [1]]

    def test_infeasible_fanout_trips_cap(self, monkeypatch):
        monkeypatch.setattr(gossip, "REDRAW_CAP", 500)
        table = build_table([0, 5, 0])
        config = uniform_config(fanout=2, stakes=None)
        with pytest.raises(AttemptCapExceededError):
            run_round(table, config, RandomSource(1), 0)

    def test_self_exclusion_can_trip_cap(self, monkeypatch):
        # Peer 1 holds the only stake but may not gossip to itself.
        monkeypatch.setattr(gossip, "REDRAW_CAP", 500)
        table = build_table([0, 7])
        config = uniform_config(fanout=1, allow_self=False, stakes=None)
        with pytest.raises(AttemptCapExceededError, match="node 1"):
            run_round(table, config, RandomSource(1), 0)

    def test_redraw_cap_default_value(self):
        assert gossip.REDRAW_CAP == 1 << 20

    def test_no_self_selection(self):
        table = build_table([5, 5, 5, 5])
        config = uniform_config(fanout=2, allow_self=False, stakes=None)
        for round_index in range(50):
            for node, chosen in run_round(table, config, RandomSource(9),
                                          round_index):
                assert node not in chosen

    def test_distinct_fanout_yields_distinct_peers(self):
        table = build_table([1, 2, 3, 4, 5])
        config = uniform_config(fanout=3, allow_self=True,
                                distinct_fanout=True, stakes=None)
        for node, chosen in run_round(table, config, RandomSource(4), 0):
            assert len(chosen) == 3
            assert len(set(chosen)) == 3

    def test_duplicates_allowed_without_distinct_fanout(self):
        table = build_table([1, 1])
        config = uniform_config(fanout=4, allow_self=True,
                                distinct_fanout=False, stakes=None)
        rounds = [run_round(table, config, RandomSource(s), 0) for s in range(5)]
        flat = [sel for results in rounds for _, sel in results]
        assert all(len(sel) == 4 for sel in flat)
        assert any(len(set(sel)) < 4 for sel in flat)  # pigeonhole: always

    def test_round_results_independent_of_round_index_seeding(self):
        # Same node in different rounds sees different substreams.
        table = build_table([1, 2, 3, 4, 5, 6])
        config = uniform_config(fanout=2, allow_self=True, stakes=None)
        r0 = run_round(table, config, RandomSource(8), 0)
        r1 = run_round(table, config, RandomSource(8), 1)
        assert r0 != r1


class TestRunSimulation:
    def test_conservation_and_report_shape(self):
        config = uniform_config(rounds=40, fanout=2)
        report = run_simulation(config)
        n = len(config.stakes)
        assert sum(report.selection_counts) == 40 * n * 2
        assert report.peer_ids == list(config.stakes.keys())
        assert 0.0 <= report.gini <= 1.0
        assert 0.0 <= report.shannon_entropy <= math.log2(n) + 1e-12
        assert report.mean_attempts >= 1.0
        assert report.elapsed_seconds > 0.0

    def test_deterministic_reports(self):
        config = uniform_config(rounds=60, fanout=2, seed=123)
        first = run_simulation(config)
        second = run_simulation(config)
        assert first.to_json(include_timing=False) == second.to_json(
            include_timing=False)

    def test_uniform_stakes_low_gini(self):
        config = uniform_config(rounds=2000, fanout=1,
                                stakes={f"p{i}": 10 for i in range(10)})
        report = run_simulation(config)
        assert report.gini < 0.02
        assert abs(report.shannon_entropy - math.log2(10)) < 0.02

    def test_proportionality_and_dominance_at_scale(self):
        # 1e6 selections over stakes 1:2:3:4; shares must track exact
        # probabilities and the top peer's share its stake fraction.
        config = SimConfig(
            rounds=250_000,
            fanout=1,
            sampler=SamplerKind.STOCHASTIC_ACCEPTANCE,
            seed=4,
            allow_self=True,
            stakes={"a": 1, "b": 2, "c": 3, "d": 4},
        )
        report = run_simulation(config)
        total = sum(report.selection_counts)
        shares = [c / total for c in report.selection_counts]
        for share, expected in zip(shares, [0.1, 0.2, 0.3, 0.4]):
            assert abs(share - expected) < 0.005
        assert abs(report.dominance_ratio - 0.4) < 0.01
        assert report.mean_attempts == pytest.approx(1.6, rel=0.02)

    def test_sampler_agnostic_distribution(self):
        stakes = {"a": 1, "b": 2, "c": 3, "d": 4}
        expected = [0.1, 0.2, 0.3, 0.4]
        for kind in SamplerKind:
            config = SimConfig(rounds=20_000, fanout=1, sampler=kind, seed=31,
                               allow_self=True, stakes=stakes)
            report = run_simulation(config)
            fit = chi_square(report.selection_counts, expected)
            assert fit.p_value > 1e-3, kind

    def test_fanout_validation_against_table(self):
        config = uniform_config(fanout=6)  # 6 peers, distinct fanout needs < 6
        with pytest.raises(ConfigError, match="fanout"):
            run_simulation(config)

    def test_stakes_file_source(self, tmp_path):
        path = tmp_path / "stakes.txt"
        path.write_text("x,5\ny,5\n", encoding="utf-8")
        config = uniform_config(stakes=None, stakes_file=str(path), rounds=10)
        report = run_simulation(config)
        assert report.peer_ids == ["x", "y"]

    def test_exactly_one_stake_source_required(self):
        config = uniform_config()
        config.stakes_file = "also.txt"
        with pytest.raises(ConfigError):
            run_simulation(config)
        config = uniform_config(stakes=None)
        with pytest.raises(ConfigError):
            run_simulation(config)


class TestSimReportSerialization:
    def test_json_round_trip(self):
        report = run_simulation(uniform_config(rounds=30))
        parsed = SimReport.from_json(report.to_json())
        assert parsed == report

    def test_json_without_timing_round_trips(self):
        report = run_simulation(uniform_config(rounds=30))
        parsed = SimReport.from_json(report.to_json(include_timing=False))
        assert parsed.selection_counts == report.selection_counts
        assert parsed.elapsed_seconds == 0.0

    def test_counts_csv(self):
        report = run_simulation(uniform_config(rounds=30))
        lines = report.counts_csv().strip().split("\n")
        assert lines[0] == "peer_id,count,share"
        assert len(lines) == 1 + len(report.peer_ids)
        total = sum(report.selection_counts)
        for line, pid, count in zip(lines[1:], report.peer_ids,
                                    report.selection_counts):
            cells = line.split(",")
            assert cells[0] == pid
            assert int(cells[1]) == count
            assert float(cells[2]) == pytest.approx(count / total)


class TestConfigParsing:
    def test_load_valid(self, tmp_path):
        path = tmp_path / "sim.json"
        path.write_text(json.dumps({
            "stakes": {"a": 1, "b": 2},
            "rounds": 5,
            "fanout": 1,
            "sampler": "binary",
            "seed": 9,
            "allow_self": True,
            "distinct_fanout": False,
        }), encoding="utf-8")
        config = load_sim_config(path)
        assert config.sampler is SamplerKind.BINARY
        assert config.allow_self is True
        assert config.distinct_fanout is False

    def test_field_level_messages(self):
        with pytest.raises(ConfigError) as excinfo:
            sim_config_from_dict({
                "rounds": 0,
                "sampler": "bogus",
                "stakes": {"a": 1},
                "stakes_file": "x.txt",
                "mystery": 1,
            })
        messages = "\n".join(excinfo.value.messages)
        assert "rounds" in messages
        assert "fanout" in messages
        assert "sampler" in messages
        assert "stake source" in messages
        assert "mystery" in messages

    def test_bad_json(self, tmp_path):
        path = tmp_path / "sim.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigError, match="invalid JSON"):
            load_sim_config(path)

    def test_bad_stakes_mapping(self):
        with pytest.raises(ConfigError, match="stakes"):
            sim_config_from_dict({"rounds": 1, "fanout": 1,
                                  "stakes": {"a": "lots"}})

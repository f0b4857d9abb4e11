"""Stake-weighted peer selection with three interchangeable strategies.

Public surface: stake tables and samplers (selection), a mutable stake
registry with file I/O (registry), a deterministic gossip simulator
(gossip), goodness-of-fit and diversity metrics (stats), a timing harness
(bench), and a CLI (cli).
"""

from . import errors
from .bench import BenchRow, BenchSpec, load_bench_spec, profile_weights, run_bench
from .gossip import SimConfig, SimReport, load_sim_config, run_round, run_simulation
from .registry import StakeRegistry, load_stakes, save_stakes
from .rng import RandomSource, derive_seed
from .selection import (
    DEFAULT_ATTEMPT_CAP,
    MAX_STAKE,
    MAX_TOTAL,
    SamplerKind,
    Selection,
    StakeTable,
    accept,
    build_table,
    exact_probabilities,
    expected_attempts,
    locate_binary,
    locate_linear,
    select,
    select_many,
)
from .stats import FitResult, chi_square, chi_square_sf, gini, shannon_entropy

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "BenchSpec",
    "DEFAULT_ATTEMPT_CAP",
    "FitResult",
    "MAX_STAKE",
    "MAX_TOTAL",
    "RandomSource",
    "SamplerKind",
    "Selection",
    "SimConfig",
    "SimReport",
    "StakeRegistry",
    "StakeTable",
    "accept",
    "build_table",
    "chi_square",
    "chi_square_sf",
    "derive_seed",
    "errors",
    "exact_probabilities",
    "expected_attempts",
    "gini",
    "load_bench_spec",
    "load_sim_config",
    "load_stakes",
    "locate_binary",
    "locate_linear",
    "profile_weights",
    "run_bench",
    "run_round",
    "run_simulation",
    "save_stakes",
    "select",
    "select_many",
    "shannon_entropy",
    "__version__",
]

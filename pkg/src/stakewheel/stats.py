"""Goodness-of-fit testing and diversity metrics.

chi_square checks empirical selection counts against a target distribution
with Pearson's statistic; its p-value comes from the chi-square survival
function, evaluated here from scratch via the regularized incomplete gamma
(power series on the lower tail, continued fraction on the upper tail).
shannon_entropy and gini quantify how evenly selections spread over peers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    ImpossibleObservationError,
    InvalidExpectedError,
    LengthMismatchError,
    ZeroSampleError,
)

DEFAULT_SIGNIFICANCE = 1e-3

# Minimum expected count per category for the chi-square approximation to
# be trustworthy; below this we warn but still compute.
MIN_EXPECTED_COUNT = 5.0

_EXPECTED_SUM_TOL = 1e-9
_GAMMA_EPS = 1e-16
_GAMMA_MAX_ITER = 10_000


@dataclass(frozen=True)
class FitResult:
    """Outcome of a chi-square goodness-of-fit test.

    passed is the verdict against the significance floor supplied to
    chi_square: True means the fit is not rejected (p_value > floor).
    """

    statistic: float
    degrees_of_freedom: int
    p_value: float
    passed: bool


def _lower_regularized_series(a: float, x: float) -> float:
    # P(a, x) by the ascending series; converges fast for x < a + 1.
    term = 1.0 / a
    total = term
    denom = a
    for _ in range(_GAMMA_MAX_ITER):
        denom += 1.0
        term *= x / denom
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _upper_regularized_contfrac(a: float, x: float) -> float:
    # Q(a, x) by the Lentz continued fraction; converges fast for x >= a + 1.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_gamma_upper(a: float, x: float) -> float:
    """Q(a, x), the upper regularized incomplete gamma function."""
    if a < 0.0 or x < 0.0:
        raise ValueError(f"require a >= 0 and x >= 0, got a={a}, x={x}")
    if x == 0.0:
        return 1.0
    if a == 0.0:
        return 0.0
    if x < a + 1.0:
        return 1.0 - _lower_regularized_series(a, x)
    return _upper_regularized_contfrac(a, x)


def chi_square_sf(statistic: float, dof: int) -> float:
    """Survival function of the chi-square distribution, P(X >= statistic).

    dof = 0 is the degenerate point mass at zero: the survival probability
    is 1 at zero and 0 beyond it.
    """
    if dof < 0:
        raise ValueError(f"degrees of freedom must be >= 0, got {dof}")
    if statistic <= 0.0:
        return 1.0
    if dof == 0:
        return 0.0
    return regularized_gamma_upper(dof / 2.0, statistic / 2.0)


def chi_square(
    observed: Sequence[int],
    expected: Sequence[float],
    significance: float = DEFAULT_SIGNIFICANCE,
) -> FitResult:
    """Pearson goodness-of-fit of observed counts against expected shares.

    Zero-probability categories must hold zero observations; they are
    dropped from the statistic and the degrees of freedom. Categories whose
    expected count falls below MIN_EXPECTED_COUNT trigger a warning because
    the chi-square approximation degrades there.
    """
    obs = [int(o) for o in observed]
    exp = [float(e) for e in expected]
    if len(obs) != len(exp) or not obs:
        raise LengthMismatchError(
            f"observed has {len(obs)} categories, expected has {len(exp)}"
        )
    if any(o < 0 for o in obs):
        raise ValueError("observed counts must be non-negative")
    if any(e < 0.0 for e in exp) or abs(math.fsum(exp) - 1.0) > _EXPECTED_SUM_TOL:
        raise InvalidExpectedError(
            f"expected values must be a distribution, sum={math.fsum(exp)!r}"
        )
    sample = sum(obs)
    if sample <= 0:
        raise ZeroSampleError("no observations")

    statistic = 0.0
    kept = 0
    low_expected = False
    for i, (o, e) in enumerate(zip(obs, exp)):
        if e == 0.0:
            if o != 0:
                raise ImpossibleObservationError(
                    f"category {i} has probability 0 but {o} observations"
                )
            continue
        kept += 1
        expected_count = e * sample
        if expected_count < MIN_EXPECTED_COUNT:
            low_expected = True
        diff = o - expected_count
        statistic += diff * diff / expected_count
    if low_expected:
        warnings.warn(
            f"some expected counts fall below {MIN_EXPECTED_COUNT}; "
            "the chi-square approximation may be unreliable",
            stacklevel=2,
        )
    dof = kept - 1
    if dof == 0:
        # A single kept category must hold the whole sample, so the fit is
        # exact; drop any float residue from an expected value a hair off 1.
        statistic = 0.0
    p_value = chi_square_sf(statistic, dof)
    return FitResult(statistic, dof, p_value, p_value > significance)


def shannon_entropy(counts: Sequence[int]) -> float:
    """Entropy in bits of the empirical distribution counts / sum(counts)."""
    values = [int(c) for c in counts]
    if any(c < 0 for c in values):
        raise ValueError("counts must be non-negative")
    total = sum(values)
    if total <= 0:
        raise ZeroSampleError("no observations")
    entropy = 0.0
    for c in values:
        if c > 0:
            q = c / total
            entropy -= q * math.log2(q)
    return entropy


def gini(counts: Sequence[int]) -> float:
    """Gini coefficient of the counts, 0 for perfect equality.

    Uses the sorted-rank form G = sum_i (2i - n - 1) x_(i) / (n * sum x)
    with 1-based ranks over ascending values.
    """
    values = sorted(int(c) for c in counts)
    if values and values[0] < 0:
        raise ValueError("counts must be non-negative")
    total = sum(values)
    if total <= 0:
        raise ZeroSampleError("no observations")
    n = len(values)
    weighted = sum((2 * i - n - 1) * x for i, x in enumerate(values, start=1))
    return weighted / (n * total)

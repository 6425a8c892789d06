"""Failed-CBG count probabilities for CBG-based HARQ transmissions.

A transport block is split into M code block groups (CBGs), each of which
fails independently with its own probability.  This module computes the
distribution of the number of failed CBGs three ways:

* exact Poisson-binomial evaluation (dynamic-programming convolution),
* odds-ratio closed forms for 0..3 failures (product of survival
  probabilities times an elementary symmetric polynomial of the odds),
* brute-force enumeration of all 2^M ACK/NACK outcomes, kept as an
  independent oracle for the other two paths.

A correlated all-or-nothing mixture model and the scalar identities
linking CB, CBG and TB error probabilities live here as well.

All probabilities are linear-scale 64-bit floats.  Algebraic identities
hold to 1e-12; pmf normalization to 1e-9.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_CBGS = 8
ENUMERATION_LIMIT = 20
PROB_CLAMP_EPS = 1e-12

__all__ = [
    "MAX_CBGS",
    "ENUMERATION_LIMIT",
    "PROB_CLAMP_EPS",
    "CbgErrorVector",
    "OddsVector",
    "ErrorCountDistribution",
    "CorrelatedModel",
    "cbg_error_prob_iid",
    "tbep_from_cbgep",
    "cbgep_from_tbep",
    "at_most_n_failed_iid",
    "cbg_error_prob_general",
    "failed_count_pmf",
    "exact_n_failed",
    "brute_force_pmf",
    "brute_force_n_failed",
    "odds",
    "prob_from_odds",
    "closed_form_n_failed",
    "correlated_pmf",
    "correlated_distribution",
]


def _check_prob(value: float, name: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value!r}")
    return float(value)


def _as_prob_array(probs) -> np.ndarray:
    """Accept a CbgErrorVector or a plain sequence of probabilities."""
    if isinstance(probs, CbgErrorVector):
        return np.asarray(probs.probs, dtype=float)
    arr = np.asarray(probs, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("probability vector must be a nonempty 1-d sequence")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError("probabilities must be in [0, 1]")
    return arr


@dataclass(frozen=True)
class CbgErrorVector:
    """Per-CBG error probabilities for one transport block at one MCS."""

    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not 1 <= len(self.probs) <= MAX_CBGS:
            raise ValueError(
                f"CBG count must be in [1, {MAX_CBGS}], got {len(self.probs)}"
            )
        for p in self.probs:
            _check_prob(p, "CBG error probability")

    @property
    def m(self) -> int:
        return len(self.probs)

    def to_odds(self) -> "OddsVector":
        return OddsVector.from_probs(self.probs)


@dataclass(frozen=True)
class OddsVector:
    """Odds ratios O = p / (1 - p) of a CBG error vector."""

    odds: tuple

    def __post_init__(self):
        object.__setattr__(self, "odds", tuple(float(o) for o in self.odds))
        if len(self.odds) == 0:
            raise ValueError("odds vector must be nonempty")
        if any(o < 0.0 or not math.isfinite(o) for o in self.odds):
            raise ValueError("odds must be finite and non-negative")

    @classmethod
    def from_probs(cls, probs: Sequence[float]) -> "OddsVector":
        return cls(tuple(odds(p) for p in probs))

    def to_probs(self) -> tuple:
        return tuple(prob_from_odds(o) for o in self.odds)

    @property
    def m(self) -> int:
        return len(self.odds)


@dataclass(frozen=True)
class ErrorCountDistribution:
    """Pmf of the number of failed CBGs, indexed 0..M."""

    pmf: tuple

    def __post_init__(self):
        object.__setattr__(self, "pmf", tuple(float(x) for x in self.pmf))
        if len(self.pmf) < 2:
            raise ValueError("pmf needs at least entries for 0 and 1 failures")
        for x in self.pmf:
            if not -1e-15 <= x <= 1.0 + 1e-15:
                raise ValueError(f"pmf entry out of [0, 1]: {x!r}")
        if abs(sum(self.pmf) - 1.0) > 1e-9:
            raise ValueError(f"pmf does not sum to 1: {sum(self.pmf)!r}")

    @property
    def m(self) -> int:
        return len(self.pmf) - 1

    def at_most(self, n: int) -> float:
        if not 0 <= n <= self.m:
            raise ValueError(f"count must be in [0, {self.m}], got {n}")
        return float(sum(self.pmf[: n + 1]))


@dataclass(frozen=True)
class CorrelatedModel:
    """Common-CBGEP model with correlation rho between CBG failures.

    rho = 0 is the independent binomial case; rho = 1 makes all CBGs fail
    or succeed together (all-or-nothing).
    """

    p: float
    rho: float
    m: int

    def __post_init__(self):
        _check_prob(self.p, "p")
        _check_prob(self.rho, "rho")
        if not 1 <= self.m <= MAX_CBGS:
            raise ValueError(f"CBG count must be in [1, {MAX_CBGS}], got {self.m}")


def cbg_error_prob_iid(p_cb: float, group_size: int) -> float:
    """CBG error probability when every CB in the group fails with p_cb."""
    _check_prob(p_cb, "p_cb")
    if group_size < 1:
        raise ValueError(f"group size must be >= 1, got {group_size}")
    return 1.0 - (1.0 - p_cb) ** group_size


def tbep_from_cbgep(p_cbg: float, m: int) -> float:
    """TB error probability from a common CBG error probability."""
    _check_prob(p_cbg, "p_cbg")
    if m < 1:
        raise ValueError(f"CBG count must be >= 1, got {m}")
    return 1.0 - (1.0 - p_cbg) ** m


def cbgep_from_tbep(p_tb: float, m: int) -> float:
    """Common CBG error probability that yields a given TB error probability."""
    _check_prob(p_tb, "p_tb")
    if m < 1:
        raise ValueError(f"CBG count must be >= 1, got {m}")
    return 1.0 - (1.0 - p_tb) ** (1.0 / m)


def at_most_n_failed_iid(p_cbg: float, m: int, n: int) -> float:
    """P(at most n of m i.i.d. CBGs fail): binomial tail sum."""
    _check_prob(p_cbg, "p_cbg")
    if not 0 <= n <= m:
        raise ValueError(f"n must be in [0, {m}], got {n}")
    return float(
        sum(
            math.comb(m, k) * p_cbg**k * (1.0 - p_cbg) ** (m - k)
            for k in range(n + 1)
        )
    )


def cbg_error_prob_general(cb_probs: Sequence[float]) -> float:
    """CBG error probability for uneven CB error probabilities.

    The group fails as soon as any CB fails: 1 - prod(1 - p_i).
    """
    arr = _as_prob_array(cb_probs)
    return float(1.0 - np.prod(1.0 - arr))


def failed_count_pmf(probs) -> ErrorCountDistribution:
    """Poisson-binomial pmf of the failed-CBG count.

    DP convolution over CBGs: after processing CBG i the vector holds the
    failure-count distribution of the first i groups.  O(M^2) multiplies,
    no factorial bookkeeping.
    """
    arr = _as_prob_array(probs)
    m = arr.size
    pmf = np.zeros(m + 1)
    pmf[0] = 1.0
    for i, p in enumerate(arr, start=1):
        pmf[1 : i + 1] = pmf[1 : i + 1] * (1.0 - p) + pmf[0:i] * p
        pmf[0] *= 1.0 - p
    return ErrorCountDistribution(tuple(pmf))


def exact_n_failed(probs, n: int) -> float:
    """P(exactly n of M independent non-identical CBGs fail)."""
    arr = _as_prob_array(probs)
    if not 0 <= n <= arr.size:
        raise ValueError(f"n must be in [0, {arr.size}], got {n}")
    return failed_count_pmf(arr).pmf[n]


def brute_force_pmf(probs) -> ErrorCountDistribution:
    """Enumerate all 2^M ACK/NACK outcomes and bin them by failure count.

    Independent oracle for the DP and closed-form paths; M is capped at
    ENUMERATION_LIMIT because the outcome space doubles per CBG.
    """
    arr = _as_prob_array(probs)
    m = arr.size
    if m > ENUMERATION_LIMIT:
        raise ValueError(
            f"enumeration over 2^{m} outcomes exceeds the limit of "
            f"2^{ENUMERATION_LIMIT}"
        )
    fail = arr.tolist()
    ok = [1.0 - p for p in fail]
    totals = [0.0] * (m + 1)
    for mask in range(1 << m):
        pr = 1.0
        for i in range(m):
            pr *= fail[i] if (mask >> i) & 1 else ok[i]
        totals[mask.bit_count()] += pr
    return ErrorCountDistribution(tuple(totals))


def brute_force_n_failed(probs, n: int) -> float:
    arr = _as_prob_array(probs)
    if not 0 <= n <= arr.size:
        raise ValueError(f"n must be in [0, {arr.size}], got {n}")
    return brute_force_pmf(arr).pmf[n]


def odds(p: float) -> float:
    """Odds ratio p / (1 - p); rejects p = 1 rather than saturating.

    Callers should clamp raw CB error probabilities to
    [PROB_CLAMP_EPS, 1 - PROB_CLAMP_EPS] before converting.
    """
    _check_prob(p, "p")
    if p >= 1.0:
        raise ValueError("odds ratio is infinite at p = 1")
    return p / (1.0 - p)


def prob_from_odds(o: float) -> float:
    if o < 0.0 or not math.isfinite(o):
        raise ValueError(f"odds must be finite and non-negative, got {o!r}")
    return o / (1.0 + o)


def _elementary_symmetric(s1: float, s2: float, s3: float, n: int) -> float:
    # Newton's identities for the first three elementary symmetric
    # polynomials from power sums.
    if n == 0:
        return 1.0
    if n == 1:
        return s1
    if n == 2:
        return (s1 * s1 - s2) / 2.0
    return (s1**3 - 3.0 * s1 * s2 + 2.0 * s3) / 6.0


def closed_form_n_failed(odds_vec, n: int) -> float:
    """Closed-form P(exactly n failed CBGs) from the odds vector, n <= 3.

    Evaluates prod_m 1/(1+O_m) times the n-th elementary symmetric
    polynomial of the odds, with the polynomial computed from power sums,
    so the multiplication cost grows linearly in M instead of
    combinatorially.  n > 3 is unsupported here; use failed_count_pmf for
    the general count.
    """
    if isinstance(odds_vec, OddsVector):
        arr = np.asarray(odds_vec.odds, dtype=float)
    else:
        arr = np.asarray(odds_vec, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("odds vector must be a nonempty 1-d sequence")
        if np.any(arr < 0.0) or not np.all(np.isfinite(arr)):
            raise ValueError("odds must be finite and non-negative")
    if n > 3:
        raise ValueError("closed forms cover n in {0, 1, 2, 3} only")
    if not 0 <= n <= arr.size:
        raise ValueError(f"n must be in [0, {arr.size}], got {n}")
    survival = float(np.prod(1.0 / (1.0 + arr)))
    s1 = float(np.sum(arr))
    s2 = float(np.sum(arr * arr))
    s3 = float(np.sum(arr * arr * arr))
    return survival * _elementary_symmetric(s1, s2, s3, n)


def correlated_pmf(model: CorrelatedModel, n: int) -> float:
    """Pmf at n for the correlated mixture model.

    (1 - rho) puts weight on the independent binomial law, rho on the
    all-or-nothing law with mass (1-p) at 0 failures and p at M failures.
    """
    if not 0 <= n <= model.m:
        raise ValueError(f"n must be in [0, {model.m}], got {n}")
    binom_term = (
        math.comb(model.m, n) * model.p**n * (1.0 - model.p) ** (model.m - n)
    )
    if n == 0:
        all_or_nothing = 1.0 - model.p
    elif n == model.m:
        all_or_nothing = model.p
    else:
        all_or_nothing = 0.0
    return (1.0 - model.rho) * binom_term + model.rho * all_or_nothing


def correlated_distribution(model: CorrelatedModel) -> ErrorCountDistribution:
    return ErrorCountDistribution(
        tuple(correlated_pmf(model, n) for n in range(model.m + 1))
    )

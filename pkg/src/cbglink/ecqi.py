"""Enhanced CQI: MCS index selection from per-CB channel quality.

The baseline CQI picks the highest MCS whose predicted TB error
probability stays under a target.  The enhanced scheme instead picks the
highest MCS such that at most (or exactly) a configured number of CBGs
fail with at least a configured probability, evaluated through the
failed-CBG probability core.

Probability evaluations carry a multiplication counter so the direct
(combinatorial) and closed-form (odds ratio) paths can be compared
against their analytical operation counts, and the MCS search strategies
(linear, binary, relaxed-threshold) report how many indices they
visited.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .linkmap import CbSinrProfile, McsEntry, McsTable, bler, cbg_error_probs_for_entry
from .probability import MAX_CBGS, PROB_CLAMP_EPS, odds

logger = logging.getLogger(__name__)

__all__ = [
    "SearchStats",
    "EcqiConfig",
    "EcqiResult",
    "MultCounter",
    "baseline_cqi",
    "ecqi",
    "search_binary",
    "search_linear",
    "search_relaxed",
    "closed_form_counted",
    "direct_counted",
    "pmf_counted",
    "complexity_direct",
    "complexity_closed",
]

SEARCH_METHODS = ("linear_asc", "linear_desc", "binary", "relaxed")
PROB_PATHS = ("closed", "direct", "exact")
MODES = ("at_most", "exactly")


class MultCounter:
    """Counts scalar multiplications performed through it."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0

    def mul(self, a: float, b: float) -> float:
        self.count += 1
        return a * b


@dataclass
class SearchStats:
    """Per-call cost of an eCQI computation."""

    mcs_evaluations: int = 0
    multiplications: int = 0


@dataclass(frozen=True)
class EcqiConfig:
    """Knobs for the enhanced CQI computation.

    max_failed is the tolerated failed-CBG count, target_prob the
    required probability of staying within it.  max_cbgs is the RRC-style
    cap on groups per TB.  relax_tolerance widens the acceptance
    threshold for the relaxed search.
    """

    max_failed: int = 4
    max_cbgs: int = 8
    target_prob: float = 0.5
    mode: str = "at_most"
    search: str = "binary"
    relax_tolerance: float = 0.0
    prob_path: str = "closed"
    validate_monotone: bool = False

    def __post_init__(self):
        if self.max_cbgs not in (2, 4, 6, 8):
            raise ValueError(f"max CBGs per TB must be one of 2/4/6/8, got {self.max_cbgs}")
        if not 0 <= self.max_failed <= self.max_cbgs:
            raise ValueError("N exceeds M: max_failed must be in [0, max_cbgs]")
        if not 0.0 < self.target_prob < 1.0:
            raise ValueError(f"target probability must be in (0, 1), got {self.target_prob}")
        if self.relax_tolerance < 0.0:
            raise ValueError("relax tolerance must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.search not in SEARCH_METHODS:
            raise ValueError(f"search must be one of {SEARCH_METHODS}, got {self.search!r}")
        if self.prob_path not in PROB_PATHS:
            raise ValueError(f"prob_path must be one of {PROB_PATHS}, got {self.prob_path!r}")


@dataclass
class EcqiResult:
    index: int
    out_of_range: bool
    stats: SearchStats = field(default_factory=SearchStats)


def baseline_cqi(
    wideband_sinr_db: float,
    table: McsTable,
    target_tbep: float = 0.1,
    num_cbs: int = 1,
) -> int:
    """Largest MCS index whose predicted TBEP stays under the target.

    The TBEP is the per-block BLER at the wideband SINR raised through
    1 - (1 - p)^num_cbs.  Index 0 doubles as the out-of-range sentinel
    when not even the most robust entry qualifies.
    """
    if num_cbs < 1:
        raise ValueError(f"num_cbs must be >= 1, got {num_cbs}")
    for r in reversed(range(len(table))):
        p_block = bler(wideband_sinr_db, table[r])
        tbep = 1.0 - (1.0 - p_block) ** num_cbs
        if tbep < target_tbep:
            return r
    return 0


# --- counted probability evaluators -------------------------------------
#
# Counted multiplications follow the published per-case convention: the
# survival product and each power sum cost M, scalar coefficients and the
# final scale by the survival product are free.


def closed_form_counted(odds_arr, n: int, counter: MultCounter) -> float:
    """P(exactly n failed) via the odds closed form, counting multiplies.

    Costs M, M, 2M+1 and 3M+3 counted multiplications for n = 0..3.
    """
    arr = np.asarray(odds_arr, dtype=float)
    if n > 3:
        raise ValueError("closed forms cover n in {0, 1, 2, 3} only")
    if not 0 <= n <= arr.size:
        raise ValueError(f"n must be in [0, {arr.size}], got {n}")
    survival = 1.0
    for o in arr:
        survival = counter.mul(survival, 1.0 / (1.0 + o))
    if n == 0:
        return survival
    s1 = float(np.sum(arr))
    if n == 1:
        return survival * s1
    squares = [counter.mul(o, o) for o in arr]
    s2 = sum(squares)
    if n == 2:
        s1_sq = counter.mul(s1, s1)
        return survival * (s1_sq - s2) / 2.0
    cubes = [counter.mul(sq, o) for sq, o in zip(squares, arr)]
    s3 = sum(cubes)
    s1_sq = counter.mul(s1, s1)
    s1_cube = counter.mul(s1_sq, s1)
    s1_s2 = counter.mul(s1, s2)
    return survival * (s1_cube - 3.0 * s1_s2 + 2.0 * s3) / 6.0


def direct_counted(probs, n: int, counter: MultCounter) -> float:
    """P(exactly n failed) by literal failure-subset summation.

    The n = 1 loop seeds its accumulator with the failure probability
    itself, landing on the published M(M-1) count; larger n seed with
    one, giving M * C(M, n).
    """
    arr = np.asarray(probs, dtype=float)
    m = arr.size
    if not 0 <= n <= m:
        raise ValueError(f"n must be in [0, {m}], got {n}")
    fail = arr.tolist()
    ok = [1.0 - p for p in fail]
    if n == 0:
        acc = 1.0
        for q in ok:
            acc = counter.mul(acc, q)
        return acc
    if n == 1:
        total = 0.0
        for i in range(m):
            acc = fail[i]
            for j in range(m):
                if j != i:
                    acc = counter.mul(acc, ok[j])
            total += acc
        return total
    total = 0.0
    for subset in itertools.combinations(range(m), n):
        chosen = set(subset)
        acc = 1.0
        for i in subset:
            acc = counter.mul(acc, fail[i])
        for j in range(m):
            if j not in chosen:
                acc = counter.mul(acc, ok[j])
        total += acc
    return total


def pmf_counted(probs, counter: MultCounter) -> list:
    """Counted Poisson-binomial pmf; the general path for any n."""
    arr = np.asarray(probs, dtype=float)
    pmf = [1.0]
    for p in arr:
        q = 1.0 - p
        nxt = [counter.mul(pmf[0], q)]
        for k in range(1, len(pmf)):
            nxt.append(counter.mul(pmf[k], q) + counter.mul(pmf[k - 1], p))
        nxt.append(counter.mul(pmf[-1], p))
        pmf = nxt
    return pmf


def complexity_direct(m: int, n: int) -> int:
    """Multiplication count of the literal subset-sum evaluation.

    M(M-1) at n = 1, M * C(M, n) otherwise, mirroring direct_counted.
    """
    if not 0 <= n <= m:
        raise ValueError(f"n must be in [0, {m}], got {n}")
    if n == 1:
        return m * (m - 1)
    return m * math.comb(m, n)


def complexity_closed(m: int, n: int) -> int:
    """Multiplication count of the closed-form path for n in {1, 2, 3}."""
    if n not in (1, 2, 3):
        raise ValueError(f"closed-form counts defined for n in 1..3, got {n}")
    if n > m:
        raise ValueError(f"n must be <= m, got n={n}, m={m}")
    return {1: m, 2: 2 * m + 1, 3: 3 * m + 3}[n]


# --- searches ------------------------------------------------------------


def search_binary(qualifies: Callable[[int], bool], size: int) -> Optional[int]:
    """Largest index satisfying a prefix-true predicate, by bisection.

    Uses at most ceil(log2 size) + 1 predicate evaluations.  On a
    non-monotone predicate the returned index still qualifies but may
    not be maximal.
    """
    lo, hi = 0, size - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        if qualifies(mid):
            best = mid
            lo = mid + 1
        else:
            hi = mid - 1
    return best


def search_linear(
    qualifies: Callable[[int], bool], size: int, ascending: bool = True
) -> Optional[int]:
    """Linear scan for the largest qualifying index.

    The ascending variant stops at the first failure, which is exact
    only for prefix-true predicates; the descending variant stops at the
    first success and is exact for any predicate's largest qualifier
    when the predicate is prefix-true.
    """
    if ascending:
        best = None
        for r in range(size):
            if qualifies(r):
                best = r
            else:
                break
        return best
    for r in reversed(range(size)):
        if qualifies(r):
            return r
    return None


def search_relaxed(
    q_value: Callable[[int], float], size: int, target: float, tolerance: float
) -> Optional[int]:
    """Descending scan accepting the first index within the widened
    threshold target - tolerance.  With tolerance 0 this reduces to the
    strict search."""
    for r in reversed(range(size)):
        if q_value(r) >= target - tolerance:
            return r
    return None


# --- the eCQI computation -------------------------------------------------


def _prob_exactly(cbg_probs, n: int, path: str, counter: MultCounter) -> float:
    if path == "direct":
        return direct_counted(cbg_probs, n, counter)
    if path == "closed" and n <= 3:
        odds_arr = [odds(min(p, 1.0 - PROB_CLAMP_EPS)) for p in cbg_probs]
        return closed_form_counted(odds_arr, n, counter)
    return pmf_counted(cbg_probs, counter)[n]


def evaluate_q(cbg_probs, cfg: EcqiConfig, n_eff: int, counter: MultCounter) -> float:
    """The per-MCS acceptance metric Q.

    "exactly" mode uses P(n failed); "at_most" mode the cumulative
    P(<= n failed).
    """
    if cfg.mode == "exactly":
        return _prob_exactly(cbg_probs, n_eff, cfg.prob_path, counter)
    if cfg.prob_path == "exact" or (cfg.prob_path == "closed" and n_eff > 3):
        pmf = pmf_counted(cbg_probs, counter)
        return float(sum(pmf[: n_eff + 1]))
    return float(
        sum(_prob_exactly(cbg_probs, i, cfg.prob_path, counter) for i in range(n_eff + 1))
    )


def ecqi(profile: CbSinrProfile, table: McsTable, cfg: EcqiConfig) -> EcqiResult:
    """Highest MCS index whose Q metric reaches the target probability.

    Q is non-increasing in the MCS index for any midpoint-ordered BLER
    family, which is what the binary and early-exit linear searches rely
    on; enable cfg.validate_monotone to scan for violations and fall
    back to an exhaustive descending scan.
    """
    m = profile.num_cbgs
    if m > MAX_CBGS:
        raise ValueError(f"profile has {m} CBGs, max is {MAX_CBGS}")
    if cfg.max_failed > m:
        raise ValueError(f"N exceeds M: max_failed={cfg.max_failed} with {m} CBGs")
    n_eff = cfg.max_failed
    counter = MultCounter()
    stats = SearchStats()
    size = len(table)
    cache: dict = {}

    def q(r: int) -> float:
        if r not in cache:
            stats.mcs_evaluations += 1
            cbg_probs = cbg_error_probs_for_entry(profile, table[r])
            cache[r] = evaluate_q(cbg_probs, cfg, n_eff, counter)
        return cache[r]

    search = cfg.search
    if cfg.validate_monotone:
        values = [q(r) for r in range(size)]
        if any(a < b - 1e-12 for a, b in zip(values, values[1:])):
            logger.warning("Q metric not monotone over MCS indices; using linear_desc")
            search = "linear_desc"

    qualifies = lambda r: q(r) >= cfg.target_prob
    if search == "binary":
        idx = search_binary(qualifies, size)
    elif search == "linear_asc":
        idx = search_linear(qualifies, size, ascending=True)
    elif search == "linear_desc":
        idx = search_linear(qualifies, size, ascending=False)
    else:
        idx = search_relaxed(q, size, cfg.target_prob, cfg.relax_tolerance)

    stats.multiplications = counter.count
    if idx is None:
        return EcqiResult(index=0, out_of_range=True, stats=stats)
    return EcqiResult(index=idx, out_of_range=False, stats=stats)

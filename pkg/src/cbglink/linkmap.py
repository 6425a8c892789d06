"""Radio-quality to error-probability mapping.

Holds the MCS table with a two-parameter logistic BLER curve per entry,
effective-SINR aggregation (exponential ESM and a mutual-information
average over configurable per-modulation curves), and the code-block to
code-block-group layout rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .probability import PROB_CLAMP_EPS

__all__ = [
    "McsEntry",
    "McsTable",
    "CbSinrProfile",
    "Eesm",
    "Mmib",
    "bler",
    "effective_sinr",
    "cb_error_probs",
    "cbg_error_probs_for_entry",
    "cbg_sizes",
    "cbg_groups",
    "default_mcs_table",
    "db_to_linear",
    "linear_to_db",
]


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x_lin):
    return 10.0 * np.log10(np.maximum(np.asarray(x_lin, dtype=float), 1e-30))


@dataclass(frozen=True)
class McsEntry:
    """One modulation-and-coding-scheme row.

    bler_midpoint_db is the SINR at which the logistic BLER curve crosses
    0.5; bler_slope_db controls its steepness (per dB).
    """

    index: int
    modulation_order: int
    code_rate: float
    spectral_efficiency: float
    bler_midpoint_db: float
    bler_slope_db: float = 2.0

    def __post_init__(self):
        if self.modulation_order not in (2, 4, 6, 8):
            raise ValueError(f"modulation order must be 2/4/6/8, got {self.modulation_order}")
        if not 0.0 < self.code_rate < 1.0:
            raise ValueError(f"code rate must be in (0, 1), got {self.code_rate}")
        if self.bler_slope_db <= 0.0:
            raise ValueError("bler slope must be positive")

    def sinr_for_bler(self, target: float) -> float:
        """SINR (dB) at which this entry's BLER equals target."""
        if not 0.0 < target < 1.0:
            raise ValueError(f"target BLER must be in (0, 1), got {target}")
        return self.bler_midpoint_db + math.log(1.0 / target - 1.0) / self.bler_slope_db


def bler(sinr_db: float, entry: McsEntry) -> float:
    """Block error probability at a given SINR: logistic in dB.

    Strictly decreasing in SINR; equals 0.5 at the entry midpoint.
    """
    x = entry.bler_slope_db * (sinr_db - entry.bler_midpoint_db)
    # guard exp overflow far from the midpoint
    if x < -700.0:
        return 1.0
    if x > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(x))


class McsTable:
    """Ordered MCS list, validated once and immutable afterwards."""

    def __init__(self, entries: Sequence[McsEntry]):
        entries = tuple(entries)
        if len(entries) < 2:
            raise ValueError("MCS table needs at least 2 entries")
        for i, e in enumerate(entries):
            if e.index != i:
                raise ValueError(f"entry {i} has index {e.index}; indices must be contiguous from 0")
        for a, b in zip(entries, entries[1:]):
            if not a.spectral_efficiency < b.spectral_efficiency:
                raise ValueError("spectral efficiency must be strictly increasing")
            if not a.bler_midpoint_db < b.bler_midpoint_db:
                raise ValueError("BLER midpoints must be strictly increasing")
        self.entries = entries
        self._validate_bler_ordering()

    def _validate_bler_ordering(self):
        # higher MCS may never have lower BLER at the same SINR
        grid = np.arange(-30.0, 70.0, 1.0)
        for a, b in zip(self.entries, self.entries[1:]):
            for g in grid:
                if bler(g, a) > bler(g, b) + 1e-12:
                    raise ValueError(
                        f"BLER ordering violated between MCS {a.index} and {b.index} at {g} dB"
                    )

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, index: int) -> McsEntry:
        return self.entries[index]

    def __iter__(self):
        return iter(self.entries)

    def midpoint_step_db(self) -> float:
        """Mean midpoint spacing; the dB width of one index step."""
        mids = [e.bler_midpoint_db for e in self.entries]
        return float(np.mean(np.diff(mids)))


_DEFAULT_RATES = {
    2: (0.08, 0.12, 0.19, 0.30, 0.44, 0.59),
    4: (0.33, 0.37, 0.42, 0.48, 0.54, 0.60),
    6: (0.43, 0.46, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75),
    8: (0.58, 0.63, 0.67, 0.72, 0.76, 0.81, 0.85, 0.93),
}


def default_mcs_table(
    midpoint_start_db: float = -5.0,
    midpoint_step_db: float = 1.9,
    slope_db: float = 2.0,
) -> McsTable:
    """28-entry table from QPSK rate 0.08 up to 256QAM rate 0.93.

    Midpoints are evenly spaced placeholders (the true link-level curves
    are deployment specific); swap in calibrated values through the
    configuration file when available.
    """
    entries = []
    idx = 0
    for qm in (2, 4, 6, 8):
        for rate in _DEFAULT_RATES[qm]:
            entries.append(
                McsEntry(
                    index=idx,
                    modulation_order=qm,
                    code_rate=rate,
                    spectral_efficiency=qm * rate,
                    bler_midpoint_db=midpoint_start_db + idx * midpoint_step_db,
                    bler_slope_db=slope_db,
                )
            )
            idx += 1
    return McsTable(entries)


@dataclass(frozen=True)
class Eesm:
    """Exponential effective-SINR mapping with tuning parameter beta."""

    beta: float = 1.0

    def __post_init__(self):
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")

    def combine(self, sinr_linear: np.ndarray) -> float:
        return float(-self.beta * np.log(np.mean(np.exp(-sinr_linear / self.beta))))


@dataclass(frozen=True)
class Mmib:
    """Mean-mutual-information-per-bit effective SINR.

    Maps each sample to per-bit mutual information through a monotone
    piecewise-linear table (sinr_db -> mi in [0, 1]), averages, and
    inverts the table.  Inputs must fall inside the table's SINR span for
    the inversion to be faithful.
    """

    sinr_db: tuple
    mi: tuple

    def __post_init__(self):
        object.__setattr__(self, "sinr_db", tuple(float(x) for x in self.sinr_db))
        object.__setattr__(self, "mi", tuple(float(x) for x in self.mi))
        if len(self.sinr_db) != len(self.mi) or len(self.mi) < 2:
            raise ValueError("MI table needs >= 2 (sinr_db, mi) pairs of equal length")
        if any(b <= a for a, b in zip(self.sinr_db, self.sinr_db[1:])):
            raise ValueError("MI table SINR knots must be strictly increasing")
        if any(b <= a for a, b in zip(self.mi, self.mi[1:])):
            raise ValueError("MI table values must be strictly increasing")
        if self.mi[0] < 0.0 or self.mi[-1] > 1.0:
            raise ValueError("per-bit MI must stay within [0, 1]")

    def combine(self, sinr_linear: np.ndarray) -> float:
        x_db = linear_to_db(sinr_linear)
        mi = np.interp(x_db, self.sinr_db, self.mi)
        mean_mi = float(np.mean(mi))
        out_db = float(np.interp(mean_mi, self.mi, self.sinr_db))
        return float(db_to_linear(out_db))


def effective_sinr(per_re_sinr_linear, method) -> float:
    """Aggregate per-RE linear SINRs into one effective linear SINR."""
    arr = np.asarray(per_re_sinr_linear, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("SINR list must be a nonempty 1-d sequence")
    if np.any(arr < 0.0):
        raise ValueError("linear SINR values must be non-negative")
    return method.combine(arr)


def cbg_sizes(num_cbs: int, num_cbgs: int) -> list:
    """Balanced group sizes: the first (C mod M) groups take one extra CB."""
    if num_cbs < 1 or num_cbgs < 1 or num_cbgs > num_cbs:
        raise ValueError(f"need 1 <= M <= C, got C={num_cbs}, M={num_cbgs}")
    base, extra = divmod(num_cbs, num_cbgs)
    return [base + 1] * extra + [base] * (num_cbgs - extra)


def cbg_groups(num_cbs: int, num_cbgs: int) -> tuple:
    """CB index tuples per CBG, contiguous in CB order."""
    groups = []
    start = 0
    for size in cbg_sizes(num_cbs, num_cbgs):
        groups.append(tuple(range(start, start + size)))
        start += size
    return tuple(groups)


@dataclass(frozen=True)
class CbSinrProfile:
    """Per-CB effective SINR (dB) plus the CB-to-CBG grouping."""

    per_cb_sinr_db: tuple
    groups: tuple

    def __post_init__(self):
        object.__setattr__(
            self, "per_cb_sinr_db", tuple(float(x) for x in self.per_cb_sinr_db)
        )
        object.__setattr__(
            self, "groups", tuple(tuple(int(i) for i in g) for g in self.groups)
        )
        covered = [i for g in self.groups for i in g]
        if sorted(covered) != list(range(len(self.per_cb_sinr_db))):
            raise ValueError("grouping must cover every CB exactly once")
        sizes = [len(g) for g in self.groups]
        if not sizes or max(sizes) - min(sizes) > 1:
            raise ValueError("group sizes may differ by at most 1")

    @classmethod
    def from_cb_sinr(cls, per_cb_sinr_db, num_cbgs: int) -> "CbSinrProfile":
        sinrs = tuple(float(x) for x in per_cb_sinr_db)
        return cls(sinrs, cbg_groups(len(sinrs), num_cbgs))

    @property
    def num_cbs(self) -> int:
        return len(self.per_cb_sinr_db)

    @property
    def num_cbgs(self) -> int:
        return len(self.groups)


def cb_error_probs(profile: CbSinrProfile, entry: McsEntry) -> np.ndarray:
    """Per-CB error probabilities, clamped away from exact 0 and 1."""
    probs = np.array([bler(s, entry) for s in profile.per_cb_sinr_db])
    return np.clip(probs, PROB_CLAMP_EPS, 1.0 - PROB_CLAMP_EPS)


def cbg_error_probs_for_entry(profile: CbSinrProfile, entry: McsEntry) -> np.ndarray:
    """Per-CBG error probabilities: a group fails if any of its CBs fails."""
    cb_probs = cb_error_probs(profile, entry)
    out = np.empty(profile.num_cbgs)
    for k, group in enumerate(profile.groups):
        out[k] = 1.0 - np.prod(1.0 - cb_probs[list(group)])
    return np.clip(out, PROB_CLAMP_EPS, 1.0 - PROB_CLAMP_EPS)

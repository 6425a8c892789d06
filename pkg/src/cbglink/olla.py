"""Outer-loop link adaptation offsets driven by HARQ feedback.

The offset (dB) is added on top of the reported channel quality before
MCS selection: it steps up on negative feedback (more conservative) and
down on positive feedback, with the step ratio pinning the long-run
error rate to the target.  The TB variant consumes one ACK/NACK per
transport block; the CBG variant applies the same rule to every CBG bit
of the multi-bit feedback, steering the fraction of failed CBGs instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

__all__ = ["OllaParams", "tb_olla_step", "cbg_eolla_step", "update_offset"]

OFFSET_MIN_DB = -25.0
OFFSET_MAX_DB = 15.0


@dataclass(frozen=True)
class OllaParams:
    """Step sizes and clamp range for one outer loop.

    step_down_db is derived from the target so that the zero-drift point
    of the offset random walk sits exactly at the target error rate:
    target * step_up = (1 - target) * step_down.
    """

    target: float = 0.1
    step_up_db: float = 0.5
    min_db: float = OFFSET_MIN_DB
    max_db: float = OFFSET_MAX_DB

    def __post_init__(self):
        if not 0.0 < self.target < 1.0:
            raise ValueError(f"target must be in (0, 1), got {self.target}")
        if self.step_up_db <= 0.0:
            raise ValueError("step_up_db must be positive")
        if self.min_db >= self.max_db:
            raise ValueError("offset clamp range is empty")

    @property
    def step_down_db(self) -> float:
        return self.step_up_db * self.target / (1.0 - self.target)


def _clamp(offset: float, params: OllaParams) -> float:
    return min(max(offset, params.min_db), params.max_db)


def tb_olla_step(offset_db: float, tb_ack: bool, params: OllaParams) -> float:
    """One TB-level update: down on ACK, up on NACK, clamped."""
    if tb_ack:
        return _clamp(offset_db - params.step_down_db, params)
    return _clamp(offset_db + params.step_up_db, params)


def cbg_eolla_step(
    offset_db: float, cbg_acks: Sequence[bool], params: OllaParams
) -> float:
    """Per-CBG updates for one multi-bit feedback report, clamped."""
    for ack in cbg_acks:
        offset_db = tb_olla_step(offset_db, ack, params)
    return offset_db


def update_offset(
    offset_db: float, ack_bits: Sequence[bool], mode: str, params: OllaParams
) -> float:
    """Dispatch on loop flavor; 'tb_olla' reduces the bits to a single
    TB verdict (all groups decoded), 'cbg_eolla' consumes them one by
    one."""
    if mode == "tb_olla":
        return tb_olla_step(offset_db, all(ack_bits), params)
    if mode == "cbg_eolla":
        return cbg_eolla_step(offset_db, ack_bits, params)
    raise ValueError(f"unknown OLLA mode {mode!r}")

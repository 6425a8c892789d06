"""XR downlink traffic: quasi-periodic video frames with jittered
arrivals and truncated-Gaussian sizes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "TruncGaussianParams",
    "XrPacket",
    "sample_trunc_gaussian",
    "generate_traffic",
]


@dataclass(frozen=True)
class TruncGaussianParams:
    """Parameters of a truncated Gaussian, in the units of the sampled
    quantity."""

    mean: float
    std: float
    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"lower bound {self.lower} exceeds upper {self.upper}")
        if self.std <= 0.0:
            raise ValueError(f"std must be positive, got {self.std}")


def sample_trunc_gaussian(params: TruncGaussianParams, rng: np.random.Generator) -> float:
    """One truncated-Gaussian draw by inverse-CDF transform."""
    lo = ndtr((params.lower - params.mean) / params.std)
    hi = ndtr((params.upper - params.mean) / params.std)
    u = rng.uniform(lo, hi)
    value = params.mean + params.std * float(ndtri(u))
    # inverse transform can graze the bounds by a float ulp
    return float(min(max(value, params.lower), params.upper))


@dataclass
class XrPacket:
    """One XR video frame as seen by the scheduler."""

    frame_index: int
    arrival_ms: float
    size_bits: int
    remaining_bits: int
    deadline_ms: Optional[float] = None


def generate_traffic(
    fps: float,
    jitter: TruncGaussianParams,
    size: TruncGaussianParams,
    horizon_ms: float,
    rng: np.random.Generator,
    pdb_ms: Optional[float] = None,
    size_unit_bits: float = 8000.0,
) -> List[XrPacket]:
    """Frames on the nominal grid f * 1000/fps plus jitter.

    Frame f (from 1) is included while its nominal time stays within the
    horizon, so the count is deterministic regardless of jitter.  Sizes
    are sampled in the units of `size` and scaled by size_unit_bits
    (default: kilobytes to bits).
    """
    if fps <= 0.0:
        raise ValueError(f"frame rate must be positive, got {fps}")
    period_ms = 1000.0 / fps
    packets = []
    f = 1
    while f * period_ms <= horizon_ms + 1e-9:
        arrival = f * period_ms + sample_trunc_gaussian(jitter, rng)
        bits = int(round(sample_trunc_gaussian(size, rng) * size_unit_bits))
        packets.append(
            XrPacket(
                frame_index=f,
                arrival_ms=arrival,
                size_bits=bits,
                remaining_bits=bits,
                deadline_ms=None if pdb_ms is None else arrival + pdb_ms,
            )
        )
        f += 1
    return packets

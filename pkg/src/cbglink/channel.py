"""Simplified multi-cell downlink radio channel.

Distance pathloss with an indoor-hotspot-style exponent, static
log-normal shadowing per UE-cell link, and per-PRB Rayleigh block fading
evolved as a first-order autoregressive process whose coefficient
follows from the Doppler spread at the configured UE speed.  Interference
on a PRB comes from the neighbor cells that used that PRB in their
previous downlink slot.

All 12 resource elements of a PRB share the PRB's fading state, so
per-PRB SINR doubles as the per-RE SINR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import j0

__all__ = ["ChannelParams", "ChannelModel", "line_topology", "drop_ues"]

THERMAL_NOISE_DBM_HZ = -174.0
SUBCARRIERS_PER_PRB = 12


@dataclass(frozen=True)
class ChannelParams:
    tx_power_dbm: float = 31.0
    pathloss_ref_db: float = 44.4  # at 1 m, carrier term included
    pathloss_exp_db: float = 17.3  # dB per decade of distance
    shadowing_std_db: float = 3.0
    noise_figure_db: float = 7.0
    subcarrier_khz: float = 30.0
    speed_kmh: float = 3.0
    carrier_ghz: float = 4.0
    slot_ms: float = 0.5
    ar_coeff: Optional[float] = None  # None: derive from Doppler

    def fading_ar_coefficient(self) -> float:
        if self.ar_coeff is not None:
            if not 0.0 <= self.ar_coeff < 1.0:
                raise ValueError("AR coefficient must be in [0, 1)")
            return self.ar_coeff
        doppler_hz = (self.speed_kmh / 3.6) / 3.0e8 * (self.carrier_ghz * 1e9)
        return float(j0(2.0 * math.pi * doppler_hz * self.slot_ms * 1e-3))

    def noise_per_prb_dbm(self) -> float:
        bw_hz = SUBCARRIERS_PER_PRB * self.subcarrier_khz * 1e3
        return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bw_hz) + self.noise_figure_db

    def pathloss_db(self, distance_m) -> np.ndarray:
        d = np.maximum(np.asarray(distance_m, dtype=float), 1.0)
        return self.pathloss_ref_db + self.pathloss_exp_db * np.log10(d)


def line_topology(n_cells: int, inter_site_distance_m: float) -> np.ndarray:
    """Cell positions on a line, one row (x, y) per cell."""
    xs = np.arange(n_cells) * inter_site_distance_m
    return np.column_stack([xs, np.zeros(n_cells)])


def drop_ues(
    cell_positions: np.ndarray,
    ues_per_cell: int,
    inter_site_distance_m: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Uniform UE drop in a strip around each cell, (x, y) per UE."""
    half = inter_site_distance_m / 2.0
    positions = []
    for cx, _cy in cell_positions:
        x = rng.uniform(cx - half, cx + half, size=ues_per_cell)
        y = rng.uniform(2.0, 15.0, size=ues_per_cell)
        positions.append(np.column_stack([x, y]))
    return np.concatenate(positions, axis=0)


class ChannelModel:
    """Per-(UE, cell, PRB) link state with AR(1) Rayleigh fading."""

    def __init__(
        self,
        cell_positions: np.ndarray,
        ue_positions: np.ndarray,
        n_prb: int,
        params: ChannelParams,
        rng: np.random.Generator,
    ):
        self.params = params
        self.n_cells = len(cell_positions)
        self.n_ues = len(ue_positions)
        self.n_prb = n_prb
        self.rng = rng

        deltas = ue_positions[:, None, :] - cell_positions[None, :, :]
        distances = np.linalg.norm(deltas, axis=2)
        shadowing = rng.normal(0.0, params.shadowing_std_db, size=distances.shape)
        tx_per_prb_dbm = params.tx_power_dbm - 10.0 * math.log10(n_prb)
        rx_dbm = tx_per_prb_dbm - params.pathloss_db(distances) - shadowing
        self.mean_rx_lin = 10.0 ** (rx_dbm / 10.0)  # (ue, cell) mW
        self.serving = np.argmax(self.mean_rx_lin, axis=1)
        self.noise_lin = 10.0 ** (params.noise_per_prb_dbm() / 10.0)

        self.ar = params.fading_ar_coefficient()
        self._innovation_scale = math.sqrt(max(1.0 - self.ar**2, 0.0))
        self.h = self._draw_fading()

    def _draw_fading(self) -> np.ndarray:
        shape = (self.n_ues, self.n_cells, self.n_prb)
        return (
            self.rng.standard_normal(shape) + 1j * self.rng.standard_normal(shape)
        ) / math.sqrt(2.0)

    def step(self):
        """Advance the fading one slot."""
        self.h = self.ar * self.h + self._innovation_scale * self._draw_fading()

    def rx_power_lin(self) -> np.ndarray:
        """Instantaneous (ue, cell, prb) received power, mW per PRB."""
        return self.mean_rx_lin[:, :, None] * np.abs(self.h) ** 2

    def sinr_matrix(self, prev_usage: np.ndarray) -> np.ndarray:
        """Linear SINR per (ue, prb) toward each UE's serving cell.

        prev_usage is a (cell, prb) 0/1 map of the previous downlink
        slot; non-serving cells interfere on the PRBs they used.
        """
        rx = self.rx_power_lin()
        idx = np.arange(self.n_ues)
        serving_rx = rx[idx, self.serving, :]
        interference = np.einsum("ucp,cp->up", rx, prev_usage.astype(float))
        interference -= prev_usage[self.serving, :] * serving_rx
        return serving_rx / (interference + self.noise_lin)

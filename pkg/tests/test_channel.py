import math

import numpy as np
import pytest

from cbglink.channel import ChannelModel, ChannelParams, drop_ues, line_topology


def tiny_model(params=None, n_prb=4, seed=0, n_cells=1, isd=20.0, ues_per_cell=1):
    params = params or ChannelParams()
    rng = np.random.default_rng(seed)
    cells = line_topology(n_cells, isd)
    ues = drop_ues(cells, ues_per_cell, isd, rng)
    return ChannelModel(cells, ues, n_prb, params, rng)


class TestChannelParams:
    def test_ar_coefficient_from_doppler(self):
        params = ChannelParams(speed_kmh=3.0, carrier_ghz=4.0, slot_ms=0.5)
        # J0(2 pi * 11.11 Hz * 0.5 ms), frozen
        assert params.fading_ar_coefficient() == pytest.approx(
            0.999695405777371, abs=1e-9
        )

    def test_explicit_ar_override(self):
        assert ChannelParams(ar_coeff=0.9).fading_ar_coefficient() == 0.9
        with pytest.raises(ValueError):
            ChannelParams(ar_coeff=1.5).fading_ar_coefficient()

    def test_noise_per_prb(self):
        params = ChannelParams(noise_figure_db=7.0, subcarrier_khz=30.0)
        expected = -174.0 + 10.0 * math.log10(12 * 30e3) + 7.0
        assert params.noise_per_prb_dbm() == pytest.approx(expected)

    def test_pathloss_monotone(self):
        params = ChannelParams()
        pl = params.pathloss_db([1.0, 10.0, 100.0])
        assert pl[1] - pl[0] == pytest.approx(params.pathloss_exp_db)
        assert pl[2] - pl[1] == pytest.approx(params.pathloss_exp_db)


class TestChannelModel:
    def test_single_cell_snr(self):
        # no pathloss, no shadowing, fading frozen at unit gain:
        # SINR = per-PRB tx power over noise
        params = ChannelParams(
            tx_power_dbm=10.0,
            pathloss_ref_db=0.0,
            pathloss_exp_db=0.0,
            shadowing_std_db=1e-12,
            ar_coeff=0.5,
        )
        model = tiny_model(params, n_prb=4)
        model.h = np.ones_like(model.h)
        sinr = model.sinr_matrix(np.zeros((1, 4)))
        tx_per_prb = 10.0 ** ((10.0 - 10.0 * math.log10(4)) / 10.0)
        expected = tx_per_prb / model.noise_lin
        assert sinr == pytest.approx(np.full((1, 4), expected), rel=1e-9)

    def test_doubling_interferer_power_halves_sinr(self):
        params = ChannelParams(
            tx_power_dbm=60.0,  # interference-limited: noise negligible
            shadowing_std_db=1e-12,
            ar_coeff=0.9,
        )
        model = tiny_model(params, n_prb=2, n_cells=2, ues_per_cell=1, seed=3)
        model.h = np.ones_like(model.h)
        usage = np.ones((2, 2))
        base = model.sinr_matrix(usage).copy()
        # double every non-serving link's mean power
        for ue in range(model.n_ues):
            for cell in range(model.n_cells):
                if cell != model.serving[ue]:
                    model.mean_rx_lin[ue, cell] *= 2.0
        doubled = model.sinr_matrix(usage)
        assert doubled == pytest.approx(base / 2.0, rel=1e-6)

    def test_serving_cell_usage_not_interference(self):
        params = ChannelParams(shadowing_std_db=1e-12, ar_coeff=0.9)
        model = tiny_model(params, n_prb=2, n_cells=1)
        quiet = model.sinr_matrix(np.zeros((1, 2)))
        busy = model.sinr_matrix(np.ones((1, 2)))
        assert busy == pytest.approx(quiet)

    def test_fading_is_unit_power_rayleigh(self):
        model = tiny_model(ChannelParams(ar_coeff=0.3), n_prb=2000)
        power = np.abs(model.h) ** 2
        assert power.mean() == pytest.approx(1.0, rel=0.1)

    def test_ar_autocorrelation(self):
        params = ChannelParams(ar_coeff=0.9)
        model = tiny_model(params, n_prb=16, seed=5)
        steps = 10_000
        trace = np.empty((steps, 16))
        for t in range(steps):
            model.step()
            trace[t] = model.h[0, 0, :].real
        x = trace[:-1].ravel()
        y = trace[1:].ravel()
        corr = np.corrcoef(x, y)[0, 1]
        assert abs(corr - 0.9) < 0.05

    def test_fading_power_preserved_across_steps(self):
        model = tiny_model(ChannelParams(ar_coeff=0.99), n_prb=3000, seed=7)
        for _ in range(50):
            model.step()
        assert (np.abs(model.h) ** 2).mean() == pytest.approx(1.0, rel=0.1)

    def test_serving_is_strongest(self):
        model = tiny_model(n_cells=3, ues_per_cell=4, seed=11)
        for ue in range(model.n_ues):
            assert model.mean_rx_lin[ue, model.serving[ue]] == model.mean_rx_lin[ue].max()

    def test_determinism(self):
        a = tiny_model(n_cells=2, ues_per_cell=2, seed=13)
        b = tiny_model(n_cells=2, ues_per_cell=2, seed=13)
        for _ in range(5):
            a.step()
            b.step()
        assert np.array_equal(a.h, b.h)
        assert np.array_equal(a.mean_rx_lin, b.mean_rx_lin)

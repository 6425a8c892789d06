import itertools
import math

import numpy as np
import pytest

from cbglink.ecqi import (
    EcqiConfig,
    MultCounter,
    baseline_cqi,
    closed_form_counted,
    complexity_closed,
    complexity_direct,
    direct_counted,
    ecqi,
    evaluate_q,
    pmf_counted,
    search_binary,
    search_linear,
    search_relaxed,
)
from cbglink.linkmap import CbSinrProfile, McsEntry, McsTable, bler, default_mcs_table
from cbglink.probability import odds


def enum_oracle(probs, n):
    total = 0.0
    for bits in itertools.product([0, 1], repeat=len(probs)):
        if sum(bits) != n:
            continue
        pr = 1.0
        for b, p in zip(bits, probs):
            pr *= p if b else 1.0 - p
        total += pr
    return total


def small_table(size=16, start=-5.0, step=2.0):
    entries = [
        McsEntry(
            index=i,
            modulation_order=2,
            code_rate=0.05 + 0.05 * i,
            spectral_efficiency=2 * (0.05 + 0.05 * i),
            bler_midpoint_db=start + step * i,
        )
        for i in range(size)
    ]
    return McsTable(entries)


class TestBaselineCqi:
    def test_far_below_table(self):
        table = default_mcs_table()
        assert baseline_cqi(-100.0, table) == 0

    def test_far_above_table(self):
        table = default_mcs_table()
        assert baseline_cqi(1000.0, table) == len(table) - 1

    def test_midpoint_disqualifies_entry(self):
        table = default_mcs_table()
        k = 10
        assert baseline_cqi(table[k].bler_midpoint_db, table) < k

    def test_multi_block_penalty(self):
        # more blocks -> higher TBEP -> never a higher index
        table = default_mcs_table()
        for sinr in (0.0, 10.0, 25.0):
            single = baseline_cqi(sinr, table, num_cbs=1)
            many = baseline_cqi(sinr, table, num_cbs=12)
            assert many <= single


class TestCountedEvaluators:
    def test_closed_counts_match_formula(self):
        rng = np.random.default_rng(31)
        for m in range(2, 9):
            for n in (1, 2, 3):
                if n > m:
                    continue
                probs = rng.uniform(0.01, 0.9, size=m)
                counter = MultCounter()
                closed_form_counted([odds(p) for p in probs], n, counter)
                assert counter.count == complexity_closed(m, n)

    def test_closed_counts_published_values(self):
        assert complexity_closed(8, 1) == 8
        assert complexity_closed(8, 2) == 17
        assert complexity_closed(8, 3) == 27

    def test_closed_count_bounded_by_3nm(self):
        for m in range(2, 9):
            for n in (1, 2, 3):
                if n > m:
                    continue
                assert complexity_closed(m, n) <= 3 * n * m

    def test_direct_counts_match_formula(self):
        rng = np.random.default_rng(37)
        for m in range(2, 9):
            for n in range(0, m + 1):
                probs = rng.uniform(0.01, 0.9, size=m)
                counter = MultCounter()
                direct_counted(probs, n, counter)
                assert counter.count == complexity_direct(m, n)

    def test_direct_counts_published_values(self):
        assert complexity_direct(8, 2) == 224
        assert complexity_direct(8, 1) == 56  # M^2 - M
        assert complexity_direct(5, 0) == 5

    def test_counted_values_match_enumeration(self):
        rng = np.random.default_rng(41)
        for _ in range(50):
            m = int(rng.integers(2, 9))
            probs = rng.uniform(0.01, 0.95, size=m).tolist()
            counter = MultCounter()
            for n in range(m + 1):
                expected = enum_oracle(probs, n)
                assert direct_counted(probs, n, counter) == pytest.approx(
                    expected, abs=1e-12
                )
                if n <= 3:
                    got = closed_form_counted(
                        [odds(p) for p in probs], n, counter
                    )
                    assert got == pytest.approx(expected, abs=1e-12)
                assert pmf_counted(probs, counter)[n] == pytest.approx(
                    expected, abs=1e-12
                )

    def test_complexity_rejects_bad_n(self):
        with pytest.raises(ValueError):
            complexity_direct(4, 5)
        with pytest.raises(ValueError):
            complexity_closed(8, 4)


class TestSearches:
    @staticmethod
    def prefix_true(size, boundary):
        # qualifies for indices 0..boundary-1
        return lambda r: r < boundary

    def test_binary_matches_exhaustive(self):
        rng = np.random.default_rng(43)
        for _ in range(1000):
            size = int(rng.integers(2, 40))
            boundary = int(rng.integers(0, size + 1))
            pred = self.prefix_true(size, boundary)
            expected = boundary - 1 if boundary > 0 else None
            assert search_binary(pred, size) == expected

    def test_binary_evaluation_budget(self):
        for size in (16, 28):
            budget = math.ceil(math.log2(size)) + 1
            for boundary in range(size + 1):
                calls = [0]

                def pred(r):
                    calls[0] += 1
                    return r < boundary

                search_binary(pred, size)
                assert calls[0] <= budget

    def test_linear_variants_agree_on_monotone(self):
        rng = np.random.default_rng(47)
        for _ in range(200):
            size = int(rng.integers(2, 30))
            boundary = int(rng.integers(0, size + 1))
            pred = self.prefix_true(size, boundary)
            asc = search_linear(pred, size, ascending=True)
            desc = search_linear(pred, size, ascending=False)
            assert asc == desc == search_binary(pred, size)

    def test_relaxed_zero_tolerance_is_strict(self):
        rng = np.random.default_rng(53)
        for _ in range(100):
            size = int(rng.integers(2, 30))
            qvals = np.sort(rng.uniform(0, 1, size=size))[::-1]
            target = float(rng.uniform(0, 1))
            strict = search_linear(lambda r: qvals[r] >= target, size, ascending=False)
            relaxed = search_relaxed(lambda r: qvals[r], size, target, 0.0)
            assert strict == relaxed

    def test_relaxed_large_tolerance_first_evaluation(self):
        calls = [0]

        def q(r):
            calls[0] += 1
            return 0.0

        assert search_relaxed(q, 10, 0.5, 10.0) == 9
        assert calls[0] == 1

    def test_relaxed_never_more_evaluations(self):
        rng = np.random.default_rng(59)
        for _ in range(100):
            size = int(rng.integers(2, 30))
            qvals = np.sort(rng.uniform(0, 1, size=size))[::-1]
            target = float(rng.uniform(0.1, 0.9))

            def run(tol):
                calls = [0]

                def q(r):
                    calls[0] += 1
                    return qvals[r]

                search_relaxed(q, size, target, tol)
                return calls[0]

            assert run(0.05) <= run(0.0)


class TestEcqi:
    def flat_profile(self, sinr_db, num_cbs=8, num_cbgs=8):
        return CbSinrProfile.from_cb_sinr([sinr_db] * num_cbs, num_cbgs)

    def test_only_first_qualifies(self):
        table = small_table(size=2, start=0.0, step=30.0)
        profile = self.flat_profile(4.0)
        cfg = EcqiConfig(max_failed=2, target_prob=0.5, search="linear_desc")
        # sanity: Q(0) comfortably above 0.5, Q(1) far below
        counter = MultCounter()
        from cbglink.linkmap import cbg_error_probs_for_entry

        q0 = evaluate_q(cbg_error_probs_for_entry(profile, table[0]), cfg, 2, counter)
        q1 = evaluate_q(cbg_error_probs_for_entry(profile, table[1]), cfg, 2, counter)
        assert q0 >= 0.5 > q1
        result = ecqi(profile, table, cfg)
        assert result.index == 0
        assert not result.out_of_range

    def test_all_qualify(self):
        table = small_table(size=8)
        profile = self.flat_profile(200.0)
        cfg = EcqiConfig(max_failed=2, target_prob=0.5)
        result = ecqi(profile, table, cfg)
        assert result.index == len(table) - 1

    def test_none_qualify_flags_out_of_range(self):
        table = small_table(size=8, start=100.0)
        profile = self.flat_profile(-50.0)
        cfg = EcqiConfig(max_failed=0, target_prob=0.9)
        result = ecqi(profile, table, cfg)
        assert result.index == 0
        assert result.out_of_range

    def test_binary_matches_linear_with_budget(self):
        table = small_table(size=16)
        rng = np.random.default_rng(61)
        budget = math.ceil(math.log2(16)) + 1  # 5
        for _ in range(50):
            base = float(rng.uniform(-10, 40))
            tilt = float(rng.uniform(0, 3))
            sinrs = [base + tilt * i for i in range(8)]
            profile = CbSinrProfile.from_cb_sinr(sinrs, 8)
            cfg_bin = EcqiConfig(max_failed=2, target_prob=0.5, search="binary")
            cfg_lin = EcqiConfig(max_failed=2, target_prob=0.5, search="linear_asc")
            res_bin = ecqi(profile, table, cfg_bin)
            res_lin = ecqi(profile, table, cfg_lin)
            assert res_bin.index == res_lin.index
            assert res_bin.out_of_range == res_lin.out_of_range
            assert res_bin.stats.mcs_evaluations <= budget

    def test_monotone_under_sinr_shift(self):
        table = default_mcs_table()
        rng = np.random.default_rng(67)
        cfg = EcqiConfig(max_failed=2, target_prob=0.5)
        for _ in range(20):
            sinrs = rng.uniform(0, 25, size=8)
            idx_lo = ecqi(CbSinrProfile.from_cb_sinr(sinrs, 8), table, cfg).index
            idx_hi = ecqi(CbSinrProfile.from_cb_sinr(sinrs + 3.0, 8), table, cfg).index
            assert idx_hi >= idx_lo

    def test_generalizes_baseline_single_cbg(self):
        # N=0, P=0.9 on a single-CBG flat profile matches the 10% TBEP rule
        table = default_mcs_table()
        rng = np.random.default_rng(71)
        cfg = EcqiConfig(max_failed=0, target_prob=0.9)
        for _ in range(50):
            sinr = float(rng.uniform(-10, 55))
            profile = CbSinrProfile.from_cb_sinr([sinr], 1)
            assert ecqi(profile, table, cfg).index == baseline_cqi(sinr, table, 0.1)

    def test_exactly_mode(self):
        # exactly-N acceptance uses the pmf point mass, not the tail
        table = small_table(size=4, start=0.0, step=5.0)
        profile = self.flat_profile(6.0)
        cfg = EcqiConfig(max_failed=1, target_prob=0.3, mode="exactly",
                         search="linear_desc")
        result = ecqi(profile, table, cfg)
        from cbglink.linkmap import cbg_error_probs_for_entry

        counter = MultCounter()
        probs = cbg_error_probs_for_entry(profile, table[result.index])
        q = evaluate_q(probs, cfg, 1, counter)
        assert q >= 0.3

    def test_multiplication_count_aggregates(self):
        table = small_table(size=4)
        profile = self.flat_profile(5.0)
        cfg = EcqiConfig(max_failed=1, target_prob=0.5, mode="exactly",
                         search="linear_desc", prob_path="closed")
        result = ecqi(profile, table, cfg)
        # every visited index costs exactly complexity_closed(8, 1) = 8
        assert result.stats.multiplications == 8 * result.stats.mcs_evaluations

    def test_validate_monotone_path(self):
        table = small_table(size=8)
        profile = self.flat_profile(5.0)
        cfg = EcqiConfig(max_failed=2, target_prob=0.5, validate_monotone=True)
        result = ecqi(profile, table, cfg)
        assert result.stats.mcs_evaluations == len(table)

    def test_n_exceeds_m_rejected(self):
        table = small_table(size=4)
        profile = CbSinrProfile.from_cb_sinr([5.0, 5.0], 2)
        cfg = EcqiConfig(max_failed=4, target_prob=0.5)
        with pytest.raises(ValueError):
            ecqi(profile, table, cfg)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EcqiConfig(max_failed=9, max_cbgs=8)
        with pytest.raises(ValueError):
            EcqiConfig(max_cbgs=5)
        with pytest.raises(ValueError):
            EcqiConfig(target_prob=1.0)
        with pytest.raises(ValueError):
            EcqiConfig(relax_tolerance=-0.1)
        with pytest.raises(ValueError):
            EcqiConfig(search="random")
        with pytest.raises(ValueError):
            EcqiConfig(mode="sometimes")

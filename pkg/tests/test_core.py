import math

import numpy as np
import pytest

from cpdlab import (
    Interval,
    RandomIntervalSet,
    estimate_noise_scale,
    hausdorff,
    mean_cost,
    sample_intervals,
    solve_min_partition,
    wbs_scan,
)
from cpdlab.core import scan_from_score
from cpdlab.mean import cusum

from helpers import exhaustive_min_partition


class TestHausdorff:
    def test_both_empty(self):
        assert hausdorff([], []) == 0.0

    def test_one_empty_is_infinite(self):
        assert hausdorff([], [3]) == math.inf
        assert hausdorff([3], []) == math.inf

    def test_pairwise_example(self):
        # directed distances: {1,10}->{2,8} gives max(1,2); {2,8}->{1,10} gives max(1,2)
        assert hausdorff([1, 10], [2, 8]) == 2.0

    def test_symmetry_and_identity(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a = sorted(rng.choice(100, size=rng.integers(1, 6), replace=False) + 2)
            b = sorted(rng.choice(100, size=rng.integers(1, 6), replace=False) + 2)
            assert hausdorff(a, b) == hausdorff(b, a)
            assert hausdorff(a, a) == 0.0


class TestSampleIntervals:
    def test_seeded_determinism(self):
        a = sample_intervals(10, 3, seed=7)
        b = sample_intervals(10, 3, seed=7)
        assert a.intervals == b.intervals

    def test_length_cap(self):
        ivs = sample_intervals(10, 5, max_length=4, seed=1)
        assert all(iv.length <= 4 for iv in ivs.intervals)
        assert all(iv.length >= 2 for iv in ivs.intervals)

    def test_endpoints_in_range(self):
        ivs = sample_intervals(100, 200, seed=2)
        assert all(1 <= iv.s <= iv.e <= 100 for iv in ivs.intervals)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            sample_intervals(2, 3)
        with pytest.raises(ValueError):
            sample_intervals(10, 0)
        with pytest.raises(ValueError):
            sample_intervals(10, 3, max_length=1)


class TestSolveMinPartition:
    def test_two_segment_example(self):
        x = [0.0, 0.0, 5.0, 5.0]
        segs, cps, obj = solve_min_partition(4, lambda iv: mean_cost(x, iv), 1.0)
        # brute force over all 8 partitions: {1,2},{3,4} costs 0, penalty 2
        assert cps == [3]
        assert obj == 2.0
        assert segs == [Interval(1, 2), Interval(3, 4)]

    def test_huge_penalty_yields_single_segment(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(12)
        lam = 10.0 * (mean_cost(x, Interval(1, 12)) + 1.0)
        _, cps, _ = solve_min_partition(12, lambda iv: mean_cost(x, iv), lam)
        assert cps == []

    def test_zero_cost_prefers_fewest_segments(self):
        x = [0.0, 0.0, 0.0]
        _, cps, obj = solve_min_partition(3, lambda iv: mean_cost(x, iv), 0.5)
        assert cps == []
        assert obj == 0.5

    def test_oracle_equivalence_exact(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            T = int(rng.integers(2, 11))
            x = rng.standard_normal(T) * rng.uniform(0.3, 3.0)
            lam = float(rng.uniform(0.05, 2.0))
            cost = lambda iv: mean_cost(x, iv)  # noqa: E731
            obj_oracle, bps_oracle = exhaustive_min_partition(T, cost, lam)
            _, cps, obj = solve_min_partition(T, cost, lam)
            assert obj == obj_oracle
            assert cps == bps_oracle

    def test_objective_monotone_in_lambda(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(40)
        cost = lambda iv: mean_cost(x, iv)  # noqa: E731
        objs = [solve_min_partition(40, cost, lam)[2] for lam in (0.1, 0.5, 1.0, 3.0, 10.0)]
        assert all(a <= b + 1e-12 for a, b in zip(objs, objs[1:]))

    def test_rejects_nonpositive_penalty(self):
        with pytest.raises(ValueError):
            solve_min_partition(4, lambda iv: 0.0, 0.0)


class TestWbsScan:
    def test_zero_score_finds_nothing(self):
        ivs = sample_intervals(20, 10, seed=4)
        scan = scan_from_score(lambda s, t, e: 0.0)
        assert wbs_scan(20, scan, ivs, tau=0.5) == []

    def test_noiseless_step_declares_new_segment_start(self):
        x = np.array([0.0, 0.0, 0.0, 1.0, 1.0, 1.0])
        ivs = RandomIntervalSet((Interval(1, 6),))
        scan = scan_from_score(lambda s, t, e: abs(cusum(x, s, t, e)))
        assert wbs_scan(6, scan, ivs, tau=0.5) == [4]

    def test_output_structurally_valid(self):
        rng = np.random.default_rng(9)
        for trial in range(20):
            T = int(rng.integers(6, 60))
            x = rng.standard_normal(T)
            ivs = sample_intervals(T, 12, seed=trial)
            scan = scan_from_score(lambda s, t, e: abs(cusum(x, s, t, e)))
            out = wbs_scan(T, scan, ivs, tau=0.2)
            assert out == sorted(out)
            assert len(set(out)) == len(out)
            assert all(2 <= c <= T for c in out)
            # every declared point lies strictly inside some scan interval
            assert all(any(iv.s < c <= iv.e for iv in ivs.intervals) for c in out)

    def test_deterministic_given_intervals(self):
        rng = np.random.default_rng(12)
        x = rng.standard_normal(80)
        ivs = sample_intervals(80, 25, seed=1)
        scan = scan_from_score(lambda s, t, e: abs(cusum(x, s, t, e)))
        assert wbs_scan(80, scan, ivs, tau=0.7) == wbs_scan(80, scan, ivs, tau=0.7)


class TestNoiseScale:
    def test_constant_sequence_fallback(self):
        assert estimate_noise_scale([3.0, 3.0, 3.0, 3.0]) == 1e-12

    def test_alternating_sequence(self):
        expected = 1.0 / (math.sqrt(2.0) * 0.6745)
        assert estimate_noise_scale([0, 1, 0, 1, 0, 1]) == pytest.approx(expected, rel=1e-12)

    def test_scale_homogeneity(self):
        rng = np.random.default_rng(21)
        x = rng.standard_normal(200)
        assert estimate_noise_scale(4.0 * x) == pytest.approx(4.0 * estimate_noise_scale(x), rel=1e-12)

    def test_too_short(self):
        with pytest.raises(ValueError):
            estimate_noise_scale([1.0])

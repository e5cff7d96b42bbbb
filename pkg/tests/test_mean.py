import math

import numpy as np
import pytest

from cpdlab import (
    Interval,
    RandomIntervalSet,
    detect_mean_pdp,
    detect_mean_wbs,
    mean_cost,
    sample_intervals,
)
from cpdlab.mean import MeanSegmentCost, cusum


class TestCusum:
    def test_step_example(self):
        assert cusum([0, 0, 1, 1], 0, 2, 4) == pytest.approx(-1.0, abs=1e-12)

    def test_constant_series_is_zero(self):
        x = np.full(10, 2.7)
        for (s, t, e) in [(0, 3, 10), (2, 5, 9), (0, 1, 2)]:
            assert cusum(x, s, t, e) == pytest.approx(0.0, abs=1e-12)

    def test_additive_invariance(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(30)
        for c in (1.0, -4.5, 100.0):
            assert cusum(x + c, 3, 11, 27) == pytest.approx(cusum(x, 3, 11, 27), abs=1e-9)

    def test_index_validation(self):
        with pytest.raises(ValueError):
            cusum([1.0, 2.0, 3.0], 1, 1, 3)

    def test_population_identity_single_change(self):
        # noiseless single change at eta: |cusum| peaks at t = eta - 1 with
        # value sqrt((e - eta + 1)(eta - 1 - s)/(e - s)) * kappa
        kappa, eta, T = 1.7, 29, 80
        x = np.concatenate([np.zeros(eta - 1), np.full(T - eta + 1, kappa)])
        for (s, e) in [(0, T), (10, 60), (20, 35)]:
            vals = np.array([abs(cusum(x, s, t, e)) for t in range(s + 1, e)])
            tstar = s + 1 + int(np.argmax(vals))
            assert tstar == eta - 1
            expected = math.sqrt((e - eta + 1) * (eta - 1 - s) / (e - s)) * kappa
            assert vals.max() == pytest.approx(expected, abs=1e-10)


class TestMeanCost:
    def test_simple_example(self):
        assert mean_cost([1.0, 2.0, 3.0], Interval(1, 3)) == pytest.approx(2.0, abs=1e-12)

    def test_constant_interval_zero(self):
        assert mean_cost(np.full(8, 1.3), Interval(2, 7)) == pytest.approx(0.0, abs=1e-12)

    def test_singleton_zero(self):
        assert mean_cost([4.0, 5.0, 6.0], Interval(2, 2)) == 0.0

    def test_prefix_class_matches_direct(self):
        rng = np.random.default_rng(17)
        x = rng.standard_normal(25)
        cost = MeanSegmentCost(x)
        for _ in range(60):
            s = int(rng.integers(1, 25))
            e = int(rng.integers(s, 26))
            assert cost(Interval(s, e)) == pytest.approx(mean_cost(x, Interval(s, e)), abs=1e-9)


class TestDetectMeanPdp:
    def test_noiseless_step(self):
        assert detect_mean_pdp([0, 0, 0, 5, 5, 5], lam=1.0) == [4]

    def test_constant_series(self):
        for lam in (0.01, 1.0, 50.0):
            assert detect_mean_pdp(np.full(20, 3.0), lam=lam) == []
        assert detect_mean_pdp(np.full(20, 3.0)) == []  # default penalty

    def test_additive_invariance_of_output(self):
        rng = np.random.default_rng(20)
        x = np.concatenate([rng.standard_normal(40), 4 + rng.standard_normal(40)])
        assert detect_mean_pdp(x + 13.0, lam=10.0) == detect_mean_pdp(x, lam=10.0)

    def test_scale_equivariance(self):
        rng = np.random.default_rng(30)
        x = np.concatenate([rng.standard_normal(50), 3 + rng.standard_normal(50)])
        base = detect_mean_pdp(x, lam=8.0)
        for c in (0.5, 2.0, -3.0):
            assert detect_mean_pdp(c * x, lam=c * c * 8.0) == base


class TestDetectMeanWbs:
    def test_noiseless_single_jump(self):
        T, eta, kappa = 100, 51, 2.0
        x = np.concatenate([np.zeros(eta - 1), np.full(T - eta + 1, kappa)])
        ivs = sample_intervals(T, 50, seed=5)
        assert detect_mean_wbs(x, ivs, tau=1.0) == [eta]

    def test_huge_threshold_finds_nothing(self):
        rng = np.random.default_rng(2)
        x = np.concatenate([rng.standard_normal(30), 5 + rng.standard_normal(30)])
        ivs = sample_intervals(60, 30, seed=6)
        assert detect_mean_wbs(x, ivs, tau=1e9) == []

    def test_two_separated_jumps_with_covering_intervals(self):
        x = np.concatenate([np.zeros(20), np.full(20, 3.0), np.zeros(20)])
        ivs = RandomIntervalSet((Interval(5, 35), Interval(25, 55)))
        assert detect_mean_wbs(x, ivs, tau=1.0) == [21, 41]

    def test_scale_equivariance(self):
        rng = np.random.default_rng(14)
        x = np.concatenate([rng.standard_normal(60), 3 + rng.standard_normal(60)])
        ivs = sample_intervals(120, 40, seed=3)
        base = detect_mean_wbs(x, ivs, tau=4.0)
        for c in (0.5, 2.0):
            assert detect_mean_wbs(c * x, ivs, tau=abs(c) * 4.0) == base

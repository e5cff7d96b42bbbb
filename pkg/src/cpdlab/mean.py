"""Piecewise-constant mean model: CUSUM statistic, squared-error cost, detectors."""

from __future__ import annotations

import math

import numpy as np

from . import backend
from .core import (
    Interval,
    estimate_noise_scale,
    identity_trim,
    solve_min_partition,
    wbs_scan,
)

DEFAULT_PDP_CONSTANT = 1.5   # lam = c * sigma_hat^2 * log T
DEFAULT_WBS_CONSTANT = 2.0   # tau = c * sigma_hat * sqrt(log T)


def as_series(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("expected a 1-D series with at least 2 points")
    if not np.all(np.isfinite(x)):
        raise ValueError("series values must be finite")
    return x


def _check_interval(interval, T):
    s, e = interval
    if not 1 <= s <= e <= T:
        raise ValueError(f"interval [{s}, {e}] outside series of length {T}")
    return int(s), int(e)


def cusum(x, s, t, e):
    """CUSUM statistic of ``x`` at split ``t`` of the segment ``(s, e]``.

    ``sqrt((e-t)/((e-s)(t-s))) * sum(x[s+1..t])
    - sqrt((t-s)/((e-s)(e-t))) * sum(x[t+1..e])``.
    """
    x = as_series(x)
    if not 0 <= s < t < e <= x.size:
        raise ValueError(f"need 0 <= s < t < e <= T, got ({s}, {t}, {e})")
    left = float(np.sum(x[s:t]))
    right = float(np.sum(x[t:e]))
    n1 = t - s
    n2 = e - t
    span = e - s
    return math.sqrt(n2 / (span * n1)) * left - math.sqrt(n1 / (span * n2)) * right


def mean_cost(x, interval):
    """Sum of squared deviations from the interval mean; 0 for singletons."""
    x = as_series(x)
    s, e = _check_interval(interval, x.size)
    seg = x[s - 1:e]
    if seg.size <= 1:
        return 0.0
    resid = seg - seg.mean()
    return float(resid @ resid)


class MeanSegmentCost:
    """Squared-error segment cost backed by prefix sums.

    Feeds :func:`cpdlab.core.solve_min_partition`; the suffix rows and the
    backend DP tables use the same arithmetic so reconstruction can match the
    recursion values exactly.
    """

    def __init__(self, x):
        x = as_series(x)
        self.T = x.size
        self.S = np.concatenate(([0.0], np.cumsum(x)))
        self.SS = np.concatenate(([0.0], np.cumsum(x * x)))

    def __call__(self, interval):
        s, e = _check_interval(interval, self.T)
        row = self.suffix_costs(s - 1)
        return max(0.0, float(row[e - s]))

    def suffix_costs(self, s):
        d = self.S[s + 1:] - self.S[s]
        n = np.arange(1, self.T - s + 1, dtype=np.float64)
        return (self.SS[s + 1:] - self.SS[s]) - d * d / n

    def dp_tables(self, lam):
        return backend.dp_mean_suffix(self.S, self.SS, lam)


def default_mean_lambda(x):
    """Recommended penalty ``1.5 * sigma_hat^2 * log T`` (overridable)."""
    x = as_series(x)
    return DEFAULT_PDP_CONSTANT * estimate_noise_scale(x) ** 2 * math.log(x.size)


def default_mean_tau(x):
    """Recommended scan threshold ``2 * sigma_hat * sqrt(log T)`` (overridable)."""
    x = as_series(x)
    return DEFAULT_WBS_CONSTANT * estimate_noise_scale(x) * math.sqrt(math.log(x.size))


def detect_mean_pdp(x, lam=None):
    """Penalised least-squares segmentation of a piecewise-constant mean."""
    x = as_series(x)
    if lam is None:
        lam = default_mean_lambda(x)
    _, cps, _ = solve_min_partition(x.size, MeanSegmentCost(x), lam)
    return cps


def cusum_scan(x):
    """Scan callback returning the max absolute CUSUM split of a segment."""
    S = np.concatenate(([0.0], np.cumsum(as_series(x))))

    def scan(m, s, e, lo, hi):
        return backend.cusum_argmax(S, s, e, lo, hi)

    return scan


def detect_mean_wbs(x, intervals, tau=None):
    """Randomised-interval scan with the absolute mean CUSUM score."""
    x = as_series(x)
    if tau is None:
        tau = default_mean_tau(x)
    return wbs_scan(x.size, cusum_scan(x), intervals, tau, trim=identity_trim)

"""Shared test oracles: exhaustive search baselines kept independent of the
library's solvers."""

import numpy as np

from cpdlab import Interval


def exhaustive_min_partition(T, cost, lam):
    """Brute-force minimum of the penalised partition objective.

    Enumerates all 2^(T-1) breakpoint subsets.  Accumulates segment costs
    right to left, matching the solver's suffix recursion, so agreement can
    be asserted exactly.  Ties prefer fewer segments, then lexicographically
    smaller breakpoints.
    """
    best = None
    for mask in range(1 << (T - 1)):
        bps = [i + 2 for i in range(T - 1) if mask >> i & 1]
        edges = [1] + bps + [T + 1]
        total = 0.0
        for a, b in zip(reversed(edges[:-1]), reversed(edges[1:])):
            total = cost(Interval(a, b - 1)) + lam + total
        key = (total, len(edges) - 1, tuple(bps))
        if best is None or key < best:
            best = key
    objective, nseg, bps = best
    return objective, list(bps)


def scan_score_max(score, s, e, lo, hi):
    """Plain loop argmax of a pointwise split score, smallest split wins ties."""
    best_t, best_a = lo, -np.inf
    for t in range(lo, hi + 1):
        a = score(s, t, e)
        if a > best_a:
            best_a, best_t = a, t
    return best_t, best_a


def indicator_cusum(x, z, s, t, e):
    """Univariate CUSUM of the series 1{x_i <= z}; KS oracle ingredient."""
    b = (np.asarray(x) <= z).astype(float)
    n1, n2, span = t - s, e - t, e - s
    left = b[s:t].sum()
    right = b[t:e].sum()
    return np.sqrt(n2 / (span * n1)) * left - np.sqrt(n1 / (span * n2)) * right


def ks_cusum_oracle(x, s, t, e):
    """Max over data-value thresholds of the indicator-series CUSUM."""
    x = np.asarray(x)
    return max(abs(indicator_cusum(x, z, s, t, e)) for z in x[s:e])

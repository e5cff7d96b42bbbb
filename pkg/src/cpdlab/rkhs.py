"""Kernel-space segmentation: gram matrices, scatter cost, detector, refinement.

The segment cost is the within-segment scatter in feature space,
``sum_{t in I} k(X_t, X_t) - |I|^{-1} sum_{s,t in I} k(X_s, X_t)``,
which reduces to the squared-error cost of the mean model under the linear
kernel on scalars.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import backend
from .core import Interval, solve_min_partition

GRAM_SIZE_LIMIT = 20000
KERNELS = ("linear", "rbf")
_MEDIAN_HEURISTIC_SEED = 1759  # fixed so gamma defaults are reproducible


def _as_points(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("expected a series of at least 2 scalar or vector observations")
    if not np.all(np.isfinite(x)):
        raise ValueError("observations must be finite")
    return x


def _sq_distances(a, b):
    d2 = (a * a).sum(axis=1)[:, None] + (b * b).sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.maximum(d2, 0.0)


def median_heuristic_gamma(x, subsample=1000):
    """``1 / median`` of the positive squared pairwise distances.

    Uses a seeded subsample of at most ``subsample`` points so the default is
    cheap and reproducible.
    """
    pts = _as_points(x)
    if pts.shape[0] > subsample:
        rng = np.random.default_rng(_MEDIAN_HEURISTIC_SEED)
        pts = pts[rng.choice(pts.shape[0], size=subsample, replace=False)]
    d2 = _sq_distances(pts, pts)
    vals = d2[np.triu_indices_from(d2, k=1)]
    vals = vals[vals > 0]
    if vals.size == 0:
        return 1.0
    return float(1.0 / np.median(vals))


def gram(x, kernel="linear", gamma=None):
    """Full gram matrix under the linear or gaussian RBF kernel.

    RBF uses ``k(a, b) = exp(-gamma * ||a - b||^2)`` with ``gamma`` defaulting
    to the median heuristic.  Materialisation is O(T^2); series longer than
    ``GRAM_SIZE_LIMIT`` are rejected.
    """
    pts = _as_points(x)
    T = pts.shape[0]
    if T > GRAM_SIZE_LIMIT:
        raise ValueError(f"series of length {T} exceeds the gram limit {GRAM_SIZE_LIMIT}")
    if kernel == "linear":
        return pts @ pts.T
    if kernel == "rbf":
        if gamma is None:
            gamma = median_heuristic_gamma(pts)
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        return np.exp(-gamma * _sq_distances(pts, pts))
    raise ValueError(f"unknown kernel {kernel!r}; choose from {KERNELS}")


def kernel_cost(g, interval):
    """Within-segment scatter of a gram block; 0 for singletons.

    Small negative values from rounding are clamped at 0; anything below
    ``-1e-10`` signals a gram matrix that is not positive semidefinite.
    """
    g = np.asarray(g, dtype=np.float64)
    T = g.shape[0]
    s, e = interval
    if not 1 <= s <= e <= T:
        raise ValueError(f"interval [{s}, {e}] outside gram of size {T}")
    block = g[s - 1:e, s - 1:e]
    n = e - s + 1
    val = float(np.trace(block)) - float(block.sum()) / n
    if val < -1e-10:
        raise ValueError(f"gram matrix is not positive semidefinite (cost {val})")
    return max(val, 0.0)


class GramSegmentCost:
    """Scatter cost with prefix-sum rows and a backend DP kernel."""

    def __init__(self, g):
        g = np.asarray(g, dtype=np.float64)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("gram matrix must be square")
        self.T = g.shape[0]
        self.Dg = np.concatenate(([0.0], np.cumsum(np.diag(g))))
        P = np.zeros((self.T + 1, self.T + 1))
        P[1:, 1:] = g.cumsum(axis=0).cumsum(axis=1)
        self.P = P
        self.D2 = np.ascontiguousarray(np.diag(P))

    def __call__(self, interval):
        s, e = interval
        row = self.suffix_costs(s - 1)
        return max(0.0, float(row[e - s]))

    def suffix_costs(self, s):
        n = np.arange(1, self.T - s + 1, dtype=np.float64)
        blk = self.D2[s + 1:] - 2.0 * self.P[s, s + 1:] + self.P[s, s]
        return (self.Dg[s + 1:] - self.Dg[s]) - blk / n

    def dp_tables(self, lam):
        return backend.dp_gram_suffix(self.Dg, self.D2, self.P, lam)


def detect_kernel_pdp(x, kernel, lam, gamma=None):
    """Penalised segmentation under the kernel scatter cost."""
    g = gram(x, kernel=kernel, gamma=gamma)
    _, cps, _ = solve_min_partition(g.shape[0], GramSegmentCost(g), lam)
    return cps


def refine_kernel(x, kernel, initial, gamma=None):
    """One-change-per-window re-localisation of initial kernel estimates.

    Scans each midpoint-to-midpoint window for the split minimising the sum
    of the two one-sided scatter costs.  Cardinality is preserved; degenerate
    windows keep the initial estimate and warn.
    """
    from .polynomial import _refinement_windows

    g = gram(x, kernel=kernel, gamma=gamma)
    T = g.shape[0]
    if len(initial) == 0:
        raise ValueError("initial estimates must be nonempty")
    cost = GramSegmentCost(g)
    out = []
    for nu, a, b in _refinement_windows(initial, T):
        if b - a < 1:
            warnings.warn(f"degenerate refinement window around {nu}; keeping initial point",
                          RuntimeWarning)
            out.append(nu)
            continue
        best_t, best_v = None, math.inf
        for t in range(a + 1, b + 1):
            v = cost(Interval(a, t - 1)) + cost(Interval(t, b))
            if v < best_v:
                best_v = v
                best_t = t
        out.append(best_t)
    return out

"""Piecewise-polynomial trends: projection cost, detector, refinement, cross-term.

The public design matrix uses the monomial basis in ``t / T``.  Fits are
evaluated internally in an interval-standardised basis (monomials in the
recentred, rescaled time) because the fitted subspace, and therefore the
residual, only depends on the polynomial span; this keeps Gram matrices
well conditioned for short intervals far from the origin.  The split
cross-term is likewise invariant under any basis shared by both intervals.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .core import Interval, solve_min_partition
from .mean import as_series, _check_interval

RIDGE = 1e-12          # relative Gram regularisation on numerically singular fits
MAX_BATCHED_ORDER = 3  # batched DP rows cover r <= 3; larger r falls back per interval


def design_matrix(interval, r, T):
    """Rows ``(1, t/T, ..., (t/T)^r)`` for ``t`` in the interval."""
    if r < 0:
        raise ValueError("polynomial order must be nonnegative")
    s, e = interval
    if not 1 <= s <= e <= T:
        raise ValueError(f"interval [{s}, {e}] outside 1..{T}")
    t = np.arange(s, e + 1, dtype=np.float64) / T
    return np.vander(t, r + 1, increasing=True)


def _standardised_grid(n):
    # integer offsets recentred to the interval midpoint and scaled to [-1, 1]
    half = (n - 1) / 2.0
    return (np.arange(n, dtype=np.float64) - half) / max(half, 1.0)


def _solve_normal_equations(G, c, r):
    try:
        return cho_solve(cho_factor(G, lower=True), c)
    except np.linalg.LinAlgError:
        warnings.warn(
            "near-singular polynomial Gram matrix; applying ridge fallback",
            RuntimeWarning,
        )
        Gr = G + (RIDGE * np.trace(G)) * np.eye(r + 1)
        return cho_solve(cho_factor(Gr, lower=True), c)


def poly_cost(x, interval, r):
    """Squared residual of the least-squares order-``r`` polynomial fit.

    Defined as 0 whenever the interval has at most ``r + 1`` points (the fit
    interpolates exactly).
    """
    x = as_series(x)
    if r < 0:
        raise ValueError("polynomial order must be nonnegative")
    s, e = _check_interval(interval, x.size)
    n = e - s + 1
    if n <= r + 1:
        return 0.0
    seg = x[s - 1:e]
    U = np.vander(_standardised_grid(n), r + 1, increasing=True)
    beta = _solve_normal_equations(U.T @ U, U.T @ seg, r)
    resid = seg - U @ beta
    return float(resid @ resid)


def _central_power_sums(n, k):
    """``sum_{j=0}^{n-1} (j - (n-1)/2)^k`` for an array of lengths ``n``."""
    n = n.astype(np.float64)
    if k == 0:
        return n
    if k % 2 == 1:
        return np.zeros_like(n)
    n2 = n * n
    if k == 2:
        return n * (n2 - 1.0) / 12.0
    if k == 4:
        return n * (n2 - 1.0) * (3.0 * n2 - 7.0) / 240.0
    if k == 6:
        return n * (n2 - 1.0) * (3.0 * n2 * n2 - 18.0 * n2 + 31.0) / 1344.0
    raise NotImplementedError(f"central power sum of order {k}")


class PolySegmentCost:
    """Order-``r`` projection cost with vectorised suffix rows for the DP.

    For each row the Gram matrix of the standardised basis is assembled from
    closed-form central power sums and the data moments from binomially
    shifted cumulative sums, then all normal equations are solved in one
    batched call.
    """

    def __init__(self, x, r):
        if r < 0:
            raise ValueError("polynomial order must be nonnegative")
        if r > MAX_BATCHED_ORDER:
            raise ValueError(
                f"batched rows support r <= {MAX_BATCHED_ORDER}; use poly_cost directly"
            )
        self.x = as_series(x)
        self.r = int(r)
        self.T = self.x.size
        self.SS = np.concatenate(([0.0], np.cumsum(self.x * self.x)))
        self._binom = [[math.comb(a, j) for j in range(a + 1)] for a in range(r + 1)]

    def __call__(self, interval):
        return poly_cost(self.x, interval, self.r)

    def suffix_costs(self, s):
        r = self.r
        x = self.x
        T = self.T
        n = np.arange(1, T - s + 1, dtype=np.float64)
        costs = np.zeros(T - s)
        fit = n > r + 1
        if not np.any(fit):
            return costs
        half = (n - 1.0) / 2.0
        scale = np.maximum(half, 1.0)
        # data moments around each right endpoint's midpoint:
        # sum (t - c)^a x_t = sum_j C(a, j) (-half)^(a-j) * W_j
        # with W_j[e] = sum_{t=s+1..e} (t - s - 1)^j x_t
        w = np.arange(T - s, dtype=np.float64)
        W = np.empty((r + 1, T - s))
        for j in range(r + 1):
            W[j] = np.cumsum(w ** j * x[s:])
        cvec = np.empty((r + 1, T - s))
        for a in range(r + 1):
            acc = np.zeros(T - s)
            for j in range(a + 1):
                acc += self._binom[a][j] * (-half) ** (a - j) * W[j]
            cvec[a] = acc / scale ** a
        G = np.empty((r + 1, r + 1, T - s))
        for a in range(r + 1):
            for b in range(a, r + 1):
                G[a, b] = _central_power_sums(n, a + b) / scale ** (a + b)
                G[b, a] = G[a, b]
        Gf = np.ascontiguousarray(G[:, :, fit].transpose(2, 0, 1))
        cf = np.ascontiguousarray(cvec[:, fit].T)
        try:
            beta = np.linalg.solve(Gf, cf[..., None])[..., 0]
        except np.linalg.LinAlgError:
            warnings.warn(
                "near-singular polynomial Gram matrix in batched rows; ridge fallback",
                RuntimeWarning,
            )
            tr = np.einsum("kii->k", Gf)
            Gf = Gf + (RIDGE * tr)[:, None, None] * np.eye(r + 1)
            beta = np.linalg.solve(Gf, cf[..., None])[..., 0]
        ssdiff = self.SS[s + 1:] - self.SS[s]
        costs[fit] = np.maximum(0.0, ssdiff[fit] - np.einsum("ki,ki->k", beta, cf))
        return costs


def detect_poly_pdp(x, r, lam):
    """Penalised segmentation under the order-``r`` projection cost."""
    x = as_series(x)
    if r <= MAX_BATCHED_ORDER:
        cost = PolySegmentCost(x, r)
    else:
        warnings.warn(
            f"order {r} exceeds the officially supported {MAX_BATCHED_ORDER}; "
            "per-interval fits may be ill conditioned",
            RuntimeWarning,
        )
        cost = lambda interval: poly_cost(x, interval, r)  # noqa: E731
    _, cps, _ = solve_min_partition(x.size, cost, lam)
    return cps


def _refinement_windows(initial, T):
    pts = [1] + [int(v) for v in initial] + [T + 1]
    if any(pts[i] >= pts[i + 1] for i in range(len(pts) - 1)):
        raise ValueError("initial estimates must be sorted, distinct and within 2..T")
    for k in range(1, len(pts) - 1):
        a = (pts[k - 1] + pts[k]) // 2
        b = (pts[k] + pts[k + 1]) // 2 - 1
        yield pts[k], a, b


def refine_poly(x, r, initial):
    """Re-localise each initial estimate inside its midpoint-to-midpoint window.

    For every initial point the window between the midpoints towards its
    neighbours (series ends standing in at the boundary) is scanned for the
    split minimising the sum of the two one-sided projection costs.  The
    number of estimates is preserved; a degenerate window keeps the initial
    point and warns.
    """
    x = as_series(x)
    if len(initial) == 0:
        raise ValueError("initial estimates must be nonempty")
    out = []
    for nu, a, b in _refinement_windows(initial, x.size):
        if b - a < 1:
            warnings.warn(f"degenerate refinement window around {nu}; keeping initial point",
                          RuntimeWarning)
            out.append(nu)
            continue
        best_t, best_v = None, math.inf
        for t in range(a + 1, b + 1):
            v = poly_cost(x, Interval(a, t - 1), r) + poly_cost(x, Interval(t, b), r)
            if v < best_v:
                best_v = v
                best_t = t
        out.append(best_t)
    return out


def cross_term(x, i1, i2, r):
    """Cost increment from merging two adjacent intervals.

    Evaluates the closed-form quadratic form ``Q`` with
    ``poly_cost(I1 u I2) = poly_cost(I1) + poly_cost(I2) + Q``; the fitted
    coefficient difference is contracted against the inverse of the sum of
    the two inverse Gram matrices.  Computed in the basis standardised over
    the union, under which ``Q`` is invariant.
    """
    x = as_series(x)
    s1, e1 = _check_interval(i1, x.size)
    s2, e2 = _check_interval(i2, x.size)
    if e1 + 1 != s2:
        raise ValueError("intervals must be disjoint and adjacent (i1 directly before i2)")
    n = e2 - s1 + 1
    grid = _standardised_grid(n)
    U1 = np.vander(grid[: e1 - s1 + 1], r + 1, increasing=True)
    U2 = np.vander(grid[e1 - s1 + 1:], r + 1, increasing=True)
    x1 = x[s1 - 1:e1]
    x2 = x[s2 - 1:e2]
    G1 = U1.T @ U1
    G2 = U2.T @ U2
    b1 = _solve_normal_equations(G1, U1.T @ x1, r)
    b2 = _solve_normal_equations(G2, U2.T @ x2, r)
    try:
        mid = np.linalg.inv(G1) + np.linalg.inv(G2)
    except np.linalg.LinAlgError:
        warnings.warn(
            "near-singular polynomial Gram matrix; applying ridge fallback",
            RuntimeWarning,
        )
        G1 = G1 + (RIDGE * np.trace(G1)) * np.eye(r + 1)
        G2 = G2 + (RIDGE * np.trace(G2)) * np.eye(r + 1)
        mid = np.linalg.inv(G1) + np.linalg.inv(G2)
    d = b1 - b2
    return float(d @ np.linalg.solve(mid, d))

"""Shared offline segmentation engines.

Two generic engines that every model family plugs into:

* :func:`solve_min_partition` minimises ``sum_I H(I) + lam * |P|`` over all
  interval partitions of ``{1, ..., T}`` exactly, by dynamic programming over
  segment boundaries.  ``H`` is supplied per model as a segment-cost callback.
* :func:`wbs_scan` is the recursive randomised-interval scanner: each working
  segment is intersected with a fixed collection of random intervals, every
  admissible intersection is scanned for its best split, and the strongest
  split above a threshold is declared a change point and recursed on.

Conventions used throughout the package: time indices are 1-based, intervals
are closed, and a working segment ``(s, e)`` covers the points ``s+1 .. e``.
A change point is the first index of a new segment, so estimates live in
``{2, ..., T}``.  A split ``t`` of ``(s, e)`` assigns ``s+1 .. t`` to the left
half; declaring it yields the change point ``t + 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np


class NumericError(RuntimeError):
    """Internal numerical failure (maps to CLI exit code 3)."""


class Interval(NamedTuple):
    """Closed integer interval ``[s, e]`` with 1-based endpoints."""

    s: int
    e: int

    @property
    def length(self) -> int:
        return self.e - self.s + 1


@dataclass(frozen=True)
class RandomIntervalSet:
    """A fixed collection of scan intervals, as drawn by :func:`sample_intervals`."""

    intervals: tuple[Interval, ...]
    seed: int = 0
    max_length: int | None = None

    def __post_init__(self):
        if len(self.intervals) < 1:
            raise ValueError("need at least one interval")
        for iv in self.intervals:
            if iv.length < 2:
                raise ValueError(f"interval {iv} shorter than 2")


def sample_intervals(T, M, max_length=None, seed=0):
    """Draw ``M`` intervals with endpoints uniform on ``{1, ..., T}``.

    Endpoint pairs are redrawn until distinct, then sorted.  When
    ``max_length`` is given, draws longer than the cap are shrunk
    symmetrically around their midpoint to exactly ``max_length`` (the left
    end absorbs the odd trim), which keeps the coverage roughly uniform.
    Deterministic given ``seed``.
    """
    if T < 3:
        raise ValueError("T must be at least 3")
    if M < 1:
        raise ValueError("M must be at least 1")
    if max_length is not None and max_length < 2:
        raise ValueError("max_length must be at least 2")
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(M):
        while True:
            a, b = rng.integers(1, T + 1, size=2)
            if a != b:
                break
        if a > b:
            a, b = b, a
        if max_length is not None and b - a + 1 > max_length:
            excess = int(b - a + 1 - max_length)
            a += excess // 2 + excess % 2
            b -= excess // 2
        out.append(Interval(int(a), int(b)))
    return RandomIntervalSet(tuple(out), seed=int(seed), max_length=max_length)


def hausdorff(a, b):
    """Two-sided Hausdorff distance between two sets of change points.

    Returns ``inf`` when exactly one set is empty and ``0`` when both are.
    """
    sa = [int(v) for v in a]
    sb = [int(v) for v in b]
    if not sa and not sb:
        return 0.0
    if not sa or not sb:
        return math.inf
    d_ab = max(min(abs(u - v) for v in sb) for u in sa)
    d_ba = max(min(abs(u - v) for v in sa) for u in sb)
    return float(max(d_ab, d_ba))


def estimate_noise_scale(x):
    """Difference-based noise scale: ``median(|diff x|) / (sqrt(2) * 0.6745)``.

    Robust to piecewise-constant signal (each jump contaminates one
    difference only).  Falls back to ``1e-12`` when the median difference is
    zero so downstream tuning rules stay strictly positive.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need a 1-D sequence of length >= 2")
    med = float(np.median(np.abs(np.diff(x))))
    scale = med / (math.sqrt(2.0) * 0.6745)
    return scale if scale > 0.0 else 1e-12


# ---------------------------------------------------------------------------
# Penalised minimal partition
# ---------------------------------------------------------------------------

def _row_from_callable(cost, T):
    def row(s):
        return np.array([cost(Interval(s + 1, e)) for e in range(s + 1, T + 1)])

    return row


def solve_min_partition(T, cost, lam):
    """Exactly minimise ``sum_I H(I) + lam * |P|`` over interval partitions.

    ``cost`` is either a plain callable ``Interval -> float`` or an object
    with a vectorised ``suffix_costs(s)`` method returning
    ``[H(s+1..e) for e in s+1..T]`` (and optionally ``dp_tables(lam)``
    delegating the whole recursion to a backend kernel).  Each segment cost
    is queried at most once during the recursion.

    Ties are resolved deterministically: among optimal partitions the one
    with fewest segments wins, then the lexicographically smallest breakpoint
    sequence.  Returns ``(segments, change_points, objective)`` where
    ``change_points`` are the left endpoints of all segments but the first.

    The suffix recursion is ``B[s] = min_e H(s+1, e) + lam + B[e]`` and the
    reconstruction walks left to right taking the smallest boundary that is
    consistent with both the optimal value and the minimal segment count,
    which realises the documented tie-break globally.
    """
    T = int(T)
    if T < 1:
        raise ValueError("T must be positive")
    if not lam > 0:
        raise ValueError("lam must be positive")
    lam = float(lam)

    row_fn = getattr(cost, "suffix_costs", None)
    if row_fn is None:
        row_fn = _row_from_callable(cost, T)

    tables = getattr(cost, "dp_tables", None)
    if tables is not None:
        B, kmin = tables(lam)
    else:
        B = np.zeros(T + 1)
        kmin = np.zeros(T + 1, dtype=np.int64)
        for s in range(T - 1, -1, -1):
            tot = row_fn(s) + lam + B[s + 1:]
            b = tot.min()
            B[s] = b
            kmin[s] = 1 + kmin[s + 1:][tot == b].min()

    segments = []
    s = 0
    need = int(kmin[0])
    while s < T:
        tot = row_fn(s) + lam + B[s + 1:]
        ok = np.flatnonzero((tot == B[s]) & (kmin[s + 1:] + 1 == need))
        if ok.size == 0:
            raise NumericError("partition reconstruction failed; inconsistent cost rows")
        e = s + 1 + int(ok[0])
        segments.append(Interval(s + 1, e))
        need -= 1
        s = e
    change_points = [seg.s for seg in segments[1:]]
    return segments, change_points, float(B[0])


# ---------------------------------------------------------------------------
# Wild binary segmentation scan
# ---------------------------------------------------------------------------

def identity_trim(s, e):
    """Admissible split range of segment ``(s, e)`` with no trimming."""
    if e - s > 1:
        return s + 1, e - 1
    return None


def make_fraction_trim(frac=1.0 / 64.0):
    """Trim ``frac`` of the segment length off both ends before scanning."""

    def trim(s, e):
        cut = (e - s) * frac
        lo = math.floor(s + cut) + 1
        hi = math.ceil(e - cut) - 1
        if (e - cut) - (s + cut) < 1:
            return None
        lo = max(lo, s + 1)
        hi = min(hi, e - 1)
        if lo > hi:
            return None
        return lo, hi

    return trim


def make_buffer_trim(buf):
    """Keep splits at least ``buf`` away from both segment ends.

    The segment is admissible only when it is longer than ``2 * buf + 1``, the
    guard used by the buffered scan algorithms.
    """

    def trim(s, e):
        if not e - s >= 2 * buf + 1:
            return None
        lo = max(math.ceil(s + buf), s + 1)
        hi = min(math.floor(e - buf), e - 1)
        if lo > hi:
            return None
        return lo, hi

    return trim


def scan_from_score(score):
    """Wrap a pointwise split score ``(s, t, e) -> value`` into a scan callback.

    The resulting callback returns ``(t_best, max value)`` with ties broken
    towards the smallest split.
    """

    def scan(m, s, e, lo, hi):
        best_t, best_a = lo, -math.inf
        for t in range(lo, hi + 1):
            a = score(s, t, e)
            if a > best_a:
                best_a = a
                best_t = t
        return best_t, best_a

    return scan


def wbs_scan(T, scan, intervals, tau, trim=None):
    """Recursive randomised-interval scan.

    Within each working segment ``(s, e)`` every interval of ``intervals`` is
    intersected with the segment, the model ``trim`` rule decides the
    admissible split range, and ``scan(m, s_m, e_m, lo, hi)`` returns the
    best split and its score for interval index ``m`` (or ``None`` for
    inadmissible configurations, which score ``-1``).  If the strongest
    interval beats ``tau`` the split ``b`` is declared as change point
    ``b + 1`` and the scan recurses on ``(s, b)`` and ``(b + 1, e)``.

    Output is sorted and deterministic given the interval set; the first
    interval attaining the maximal score wins ties.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    trim = identity_trim if trim is None else trim
    ivs = intervals.intervals
    found = []
    stack = [(0, int(T))]
    while stack:
        s, e = stack.pop()
        if e - s < 2:
            continue
        best_a = -1.0
        best_b = None
        for m, iv in enumerate(ivs):
            s_m = max(s, iv.s - 1)
            e_m = min(e, iv.e)
            if e_m - s_m < 2:
                continue
            span = trim(s_m, e_m)
            if span is None:
                continue
            lo, hi = span
            res = scan(m, s_m, e_m, lo, hi)
            if res is None:
                continue
            b, a = res
            if a > best_a:
                best_a = a
                best_b = b
        if best_b is not None and best_a > tau:
            found.append(best_b + 1)
            # left segment first so the stack pops in deterministic order
            stack.append((best_b + 1, e))
            stack.append((s, best_b))
    return sorted(found)

"""Pure numpy implementations of the hot kernels.

``_ckernels`` (Cython) mirrors every function here.  The two backends must
stay bit-identical: the partition solver re-derives candidate rows with the
same arithmetic when reconstructing the optimal segmentation, and the parity
tests assert exact equality.  When editing a formula, keep the expression
tree (operation order and associativity) in sync with the C loop.
"""

import numpy as np


def dp_mean_suffix(S, SS, lam):
    """Suffix tables for the penalised partition problem with squared-error cost.

    ``S`` and ``SS`` are length ``T+1`` prefix sums of the data and its
    squares.  Returns ``(B, kmin)`` where ``B[s]`` is the optimal penalised
    cost of segmenting ``s+1 .. T`` and ``kmin[s]`` the fewest segments among
    optimal suffix partitions.
    """
    T = S.shape[0] - 1
    B = np.zeros(T + 1)
    kmin = np.zeros(T + 1, dtype=np.int64)
    for s in range(T - 1, -1, -1):
        d = S[s + 1:] - S[s]
        n = np.arange(1, T - s + 1, dtype=np.float64)
        tot = (SS[s + 1:] - SS[s]) - d * d / n + lam + B[s + 1:]
        b = tot.min()
        B[s] = b
        kmin[s] = 1 + kmin[s + 1:][tot == b].min()
    return B, kmin


def dp_gram_suffix(Dg, D2, P, lam):
    """Suffix tables for the penalised partition problem with gram cost.

    ``Dg`` is the length ``T+1`` prefix sum of the gram diagonal, ``P`` the
    ``(T+1, T+1)`` two-dimensional prefix sum of the gram matrix and
    ``D2[e] = P[e, e]``.  Segment cost is the within-segment scatter
    ``sum_diag - blocksum / n``.
    """
    T = Dg.shape[0] - 1
    B = np.zeros(T + 1)
    kmin = np.zeros(T + 1, dtype=np.int64)
    for s in range(T - 1, -1, -1):
        n = np.arange(1, T - s + 1, dtype=np.float64)
        blk = D2[s + 1:] - 2.0 * P[s, s + 1:] + P[s, s]
        tot = (Dg[s + 1:] - Dg[s]) - blk / n + lam + B[s + 1:]
        b = tot.min()
        B[s] = b
        kmin[s] = 1 + kmin[s + 1:][tot == b].min()
    return B, kmin


def cusum_argmax(S, s, e, lo, hi):
    """Largest absolute CUSUM over splits ``lo <= t <= hi`` of segment ``(s, e]``.

    ``S`` is the length ``T+1`` prefix sum.  Returns ``(t_best, value)``;
    ties go to the smallest split.
    """
    t = np.arange(lo, hi + 1)
    n1 = (t - s).astype(np.float64)
    n2 = (e - t).astype(np.float64)
    span = float(e - s)
    St = S[lo:hi + 1]
    v = np.sqrt(n2 / (span * n1)) * (St - S[s]) - np.sqrt(n1 / (span * n2)) * (S[e] - St)
    a = np.abs(v)
    j = int(np.argmax(a))
    return lo + j, float(a[j])


_KS_CHUNK = 256


def ks_argmax(x, s, e, lo, hi):
    """Best split of ``(s, e]`` under the weighted two-sample KS statistic.

    For each split ``t`` the statistic is
    ``sqrt((t-s)(e-t)/(e-s)) * max_z |F_left(z) - F_right(z)|`` with both
    empirical CDFs normalised by their own sample counts and the max taken
    over the observed values inside the segment.  Returns ``(t_best, value)``
    with smallest-``t`` tie-breaking.
    """
    y = x[s:e]
    L = e - s
    order = np.argsort(y, kind="stable").astype(np.int64)
    ys = y[order]
    last = np.empty(L, dtype=bool)
    last[:-1] = ys[1:] > ys[:-1]
    last[-1] = True
    j1 = np.arange(1, L + 1, dtype=np.int64)[:, None]
    best_t, best_a = lo, -1.0
    for block in range(lo, hi + 1, _KS_CHUNK):
        m = np.arange(block - s, min(block + _KS_CHUNK - 1, hi) - s + 1, dtype=np.int64)
        c1 = np.cumsum(order[:, None] < m[None, :], axis=0, dtype=np.int64)
        w = np.sqrt((m * (L - m)) / float(L))
        v = np.abs(w * (c1 / m - (j1 - c1) / (L - m)))
        stats = v[last].max(axis=0)
        j = int(np.argmax(stats))
        a = float(stats[j])
        if a > best_a:
            best_a = a
            best_t = block + j
    return best_t, best_a

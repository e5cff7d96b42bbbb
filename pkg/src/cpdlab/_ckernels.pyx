# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the hot kernels in ``_pykernels``.

Outputs must stay bit-identical with the numpy fallback; the build disables
floating point contraction for that reason.  Keep expression trees in sync.
"""

from libc.math cimport fabs, sqrt, INFINITY

import numpy as np

cimport numpy as cnp

cnp.import_array()


def dp_mean_suffix(double[::1] S, double[::1] SS, double lam):
    cdef Py_ssize_t T = S.shape[0] - 1
    B_arr = np.zeros(T + 1)
    k_arr = np.zeros(T + 1, dtype=np.int64)
    cdef double[::1] B = B_arr
    cdef long long[::1] kmin = k_arr
    cdef Py_ssize_t s, e
    cdef double d, n, v, b
    cdef long long kb, ke
    for s in range(T - 1, -1, -1):
        b = INFINITY
        kb = 0
        for e in range(s + 1, T + 1):
            d = S[e] - S[s]
            n = <double> (e - s)
            v = (SS[e] - SS[s]) - d * d / n + lam + B[e]
            ke = kmin[e] + 1
            if v < b:
                b = v
                kb = ke
            elif v == b and ke < kb:
                kb = ke
        B[s] = b
        kmin[s] = kb
    return B_arr, k_arr


def dp_gram_suffix(double[::1] Dg, double[::1] D2, double[:, ::1] P, double lam):
    cdef Py_ssize_t T = Dg.shape[0] - 1
    B_arr = np.zeros(T + 1)
    k_arr = np.zeros(T + 1, dtype=np.int64)
    cdef double[::1] B = B_arr
    cdef long long[::1] kmin = k_arr
    cdef Py_ssize_t s, e
    cdef double n, v, b, blk, pss
    cdef long long kb, ke
    for s in range(T - 1, -1, -1):
        b = INFINITY
        kb = 0
        pss = P[s, s]
        for e in range(s + 1, T + 1):
            n = <double> (e - s)
            blk = D2[e] - 2.0 * P[s, e] + pss
            v = (Dg[e] - Dg[s]) - blk / n + lam + B[e]
            ke = kmin[e] + 1
            if v < b:
                b = v
                kb = ke
            elif v == b and ke < kb:
                kb = ke
        B[s] = b
        kmin[s] = kb
    return B_arr, k_arr


def cusum_argmax(double[::1] S, Py_ssize_t s, Py_ssize_t e, Py_ssize_t lo, Py_ssize_t hi):
    cdef double span = <double> (e - s)
    cdef double best = -1.0
    cdef Py_ssize_t tbest = lo
    cdef Py_ssize_t t
    cdef double n1, n2, v, a
    for t in range(lo, hi + 1):
        n1 = <double> (t - s)
        n2 = <double> (e - t)
        v = sqrt(n2 / (span * n1)) * (S[t] - S[s]) - sqrt(n1 / (span * n2)) * (S[e] - S[t])
        a = fabs(v)
        if a > best:
            best = a
            tbest = t
    return tbest, best


def ks_argmax(double[::1] x, Py_ssize_t s, Py_ssize_t e, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t L = e - s
    y_arr = np.asarray(x[s:e])
    order_arr = np.argsort(y_arr, kind="stable").astype(np.int64)
    cdef long long[::1] order = order_arr
    cdef double[::1] ys = y_arr[order_arr]
    cdef unsigned char[::1] last = np.empty(L, dtype=np.uint8)
    cdef Py_ssize_t j
    for j in range(L - 1):
        last[j] = 1 if ys[j + 1] > ys[j] else 0
    last[L - 1] = 1
    cdef double best = -1.0
    cdef Py_ssize_t tbest = lo
    cdef Py_ssize_t m, t
    cdef long long c1
    cdef double w, v, colmax
    for t in range(lo, hi + 1):
        m = t - s
        w = sqrt(<double> (m * (L - m)) / <double> L)
        c1 = 0
        colmax = -1.0
        for j in range(L):
            if order[j] < m:
                c1 += 1
            if last[j]:
                v = fabs(w * (<double> c1 / <double> m
                              - <double> ((j + 1) - c1) / <double> (L - m)))
                if v > colmax:
                    colmax = v
        if colmax > best:
            best = colmax
            tbest = t
    return tbest, best

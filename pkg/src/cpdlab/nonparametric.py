"""Distribution-free CUSUM scans: empirical-CDF (KS) and kernel-density variants.

Both statistics replace the supremum over the real line by the maximum over
observed data points, which is exact for the CDF statistic (the CDF
difference is piecewise constant between observations) and is the standard
evaluation rule for the density statistic.  Empirical CDFs are normalised by
their own sample counts so they are proper CDFs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .core import identity_trim, wbs_scan
from .mean import as_series

KDE_FAMILIES = ("gaussian", "epanechnikov", "uniform-ball")
DEFAULT_KS_TAU_CONSTANT = 0.75  # tau = c * sqrt(log T); calibrated on i.i.d. nulls


def ks_cusum(x, s, t, e):
    """Weighted two-sample KS statistic at split ``t`` of segment ``(s, e]``.

    ``sqrt((t-s)(e-t)/(e-s)) * max_z |F_left(z) - F_right(z)|`` with the max
    over the observed values in the segment (where the piecewise-constant CDF
    difference attains its supremum).
    """
    x = as_series(x)
    if not 0 <= s < t < e <= x.size:
        raise ValueError(f"need 0 <= s < t < e <= T, got ({s}, {t}, {e})")
    return backend.ks_argmax(x, s, e, t, t)[1]


def default_ks_tau(T):
    """Null-calibrated scan threshold ``0.75 * sqrt(log T)`` (overridable)."""
    return DEFAULT_KS_TAU_CONSTANT * math.sqrt(math.log(T))


def detect_ks_wbs(x, intervals, tau=None):
    """Randomised-interval scan with the KS-CUSUM score."""
    x = as_series(x)
    if tau is None:
        tau = default_ks_tau(x.size)

    def scan(m, s, e, lo, hi):
        return backend.ks_argmax(x, s, e, lo, hi)

    return wbs_scan(x.size, scan, intervals, tau, trim=identity_trim)


def _unit_ball_volume(p):
    return math.pi ** (p / 2.0) / math.gamma(p / 2.0 + 1.0)


@dataclass(frozen=True)
class KernelSpec:
    """Smoothing kernel family, bandwidth and data dimension."""

    family: str
    h: float
    p: int

    def __post_init__(self):
        if self.family not in KDE_FAMILIES:
            raise ValueError(f"kernel family must be one of {KDE_FAMILIES}")
        if not self.h > 0:
            raise ValueError("bandwidth must be positive")
        if self.p < 1:
            raise ValueError("dimension must be at least 1")

    def profile(self, sq):
        """Kernel value as a function of the squared scaled distance."""
        if self.family == "gaussian":
            return (2.0 * math.pi) ** (-self.p / 2.0) * np.exp(-0.5 * sq)
        if self.family == "epanechnikov":
            c = (self.p + 2.0) / (2.0 * _unit_ball_volume(self.p))
            return c * np.maximum(1.0 - sq, 0.0)
        return (sq <= 1.0) / _unit_ball_volume(self.p)


def _as_vectors(x, p=None):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("expected a series of at least 2 vector observations")
    if not np.all(np.isfinite(x)):
        raise ValueError("observations must be finite")
    if p is not None and x.shape[1] != p:
        raise ValueError(f"kernel dimension {p} does not match data dimension {x.shape[1]}")
    return x


def _kde_matrix(x, spec):
    """``K[i, j] = h^-p k((X_i - X_j) / h)`` for all pairs."""
    d2 = (x * x).sum(axis=1)[:, None] + (x * x).sum(axis=1)[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    return spec.profile(d2 / (spec.h * spec.h)) / spec.h ** spec.p


def kde_cusum(x, s, t, e, spec):
    """Weighted max difference of the two one-sided density estimates.

    Densities are evaluated at every observation of the full series, per the
    scan construction; the weight is ``sqrt((t-s)(e-t)/(e-s))``.
    """
    x = _as_vectors(x, spec.p)
    T = x.shape[0]
    if not 0 <= s < t < e <= T:
        raise ValueError(f"need 0 <= s < t < e <= T, got ({s}, {t}, {e})")
    K = _kde_matrix(x, spec)
    left = K[:, s:t].mean(axis=1)
    right = K[:, t:e].mean(axis=1)
    w = math.sqrt((t - s) * (e - t) / (e - s))
    return float(np.max(np.abs(w * (left - right))))


def _kde_scan(x, spec):
    K = _kde_matrix(x, spec)
    C = np.concatenate((np.zeros((K.shape[0], 1)), np.cumsum(K, axis=1)), axis=1)

    def scan(m, s, e, lo, hi):
        t = np.arange(lo, hi + 1)
        n1 = (t - s).astype(np.float64)
        n2 = (e - t).astype(np.float64)
        w = np.sqrt(n1 * n2 / float(e - s))
        left = (C[:, lo:hi + 1] - C[:, s:s + 1]) / n1
        right = (C[:, e:e + 1] - C[:, lo:hi + 1]) / n2
        stats = np.abs(w * (left - right)).max(axis=0)
        j = int(np.argmax(stats))
        return lo + j, float(stats[j])

    return scan


def bandwidth_rule_of_thumb(x):
    """Interquartile-range bandwidth ``median_dims(IQR / 1.349) * T^(-1/(p+4))``.

    A descriptive default only; the scan theory ties the bandwidth to the
    unknown jump size, so treat this as a starting point to override.
    """
    x = _as_vectors(x)
    T, p = x.shape
    q75, q25 = np.percentile(x, [75, 25], axis=0)
    spread = float(np.median((q75 - q25) / 1.349))
    if spread <= 0:
        spread = float(np.median(np.std(x, axis=0))) or 1.0
    return spread * T ** (-1.0 / (p + 4.0))


def detect_kde_wbs(x, intervals, tau, spec):
    """Randomised-interval scan with the kernel-density CUSUM score."""
    x = _as_vectors(x, spec.p)
    return wbs_scan(x.shape[0], _kde_scan(x, spec), intervals, tau, trim=identity_trim)

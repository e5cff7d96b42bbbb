"""Synthetic scenario generators and the Monte Carlo rate harness.

A :class:`ScenarioSpec` fixes one piecewise-stationary data generating
process: the model family, the change locations and the per-segment
parameters.  :func:`generate` draws one seeded realisation together with
ground-truth metadata (jump sizes in the model's own norm, minimal spacing).
:func:`run_rate_sweep` wraps detector runs over a parameter grid and reports
detection frequency and localisation-error quantiles per grid point.

Noise is Gaussian throughout: it satisfies every sub-Gaussian model
assumption and heavier-tailed generators are out of scope.  Sub-seeds are
derived deterministically from ``(seed, point index, rep index)`` so sweeps
are reproducible replicate by replicate.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .core import hausdorff, sample_intervals
from .covariance import detect_cov_wbsip, split_even_odd
from .mean import detect_mean_pdp, detect_mean_wbs
from .network import nbs_detect, refine_network
from .nonparametric import KernelSpec, detect_kde_wbs, detect_ks_wbs
from .polynomial import detect_poly_pdp, refine_poly
from .rkhs import detect_kernel_pdp, refine_kernel

MODELS = ("mean", "poly", "covariance", "network", "ks", "kde", "rkhs")

KS_GRID_STEP_FRACTION = 1e-4   # jump-size grids step this fraction of the support
_MMD_SAMPLES = 2048            # draws per side for the RKHS jump estimate


@dataclass(frozen=True)
class ScenarioSpec:
    """One synthetic data generating process.

    ``segments`` holds one parameter dict per segment (so one more than
    ``change_points``); the expected keys depend on the model:

    - mean: ``{"mean": float}``
    - poly: ``{"coeffs": [c0, c1, ...]}`` for the signal ``sum c_l (t/T)^l``
    - covariance: ``{"cov": {"kind": "identity"|"spiked", ...}}``
    - network: ``{"graphon": {"kind": "constant"|"sbm2", ...}}``
    - ks / rkhs: ``{"dist": {"kind": "normal"|"uniform"|"exponential"|"laplace", ...}}``
    - kde: ``{"dist": {"kind": "gaussian", "mean": [...], "scale": s}}``
    """

    model: str
    T: int
    change_points: tuple[int, ...]
    segments: tuple[dict, ...]
    sigma: float = 1.0
    seed: int = 0
    p: int | None = None
    n: int | None = None
    r: int | None = None
    kernel: dict | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.T < 2:
            raise ValueError("T must be at least 2")
        cps = tuple(int(c) for c in self.change_points)
        if list(cps) != sorted(set(cps)):
            raise ValueError("change points must be strictly increasing")
        if cps and not (2 <= cps[0] and cps[-1] <= self.T):
            raise ValueError("change points must lie in {2, ..., T}")
        if len(self.segments) != len(cps) + 1:
            raise ValueError("need exactly one segment parameter set per segment")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class GroundTruth:
    """Planted change points with jump sizes in the model's own norm."""

    change_points: tuple[int, ...]
    kappas: tuple[float, ...]
    delta: int
    extra: dict = field(default_factory=dict)

    @property
    def kappa(self):
        return min(self.kappas) if self.kappas else 0.0


def _segment_bounds(spec):
    edges = [1] + list(spec.change_points) + [spec.T + 1]
    return list(zip(edges[:-1], edges[1:]))


def _delta(spec):
    edges = [1] + list(spec.change_points) + [spec.T + 1]
    return min(b - a for a, b in zip(edges[:-1], edges[1:]))


# ---------------------------------------------------------------------------
# Per-model parameter materialisation
# ---------------------------------------------------------------------------

def _cov_matrix(param, p):
    kind = param.get("kind", "identity")
    if kind == "identity":
        return float(param.get("scale", 1.0)) * np.eye(p)
    if kind == "spiked":
        base = float(param.get("base", 1.0)) * np.eye(p)
        theta = float(param["theta"])
        if "vector" in param:
            v = np.asarray(param["vector"], dtype=np.float64)
        else:
            v = np.zeros(p)
            v[int(param.get("axis", 0))] = 1.0
        v = v / np.linalg.norm(v)
        return base + theta * np.outer(v, v)
    raise ValueError(f"unknown covariance kind {kind!r}")


def _graphon_matrix(param, n):
    kind = param["kind"]
    if kind == "constant":
        theta = np.full((n, n), float(param["p"]))
    elif kind == "sbm2":
        p_in, p_out = float(param["p_in"]), float(param["p_out"])
        half = (n + 1) // 2
        z = np.zeros(n, dtype=int)
        z[half:] = 1
        if param.get("swap", False):
            p_in, p_out = p_out, p_in
        theta = np.where(np.equal.outer(z, z), p_in, p_out)
    else:
        raise ValueError(f"unknown graphon kind {kind!r}")
    if theta.min() < 0 or theta.max() > 1:
        raise ValueError("graphon entries must lie in [0, 1]")
    np.fill_diagonal(theta, 0.0)
    return theta


_DIST_KINDS = ("normal", "uniform", "exponential", "laplace")


def _frozen_dist(param):
    kind = param["kind"]
    if kind == "normal":
        return sps.norm(loc=param.get("loc", 0.0), scale=param.get("scale", 1.0))
    if kind == "uniform":
        low, high = param.get("low", 0.0), param.get("high", 1.0)
        return sps.uniform(loc=low, scale=high - low)
    if kind == "exponential":
        return sps.expon(scale=param.get("scale", 1.0))
    if kind == "laplace":
        return sps.laplace(loc=param.get("loc", 0.0), scale=param.get("scale", 1.0))
    raise ValueError(f"unknown distribution kind {kind!r}; choose from {_DIST_KINDS}")


# ---------------------------------------------------------------------------
# Jump sizes (model-specific norms)
# ---------------------------------------------------------------------------

def _recentre_coeffs(coeffs, s, deg):
    """Taylor-shift global monomial coefficients to powers of ``x - s``."""
    a = np.zeros(deg)
    for l in range(deg):
        for j in range(l, len(coeffs)):
            a[l] += math.comb(j, l) * coeffs[j] * s ** (j - l)
    return a


def _poly_jump(spec, k):
    """Smallest-order coefficient gap after recentring both pieces at the change.

    Both neighbouring polynomials are rewritten in powers of
    ``x - eta_k / T``; the jump order is the first coefficient index where
    they differ and the jump size the absolute gap there.
    """
    eta = spec.change_points[k]
    s = eta / spec.T
    left = list(spec.segments[k]["coeffs"])
    right = list(spec.segments[k + 1]["coeffs"])
    deg = max(len(left), len(right))
    diff = np.abs(_recentre_coeffs(left, s, deg) - _recentre_coeffs(right, s, deg))
    orders = np.flatnonzero(diff > 1e-12)
    if orders.size == 0:
        raise ValueError(f"segments around change {eta} share the same polynomial")
    return float(diff[orders[0]]), int(orders[0])


def _ks_support_grid(d1, d2):
    eps = KS_GRID_STEP_FRACTION
    lo = min(d1.ppf(eps), d2.ppf(eps))
    hi = max(d1.ppf(1 - eps), d2.ppf(1 - eps))
    return np.linspace(lo, hi, int(1.0 / eps) + 1)


def _ks_jump(d1, d2):
    z = _ks_support_grid(d1, d2)
    return float(np.max(np.abs(d1.cdf(z) - d2.cdf(z))))


def _kde_jump(m1, s1, m2, s2):
    """Sup-density distance between two isotropic gaussians.

    The supremum is attained on the line through the two means, so a fine
    one-dimensional grid along that line suffices.
    """
    m1 = np.asarray(m1, dtype=np.float64)
    m2 = np.asarray(m2, dtype=np.float64)
    p = m1.size
    gap = float(np.linalg.norm(m2 - m1))
    span = gap + 6.0 * max(s1, s2)
    ts = np.linspace(-span, span, 20001)
    if gap > 0:
        u = (m2 - m1) / gap
    else:
        u = np.zeros(p)
        u[0] = 1.0
    c1 = (2 * math.pi * s1 * s1) ** (-p / 2.0)
    c2 = (2 * math.pi * s2 * s2) ** (-p / 2.0)
    f1 = c1 * np.exp(-0.5 * ts ** 2 / (s1 * s1))
    f2 = c2 * np.exp(-0.5 * (ts - gap) ** 2 / (s2 * s2))
    return float(np.max(np.abs(f1 - f2)))


def _mmd_jump(param1, param2, kernel, seed):
    """RKHS-norm jump between two scalar distributions, by Monte Carlo MMD."""
    kernel = kernel or {"kind": "rbf", "gamma": 1.0}
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xD15D]))
    xs = _frozen_dist(param1).rvs(size=_MMD_SAMPLES, random_state=rng)
    ys = _frozen_dist(param2).rvs(size=_MMD_SAMPLES, random_state=rng)

    def kmat(a, b):
        if kernel["kind"] == "linear":
            return np.outer(a, b)
        g = float(kernel.get("gamma", 1.0))
        return np.exp(-g * (a[:, None] - b[None, :]) ** 2)

    mmd2 = kmat(xs, xs).mean() + kmat(ys, ys).mean() - 2.0 * kmat(xs, ys).mean()
    return math.sqrt(max(mmd2, 0.0))


def _truth(spec):
    kappas = []
    extra = {}
    if spec.model == "mean":
        for k in range(len(spec.change_points)):
            kappas.append(abs(float(spec.segments[k + 1]["mean"]) - float(spec.segments[k]["mean"])))
    elif spec.model == "poly":
        orders = []
        for k in range(len(spec.change_points)):
            kap, order = _poly_jump(spec, k)
            kappas.append(kap)
            orders.append(order)
        extra["jump_orders"] = tuple(orders)
    elif spec.model == "covariance":
        for k in range(len(spec.change_points)):
            d = _cov_matrix(spec.segments[k + 1]["cov"], spec.p) - _cov_matrix(spec.segments[k]["cov"], spec.p)
            kappas.append(float(np.max(np.abs(np.linalg.eigvalsh(d)))))
    elif spec.model == "network":
        thetas = [_graphon_matrix(seg["graphon"], spec.n) for seg in spec.segments]
        rho = max(float(t.max()) for t in thetas)
        for k in range(len(spec.change_points)):
            kappas.append(float(np.linalg.norm(thetas[k + 1] - thetas[k])))
        extra["rho"] = rho
        if kappas:
            extra["kappa0"] = min(kappas) / (spec.n * rho)
    elif spec.model in ("ks", "rkhs"):
        dists = [_frozen_dist(seg["dist"]) for seg in spec.segments]
        for k in range(len(spec.change_points)):
            if spec.model == "ks":
                kappas.append(_ks_jump(dists[k], dists[k + 1]))
            else:
                kappas.append(_mmd_jump(spec.segments[k]["dist"], spec.segments[k + 1]["dist"],
                                        spec.kernel, spec.seed))
    elif spec.model == "kde":
        for k in range(len(spec.change_points)):
            a, b = spec.segments[k]["dist"], spec.segments[k + 1]["dist"]
            kappas.append(_kde_jump(a["mean"], a.get("scale", 1.0), b["mean"], b.get("scale", 1.0)))
    if any(k <= 0 for k in kappas):
        raise ValueError("all jump sizes must be strictly positive")
    return GroundTruth(tuple(spec.change_points), tuple(kappas), _delta(spec), extra)


# ---------------------------------------------------------------------------
# Data generation
# ---------------------------------------------------------------------------

def poly_signal(spec):
    """Discretised piecewise-polynomial signal on the grid ``t / T``."""
    x = np.zeros(spec.T)
    for (a, b), seg in zip(_segment_bounds(spec), spec.segments):
        ts = np.arange(a, b) / spec.T
        coeffs = np.asarray(seg["coeffs"], dtype=np.float64)
        x[a - 1:b - 1] = sum(c * ts ** l for l, c in enumerate(coeffs))
    return x


def mean_signal(spec):
    x = np.zeros(spec.T)
    for (a, b), seg in zip(_segment_bounds(spec), spec.segments):
        x[a - 1:b - 1] = float(seg["mean"])
    return x


def generate(spec):
    """Draw one realisation of the scenario; returns ``(data, GroundTruth)``.

    With ``sigma = 0`` the additive-noise models return the exact signal.
    The network generator requires ``n * rho >= log n`` and the covariance
    jump sizes automatically satisfy the ``kappa <= 4 sigma^2`` family
    inequality (checked defensively).
    """
    truth = _truth(spec)
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed))
    if spec.model in ("mean", "poly"):
        signal = mean_signal(spec) if spec.model == "mean" else poly_signal(spec)
        noise = rng.standard_normal(spec.T) if spec.sigma > 0 else 0.0
        return signal + spec.sigma * noise, truth
    if spec.model == "covariance":
        if spec.p is None:
            raise ValueError("covariance scenarios need the dimension p")
        covs = [_cov_matrix(seg["cov"], spec.p) for seg in spec.segments]
        sigma2 = max(float(np.max(np.linalg.eigvalsh(c))) for c in covs)
        if truth.kappas and truth.kappa > 4.0 * sigma2:
            raise ValueError("covariance jump exceeds the 4 sigma^2 family bound")
        x = np.empty((spec.T, spec.p))
        for (a, b), cov in zip(_segment_bounds(spec), covs):
            root = np.linalg.cholesky(cov)
            x[a - 1:b - 1] = rng.standard_normal((b - a, spec.p)) @ root.T
        return x, truth
    if spec.model == "network":
        if spec.n is None:
            raise ValueError("network scenarios need the node count n")
        n = spec.n
        rho = truth.extra["rho"]
        if n * rho < math.log(n):
            raise ValueError(f"need n * rho >= log n, got {n * rho:.3f} < {math.log(n):.3f}")
        thetas = [_graphon_matrix(seg["graphon"], n) for seg in spec.segments]
        a = np.zeros((spec.T, n, n), dtype=np.uint8)
        iu = np.triu_indices(n, k=1)
        for (lo, hi), theta in zip(_segment_bounds(spec), thetas):
            pu = theta[iu]
            draws = rng.random((hi - lo, pu.size)) < pu
            for i, t in enumerate(range(lo, hi)):
                m = a[t - 1]
                m[iu] = draws[i]
                a[t - 1] = m + m.T
        return a, truth
    if spec.model in ("ks", "rkhs"):
        x = np.empty(spec.T)
        for (a, b), seg in zip(_segment_bounds(spec), spec.segments):
            x[a - 1:b - 1] = _frozen_dist(seg["dist"]).rvs(size=b - a, random_state=rng)
        return x, truth
    if spec.model == "kde":
        if spec.p is None:
            raise ValueError("kde scenarios need the dimension p")
        x = np.empty((spec.T, spec.p))
        for (a, b), seg in zip(_segment_bounds(spec), spec.segments):
            mean = np.asarray(seg["dist"]["mean"], dtype=np.float64)
            scale = float(seg["dist"].get("scale", 1.0))
            x[a - 1:b - 1] = mean + scale * rng.standard_normal((b - a, spec.p))
        return x, truth
    raise ValueError(f"unknown model {spec.model!r}")


# ---------------------------------------------------------------------------
# Detector dispatch (shared with the CLI)
# ---------------------------------------------------------------------------

def _intervals_for(T, config, seed):
    M = int(config.get("intervals", 100))
    max_length = config.get("max_length")
    return sample_intervals(T, M, max_length=max_length, seed=seed)


def run_detector(model, data, config, seed=0):
    """Run the configured detector on one dataset, on the original time scale.

    ``config`` carries ``method`` (``pdp``, ``wbs`` or ``refined``) plus the
    tuning values of the model's detector.  Two-sample methods (covariance
    and network scans) split even/odd internally and map estimates back via
    ``t -> 2t``.  Interval sets for scan methods are drawn from ``seed``.
    """
    method = config.get("method", "pdp")
    if model == "mean":
        if method == "wbs":
            ivs = _intervals_for(len(data), config, seed)
            return detect_mean_wbs(data, ivs, tau=config.get("tau"))
        if method == "pdp":
            return detect_mean_pdp(data, lam=config.get("lam"))
    elif model == "poly":
        r = int(config.get("r", 1))
        if method == "pdp":
            return detect_poly_pdp(data, r, config["lam"])
        if method == "refined":
            initial = detect_poly_pdp(data, r, config["lam"])
            return refine_poly(data, r, initial) if initial else initial
    elif model == "covariance":
        if method == "wbs":
            x, w = split_even_odd(np.asarray(data))
            ivs = _intervals_for(x.shape[0], config, seed)
            half = detect_cov_wbsip(x, w, ivs, tau=config.get("tau"),
                                    pc_buffer=config.get("pc_buffer"),
                                    scan_buffer=config.get("scan_buffer"))
            return [2 * t for t in half]
    elif model == "network":
        if method in ("wbs", "refined"):
            x, w = split_even_odd(np.asarray(data))
            ivs = _intervals_for(x.shape[0], config, seed)
            half = nbs_detect(x, w, ivs, tau1=config.get("tau1"))
            if method == "refined" and half:
                half = refine_network(x, w, half, tau2=config.get("tau2"),
                                      tau3=config.get("tau3"))
            return [2 * t for t in half]
    elif model == "ks":
        if method == "wbs":
            ivs = _intervals_for(len(data), config, seed)
            return detect_ks_wbs(data, ivs, tau=config.get("tau"))
    elif model == "kde":
        if method == "wbs":
            x = np.asarray(data, dtype=np.float64)
            spec = KernelSpec(config.get("kernel_family", "gaussian"),
                              float(config["bandwidth"]), x.shape[1])
            ivs = _intervals_for(x.shape[0], config, seed)
            return detect_kde_wbs(x, ivs, config["tau"], spec)
    elif model == "rkhs":
        kernel = config.get("kernel", "rbf")
        gamma = config.get("gamma")
        if method == "pdp":
            return detect_kernel_pdp(data, kernel, config["lam"], gamma=gamma)
        if method == "refined":
            initial = detect_kernel_pdp(data, kernel, config["lam"], gamma=gamma)
            return refine_kernel(data, kernel, initial, gamma=gamma) if initial else initial
    raise ValueError(f"method {method!r} is not supported for model {model!r}")


# ---------------------------------------------------------------------------
# Rate sweeps
# ---------------------------------------------------------------------------

def single_change_scenario(model, point, seed=0):
    """Standard one-change scenario from a sweep grid point.

    ``point`` supplies ``T``, ``delta`` (spacing of the post-change segment)
    and a model-specific strength parameter: ``kappa`` for mean jumps and
    slope changes, ``theta`` for covariance spikes, ``p_in`` / ``p_out`` for
    network flips, ``scale2`` or ``shift`` for the distribution families.
    """
    T = int(point["T"])
    delta = int(point.get("delta", T // 2))
    if not 2 <= delta <= T // 2:
        raise ValueError("delta must lie in [2, T/2] for a single-change scenario")
    eta = T - delta + 1
    sigma = float(point.get("sigma", 1.0))
    if model == "mean":
        segs = ({"mean": 0.0}, {"mean": float(point["kappa"])})
    elif model == "poly":
        kappa = float(point["kappa"])
        segs = ({"coeffs": [0.0]}, {"coeffs": [-kappa * eta / T, kappa]})
    elif model == "covariance":
        p = int(point.get("p", 10))
        segs = ({"cov": {"kind": "identity"}},
                {"cov": {"kind": "spiked", "theta": float(point["theta"]), "axis": 0}})
        return ScenarioSpec(model, T, (eta,), segs, sigma=sigma, seed=seed, p=p)
    elif model == "network":
        n = int(point.get("n", 50))
        g = {"kind": "sbm2", "p_in": float(point["p_in"]), "p_out": float(point["p_out"])}
        segs = ({"graphon": g}, {"graphon": dict(g, swap=True)})
        return ScenarioSpec(model, T, (eta,), segs, sigma=0.0, seed=seed, n=n)
    elif model in ("ks", "rkhs"):
        if "scale2" in point:
            d2 = {"kind": "normal", "scale": float(point["scale2"])}
        else:
            d2 = {"kind": "normal", "loc": float(point["shift"])}
        segs = ({"dist": {"kind": "normal"}}, {"dist": d2})
        return ScenarioSpec(model, T, (eta,), segs, sigma=0.0, seed=seed,
                            kernel=point.get("kernel"))
    elif model == "kde":
        p = int(point.get("p", 2))
        shift = np.zeros(p)
        shift[0] = float(point["shift"])
        segs = ({"dist": {"kind": "gaussian", "mean": [0.0] * p}},
                {"dist": {"kind": "gaussian", "mean": shift.tolist()}})
        return ScenarioSpec(model, T, (eta,), segs, sigma=0.0, seed=seed, p=p)
    else:
        raise ValueError(f"unknown model {model!r}")
    return ScenarioSpec(model, T, (eta,), segs, sigma=sigma, seed=seed)


@dataclass(frozen=True)
class RatePoint:
    """Aggregated Monte Carlo results for one grid point."""

    point: dict
    reps: int
    freq_match: float
    median_error: float
    q90_error: float
    mean_runtime_ms: float


@dataclass(frozen=True)
class RateReport:
    """Sweep results; the CSV view leaves out runtimes so reruns are identical."""

    model: str
    rows: tuple[RatePoint, ...]

    CSV_HEADER = "point,reps,freq_match,median_error,q90_error"

    def to_csv(self):
        lines = [self.CSV_HEADER]
        for row in self.rows:
            point = ";".join(f"{k}={row.point[k]}" for k in sorted(row.point))
            lines.append(f"{point},{row.reps},{row.freq_match},{row.median_error},{row.q90_error}")
        return "\n".join(lines) + "\n"

    def summary_lines(self):
        out = []
        for row in self.rows:
            point = " ".join(f"{k}={row.point[k]}" for k in sorted(row.point))
            out.append(
                f"{self.model} {point}: match {row.freq_match:.3f}, "
                f"median err {row.median_error}, q90 {row.q90_error}, "
                f"mean {row.mean_runtime_ms:.1f} ms over {row.reps} reps"
            )
        return out


def derive_seed(*parts):
    """Deterministic integer sub-seed from hashable integer parts."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _one_rep(model, point, detector, seed_parts):
    spec = single_change_scenario(model, point, seed=derive_seed(*seed_parts))
    data, truth = generate(spec)
    interval_seed = derive_seed(*seed_parts, 1)
    t0 = time.perf_counter()
    cps = run_detector(model, data, detector, seed=interval_seed)
    ms = (time.perf_counter() - t0) * 1e3
    err = hausdorff(cps, truth.change_points)
    return len(cps) == len(truth.change_points), err, ms


def run_rate_sweep(model, grid, reps, detector, seed=0, threads=1):
    """Monte Carlo sweep over grid points; see :class:`RateReport`.

    Replicates are independent given their derived sub-seeds, so they may run
    on a thread pool; the report is assembled in grid order either way.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    rows = []
    for pi, point in enumerate(grid):
        jobs = [(model, point, detector, [int(seed), pi, rep]) for rep in range(reps)]
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(lambda j: _one_rep(*j), jobs))
            results = list(results)
        else:
            results = [_one_rep(*j) for j in jobs]
        matches = [r[0] for r in results]
        errors = np.array([r[1] for r in results])
        times = [r[2] for r in results]
        # order-statistic quantiles stay well defined when errors are infinite
        rows.append(RatePoint(
            point=dict(point),
            reps=reps,
            freq_match=float(np.mean(matches)),
            median_error=float(np.quantile(errors, 0.5, method="inverted_cdf")),
            q90_error=float(np.quantile(errors, 0.9, method="inverted_cdf")),
            mean_runtime_ms=float(np.mean(times)),
        ))
    return RateReport(model, tuple(rows))

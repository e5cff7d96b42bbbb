"""Offline change point detection toolkit.

Penalised dynamic programming and wild-binary-segmentation detectors for
piecewise-constant means, polynomial trends, covariances, dynamic networks
and distribution changes (empirical CDF, kernel density, RKHS), plus seeded
scenario generators and a Monte Carlo harness to measure detection frequency
and localisation error across parameter sweeps.
"""

from .backend import backend_name
from .core import (
    Interval,
    NumericError,
    RandomIntervalSet,
    estimate_noise_scale,
    hausdorff,
    sample_intervals,
    solve_min_partition,
    wbs_scan,
)
from .covariance import (
    detect_cov_wbsip,
    leading_eigenpair,
    pc_directions,
    projected_square_series,
    split_even_odd,
)
from .mean import cusum, detect_mean_pdp, detect_mean_wbs, mean_cost
from .network import matrix_cusum, nbs_detect, refine_network, usvt
from .nonparametric import (
    KernelSpec,
    bandwidth_rule_of_thumb,
    detect_kde_wbs,
    detect_ks_wbs,
    kde_cusum,
    ks_cusum,
)
from .polynomial import cross_term, design_matrix, detect_poly_pdp, poly_cost, refine_poly
from .rkhs import detect_kernel_pdp, gram, kernel_cost, median_heuristic_gamma, refine_kernel
from .simgen import (
    GroundTruth,
    RateReport,
    ScenarioSpec,
    generate,
    run_detector,
    run_rate_sweep,
    single_change_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "Interval",
    "KernelSpec",
    "GroundTruth",
    "NumericError",
    "RandomIntervalSet",
    "RateReport",
    "ScenarioSpec",
    "backend_name",
    "bandwidth_rule_of_thumb",
    "cross_term",
    "cusum",
    "design_matrix",
    "detect_cov_wbsip",
    "detect_kde_wbs",
    "detect_kernel_pdp",
    "detect_ks_wbs",
    "detect_mean_pdp",
    "detect_mean_wbs",
    "detect_poly_pdp",
    "estimate_noise_scale",
    "generate",
    "gram",
    "hausdorff",
    "kde_cusum",
    "kernel_cost",
    "ks_cusum",
    "leading_eigenpair",
    "matrix_cusum",
    "mean_cost",
    "median_heuristic_gamma",
    "nbs_detect",
    "pc_directions",
    "poly_cost",
    "projected_square_series",
    "refine_kernel",
    "refine_network",
    "refine_poly",
    "run_detector",
    "run_rate_sweep",
    "sample_intervals",
    "single_change_scenario",
    "solve_min_partition",
    "split_even_odd",
    "usvt",
    "wbs_scan",
]

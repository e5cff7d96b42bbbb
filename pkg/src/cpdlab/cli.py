"""Command line front end: detect on data files, simulate scenarios, run sweeps.

All file I/O lives here.  Result documents are schema-versioned JSON with
every effective tuning value (defaults resolved) so a run can be reproduced
from its output alone; wall time goes to stdout, not into the file, so
identical configurations produce byte-identical results.

Exit codes: 0 success, 2 usage or parse error, 3 internal numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import simgen
from .core import NumericError, estimate_noise_scale
from .covariance import default_cov_tau, split_even_odd
from .mean import default_mean_lambda, default_mean_tau
from .network import default_nbs_tau, default_usvt_thresholds
from .nonparametric import bandwidth_rule_of_thumb, default_ks_tau
from .rkhs import median_heuristic_gamma

SCHEMA_VERSION = 1
MODELS = simgen.MODELS
METHODS = ("pdp", "wbs", "refined")


class CliError(Exception):
    """Usage or input error; exits with status 2."""


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def read_series_csv(path, columns=None):
    """Read a numeric CSV with one row per time point; optional header row."""
    rows = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CliError(f"cannot open input {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                if lineno == 1:
                    continue  # header row
                raise CliError(f"{path}:{lineno}: non-numeric value in {row!r}") from None
    if not rows:
        raise CliError(f"{path}: no numeric rows found")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise CliError(f"{path}: row {i + 1} has {len(row)} columns, expected {width}")
    data = np.asarray(rows)
    if columns == 1:
        if width != 1:
            raise CliError(f"{path}: model expects a single column, found {width}")
        return data[:, 0]
    return data


def write_series_csv(path, data):
    data = np.atleast_2d(np.asarray(data, dtype=np.float64).T).T
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(data.shape[1])])
        for row in data:
            writer.writerow([repr(float(v)) for v in row])


def read_edgelist_csv(path):
    """Edge-list rows ``(t, i, j)`` with a ``# n=..., T=...`` comment header."""
    n = T = None
    edges = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CliError(f"cannot open input {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for part in line.lstrip("#").split(","):
                    key, _, value = part.partition("=")
                    key = key.strip()
                    if key in ("n", "T"):
                        try:
                            if key == "n":
                                n = int(value)
                            else:
                                T = int(value)
                        except ValueError:
                            raise CliError(f"{path}:{lineno}: bad header value {part!r}") from None
                continue
            if line.lower().replace(" ", "") == "t,i,j":
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise CliError(f"{path}:{lineno}: expected 't,i,j', got {line!r}")
            try:
                t, i, j = (int(v) for v in parts)
            except ValueError:
                raise CliError(f"{path}:{lineno}: non-integer edge entry in {line!r}") from None
            edges.append((t, i, j))
    if n is None or T is None:
        raise CliError(f"{path}: missing '# n=..., T=...' header line")
    a = np.zeros((T, n, n), dtype=np.uint8)
    for t, i, j in edges:
        if not (1 <= t <= T and 1 <= i < j <= n):
            raise CliError(f"{path}: edge ({t}, {i}, {j}) outside 1<=t<=T, 1<=i<j<=n")
        a[t - 1, i - 1, j - 1] = 1
        a[t - 1, j - 1, i - 1] = 1
    return a


def write_edgelist_csv(path, a):
    a = np.asarray(a)
    T, n = a.shape[0], a.shape[1]
    with open(path, "w", newline="") as fh:
        fh.write(f"# n={n}, T={T}\n")
        fh.write("t,i,j\n")
        for t in range(T):
            ii, jj = np.nonzero(np.triu(a[t], k=1))
            for i, j in zip(ii, jj):
                fh.write(f"{t + 1},{i + 1},{j + 1}\n")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Key-value config files
# ---------------------------------------------------------------------------

def parse_config_file(path):
    out = {}
    try:
        fh = open(path)
    except OSError as exc:
        raise CliError(f"cannot open config {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CliError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            out[key.strip()] = _parse_value(value.strip())
    return out


def _parse_value(raw):
    if raw.startswith(("{", "[")):
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise CliError(f"bad JSON value {raw!r}: {exc}") from exc
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            continue
    return raw


# ---------------------------------------------------------------------------
# Detect
# ---------------------------------------------------------------------------

_SCALAR_MODELS = ("mean", "poly", "ks", "rkhs")

_DETECT_KEYS = {
    "model", "method", "input", "output", "lam", "tau", "intervals",
    "max_length", "bandwidth", "r", "kernel", "gamma", "tau1", "tau2",
    "tau3", "seed", "threads", "pc_buffer", "scan_buffer",
}


def _merge_config(args, allowed):
    merged = {}
    if args.config:
        cfg = parse_config_file(args.config)
        unknown = set(cfg) - allowed
        if unknown:
            raise CliError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(cfg)
    for key in allowed:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def _effective_detect_params(model, method, cfg, data):
    """Resolve every tuning default so the result file is self-describing."""
    params = {}
    unsupported = CliError(f"method {method!r} is not supported for model {model!r}")
    if model == "mean":
        if method == "pdp":
            params["lam"] = float(cfg.get("lam", default_mean_lambda(data)))
        elif method == "wbs":
            params["tau"] = float(cfg.get("tau", default_mean_tau(data)))
        else:
            raise unsupported
    elif model == "poly":
        if method not in ("pdp", "refined"):
            raise unsupported
        params["r"] = int(cfg.get("r", 1))
        sigma = estimate_noise_scale(np.asarray(data, dtype=np.float64))
        params["lam"] = float(cfg.get("lam", 2.0 * sigma ** 2 * math.log(len(data))))
    elif model == "covariance":
        if method != "wbs":
            raise unsupported
        x, _ = split_even_odd(np.asarray(data))
        th, p = x.shape
        params["tau"] = float(cfg.get("tau", default_cov_tau(x)))
        params["pc_buffer"] = float(cfg.get("pc_buffer", p * math.log(th)))
        params["scan_buffer"] = float(cfg.get("scan_buffer", math.log(th)))
    elif model == "network":
        if method not in ("wbs", "refined"):
            raise unsupported
        x, w = split_even_odd(np.asarray(data))
        params["tau1"] = float(cfg.get("tau1", default_nbs_tau(x)))
        if method == "refined":
            d2, d3 = default_usvt_thresholds(w)
            params["tau2"] = float(cfg.get("tau2", d2))
            params["tau3"] = float(cfg.get("tau3", d3))
    elif model == "ks":
        if method != "wbs":
            raise unsupported
        params["tau"] = float(cfg.get("tau", default_ks_tau(len(data))))
    elif model == "kde":
        if method != "wbs":
            raise unsupported
        if "tau" not in cfg:
            raise CliError("kde detection needs an explicit --tau")
        params["tau"] = float(cfg["tau"])
        params["bandwidth"] = float(cfg.get("bandwidth", bandwidth_rule_of_thumb(data)))
        params["kernel_family"] = str(cfg.get("kernel", "gaussian"))
    elif model == "rkhs":
        if method not in ("pdp", "refined"):
            raise unsupported
        if "lam" not in cfg:
            raise CliError("rkhs detection needs an explicit --lambda")
        params["lam"] = float(cfg["lam"])
        params["kernel"] = str(cfg.get("kernel", "rbf"))
        if params["kernel"] == "rbf":
            params["gamma"] = float(cfg.get("gamma", median_heuristic_gamma(data)))
    else:
        raise unsupported
    if method in ("wbs",) or (model == "network" and method == "refined"):
        params["intervals"] = int(cfg.get("intervals", 100))
        ml = cfg.get("max_length")
        params["max_length"] = int(ml) if ml is not None else None
    return params


def cmd_detect(args):
    cfg = _merge_config(args, _DETECT_KEYS)
    model = cfg.get("model")
    if model not in MODELS:
        raise CliError(f"--model must be one of {', '.join(MODELS)}")
    method = cfg.get("method")
    if method not in METHODS:
        raise CliError(f"--method must be one of {', '.join(METHODS)}")
    if "input" not in cfg or "output" not in cfg:
        raise CliError("detect needs --input and --output")
    if model == "network":
        data = read_edgelist_csv(cfg["input"])
    elif model in _SCALAR_MODELS:
        data = read_series_csv(cfg["input"], columns=1)
    else:
        data = read_series_csv(cfg["input"])
    seed = int(cfg.get("seed", 0))
    params = _effective_detect_params(model, method, cfg, data)
    run_cfg = dict(params)
    run_cfg["method"] = method
    t0 = time.perf_counter()
    cps = simgen.run_detector(model, data, run_cfg, seed=seed)
    ms = (time.perf_counter() - t0) * 1e3
    result = {
        "schema_version": SCHEMA_VERSION,
        "model": model,
        "method": method,
        "change_points": [int(c) for c in cps],
        "params": params,
        "seed": seed,
    }
    _write_json(cfg["output"], result)
    print(f"detected {len(cps)} change point(s) in {ms:.1f} ms -> {cfg['output']}")
    return 0


# ---------------------------------------------------------------------------
# Simulate
# ---------------------------------------------------------------------------

_SIMULATE_BASE_KEYS = {"model", "T", "sigma", "seed", "changepoints", "p", "n", "r", "kernel"}


def _scenario_from_config(cfg, seed_override=None):
    unknown = {k for k in cfg if k not in _SIMULATE_BASE_KEYS and not k.startswith("segment.")}
    if unknown:
        raise CliError(f"unknown scenario keys: {', '.join(sorted(unknown))}")
    for key in ("model", "T"):
        if key not in cfg:
            raise CliError(f"scenario config needs '{key}'")
    raw_cps = cfg.get("changepoints", "")
    if isinstance(raw_cps, str):
        cps = tuple(int(v) for v in raw_cps.split(",") if v.strip())
    elif isinstance(raw_cps, int):
        cps = (raw_cps,)
    else:
        cps = tuple(int(v) for v in raw_cps)
    segments = {}
    for key, value in cfg.items():
        if not key.startswith("segment."):
            continue
        parts = key.split(".", 2)
        if len(parts) != 3 or not parts[1].isdigit():
            raise CliError(f"bad segment key {key!r}; use segment.<index>.<field>")
        segments.setdefault(int(parts[1]), {})[parts[2]] = value
    if sorted(segments) != list(range(len(cps) + 1)):
        raise CliError(f"need segment.0 .. segment.{len(cps)} parameter blocks")
    seed = int(cfg.get("seed", 0)) if seed_override is None else int(seed_override)
    try:
        return simgen.ScenarioSpec(
            model=cfg["model"],
            T=int(cfg["T"]),
            change_points=cps,
            segments=tuple(segments[i] for i in range(len(cps) + 1)),
            sigma=float(cfg.get("sigma", 1.0)),
            seed=seed,
            p=int(cfg["p"]) if "p" in cfg else None,
            n=int(cfg["n"]) if "n" in cfg else None,
            r=int(cfg["r"]) if "r" in cfg else None,
            kernel=cfg.get("kernel"),
        )
    except ValueError as exc:
        raise CliError(f"invalid scenario: {exc}") from exc


def cmd_simulate(args):
    if not args.config:
        raise CliError("simulate needs --config with a scenario file")
    if not args.output:
        raise CliError("simulate needs --output")
    cfg = parse_config_file(args.config)
    spec = _scenario_from_config(cfg, seed_override=args.seed)
    try:
        data, truth = simgen.generate(spec)
    except ValueError as exc:
        raise CliError(f"invalid scenario: {exc}") from exc
    if spec.model == "network":
        write_edgelist_csv(args.output, data)
    else:
        write_series_csv(args.output, data)
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "model": spec.model,
        "change_points": [int(c) for c in truth.change_points],
        "kappas": [float(k) for k in truth.kappas],
        "kappa": float(truth.kappa),
        "delta": int(truth.delta),
        "seed": spec.seed,
        "extra": {k: (list(v) if isinstance(v, tuple) else v) for k, v in truth.extra.items()},
    }
    _write_json(args.output + ".truth.json", sidecar)
    print(f"wrote {args.output} and {args.output}.truth.json")
    return 0


# ---------------------------------------------------------------------------
# Benchmark
# ---------------------------------------------------------------------------

_BENCH_BASE_KEYS = {
    "model", "method", "reps", "seed", "threads", "lam", "tau", "tau1", "tau2",
    "tau3", "intervals", "max_length", "bandwidth", "r", "kernel", "gamma",
}
_DETECTOR_KEYS = _BENCH_BASE_KEYS - {"model", "reps", "seed", "threads"}


def cmd_benchmark(args):
    if not args.config:
        raise CliError("benchmark needs --config with a sweep file")
    if not args.output:
        raise CliError("benchmark needs --output")
    cfg = parse_config_file(args.config)
    unknown = {k for k in cfg if k not in _BENCH_BASE_KEYS and not k.startswith("point.")}
    if unknown:
        raise CliError(f"unknown sweep keys: {', '.join(sorted(unknown))}")
    model = cfg.get("model")
    if model not in MODELS:
        raise CliError(f"sweep config needs model, one of {', '.join(MODELS)}")
    points = {}
    for key, value in cfg.items():
        if not key.startswith("point."):
            continue
        parts = key.split(".", 2)
        if len(parts) != 3 or not parts[1].isdigit():
            raise CliError(f"bad point key {key!r}; use point.<index>.<field>")
        points.setdefault(int(parts[1]), {})[parts[2]] = value
    if not points or sorted(points) != list(range(len(points))):
        raise CliError("need contiguous point.0 .. point.N blocks")
    grid = [points[i] for i in range(len(points))]
    detector = {k: v for k, v in cfg.items() if k in _DETECTOR_KEYS}
    seed = int(cfg.get("seed", 0)) if args.seed is None else int(args.seed)
    threads = int(cfg.get("threads", 1)) if args.threads is None else int(args.threads)
    try:
        report = simgen.run_rate_sweep(model, grid, int(cfg.get("reps", 1)), detector,
                                       seed=seed, threads=threads)
    except (ValueError, KeyError) as exc:
        raise CliError(f"invalid sweep: {exc}") from exc
    with open(args.output, "w") as fh:
        fh.write(report.to_csv())
    for line in report.summary_lines():
        print(line)
    print(f"wrote {args.output}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="cpdlab",
        description="Offline change point detection, simulation and benchmarking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("detect", cmd_detect), ("simulate", cmd_simulate),
                     ("benchmark", cmd_benchmark)):
        sp = sub.add_parser(name)
        sp.set_defaults(handler=fn)
        sp.add_argument("--model", choices=MODELS)
        sp.add_argument("--method", choices=METHODS)
        sp.add_argument("--input")
        sp.add_argument("--output")
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--tau", type=float)
        sp.add_argument("--intervals", type=int, help="number of random scan intervals M")
        sp.add_argument("--max-interval-length", dest="max_length", type=int)
        sp.add_argument("--bandwidth", type=float)
        sp.add_argument("--order", dest="r", type=int)
        sp.add_argument("--kernel")
        sp.add_argument("--gamma", type=float)
        sp.add_argument("--tau1", type=float)
        sp.add_argument("--tau2", type=float)
        sp.add_argument("--tau3", type=float)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--config")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command-line orchestration: configs, experiment pipelines, reports.

All commands read a JSON config (schema documented in FORMATS.md), run
deterministically for a fixed seed, and emit JSON reports plus CSV files
ready for external plotting. Failures exit nonzero after printing a
machine-readable error object to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from math import comb
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import gp, select
from .kernels import KERNEL_FAMILIES, CovarianceOperator, KernelSpec, assemble_covariance
from .points import PointSet, grid1d, latin_hypercube, load_points_csv, load_values_csv, save_values_csv

SCHEMA_VERSION = 1
DEFAULT_MAX_POINTS = 20000


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


# ----------------------------------------------------------------- config --


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if cfg.get("schema") != SCHEMA_VERSION:
        raise ConfigError(f"{path}: expected \"schema\": {SCHEMA_VERSION}, got {cfg.get('schema')!r}")
    for key in ("points", "kernel", "k"):
        if key not in cfg:
            raise ConfigError(f"{path}: missing required key {key!r}")
    return cfg


def build_points(spec: dict, base_dir: Path) -> PointSet:
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("points must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "grid1d":
            return grid1d(spec["a"], spec["b"], spec["n"])
        if kind in ("latin-hypercube", "latin_hypercube"):
            return latin_hypercube(spec["n"], spec["dim"], spec.get("seed", 0))
        if kind == "csv":
            path = Path(spec["path"])
            if not path.is_absolute():
                path = base_dir / path
            return load_points_csv(path)
    except KeyError as exc:
        raise ConfigError(f"points of type {kind!r} is missing field {exc}") from None
    raise ConfigError(f"unknown points type {kind!r}; expected grid1d, latin-hypercube, or csv")


def build_kernel(spec: dict) -> KernelSpec:
    if not isinstance(spec, dict):
        raise ConfigError("kernel must be an object")
    missing = [key for key in ("family", "sigma_f", "ell", "eta") if key not in spec]
    if missing:
        raise ConfigError(f"kernel is missing fields {missing}; expected family (one of {KERNEL_FAMILIES}), sigma_f, ell, eta")
    try:
        return KernelSpec(family=spec["family"], sigma_f=float(spec["sigma_f"]), ell=float(spec["ell"]), eta=float(spec["eta"]))
    except ValueError as exc:
        raise ConfigError(f"invalid kernel: {exc}") from None


def normalize_method(entry) -> dict:
    """Accept both {"name": ...} objects and compact strings like "cholgks-greedy"."""
    if isinstance(entry, str):
        if entry in ("cholgks-greedy", "cholgks-random"):
            return {"name": "cholgks", "pivoting": entry.split("-", 1)[1]}
        return {"name": entry}
    if isinstance(entry, dict) and "name" in entry:
        return dict(entry)
    raise ConfigError(f"method entries must be strings or objects with a 'name', got {entry!r}")


KNOWN_METHODS = ("conceptual-gks", "nysgks", "cholgks", "greedy", "random")


class Experiment:
    """Resolved config: points, kernel, and dense-or-operator access to K."""

    def __init__(self, cfg: dict, base_dir: Path, seed_override=None):
        self.cfg = cfg
        self.points = build_points(cfg["points"], base_dir)
        self.kernel = build_kernel(cfg["kernel"])
        self.k = int(cfg["k"])
        if not 1 <= self.k <= self.points.n:
            raise ConfigError(f"k = {self.k} must lie in [1, n] with n = {self.points.n} candidates")
        self.seed = int(seed_override if seed_override is not None else cfg.get("seed", 0))
        self.max_points = int(cfg.get("max_points", DEFAULT_MAX_POINTS))
        self._K = None

    @property
    def n(self) -> int:
        return self.points.n

    @property
    def eta(self) -> float:
        return self.kernel.eta

    def dense_K(self) -> np.ndarray:
        if self._K is None:
            if self.n > self.max_points:
                raise ConfigError(
                    f"n = {self.n} exceeds the dense cap max_points = {self.max_points}; "
                    "raise max_points or use only matrix-free methods"
                )
            self._K = assemble_covariance(self.kernel, self.points)
        return self._K

    def operator(self) -> CovarianceOperator:
        return CovarianceOperator(self.kernel, self.points)

    def access(self):
        """Dense matrix when within the cap, otherwise the matrix-free operator."""
        return self.dense_K() if self.n <= self.max_points else self.operator()

    def resolved_config(self) -> dict:
        out = dict(self.cfg)
        out["seed"] = self.seed
        out["schema"] = SCHEMA_VERSION
        return out


# ---------------------------------------------------------------- helpers --


def _parallel_map(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _result_record(result: select.SelectionResult) -> dict:
    rec = {
        "method": result.method,
        "indices": [int(i) for i in result.indices],
        "d_optimality": result.d_optimality,
        "wall_time": result.wall_time,
        "seed": result.seed,
    }
    meta = {key: val for key, val in result.metadata.items() if key != "raw_pivots"}
    if "raw_pivots" in result.metadata:
        raw = [int(i) for i in result.metadata["raw_pivots"]]
        meta["raw_pivots"] = raw
    if meta:
        rec["metadata"] = meta
    return rec


def _emit_json(payload: dict, out_path) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out_path is None:
        print(text)
    else:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(text + "\n")


# --------------------------------------------------------------- commands --


def cmd_select(args) -> int:
    cfg = load_config(args.config)
    exp = Experiment(cfg, Path(args.config).parent, seed_override=args.seed)
    methods = [normalize_method(m) for m in cfg.get("methods", [])]
    if not methods:
        raise ConfigError("config must list at least one method under 'methods'")
    for m in methods:
        if m["name"] not in KNOWN_METHODS:
            raise ConfigError(f"unknown method {m['name']!r}; expected one of {KNOWN_METHODS}")

    access = exp.access()
    records = []
    histogram = None

    def run_method(item):
        idx, method = item
        seed = exp.seed + idx
        name = method["name"]
        if name == "conceptual-gks":
            return select.select_conceptual_gks(exp.dense_K(), exp.k).scored(access, exp.eta)
        if name == "nysgks":
            return select.select_nysgks(access, exp.n, exp.k, p=int(method.get("p", 10)), seed=seed).scored(access, exp.eta)
        if name == "cholgks":
            pivoting = method.get("pivoting", "greedy")
            return select.select_cholesky_gks(access, exp.k, pivoting=pivoting, seed=seed).scored(access, exp.eta)
        if name == "greedy":
            op = exp.operator() if isinstance(access, CovarianceOperator) else None
            column = op.column if op is not None else (lambda j: access[:, j])
            diag = op.diag() if op is not None else np.diag(access)
            return select.select_greedy_efficient(column, diag, exp.n, exp.k, exp.eta).scored(access, exp.eta)
        # random baseline: histogram plus the best-of-trials selection record
        trials = int(method.get("trials", 1))
        hist = select.random_baseline(access, exp.k, exp.eta, trials=trials, seed=seed)
        best_t = int(np.argmax(hist.scores))
        result = select.select_random(exp.n, exp.k, seed=seed + best_t)
        result.method = "random"
        result.metadata["trials"] = trials
        result.metadata["histogram_summary"] = hist.summary()
        return result.scored(access, exp.eta), hist

    outputs = cfg.get("outputs", {})
    for item in enumerate(methods):
        outcome = run_method(item)
        if isinstance(outcome, tuple):
            result, histogram = outcome
        else:
            result = outcome
        records.append(_result_record(result))
        if outputs.get("indices_dir"):
            ind_dir = Path(outputs["indices_dir"])
            ind_dir.mkdir(parents=True, exist_ok=True)
            save_values_csv(ind_dir / f"{result.method}.csv", np.asarray(result.indices, dtype=float), header="index")

    if histogram is not None and outputs.get("histogram"):
        hist_path = Path(outputs["histogram"])
        hist_path.parent.mkdir(parents=True, exist_ok=True)
        save_values_csv(hist_path, histogram.scores, header="d_optimality")

    report = {
        "schema": SCHEMA_VERSION,
        "command": "select",
        "config": exp.resolved_config(),
        "seed": exp.seed,
        "results": records,
    }
    _emit_json(report, args.out or outputs.get("report"))
    return 0


def cmd_reconstruct(args) -> int:
    cfg = load_config(args.config)
    exp = Experiment(cfg, Path(args.config).parent, seed_override=args.seed)
    truth = load_values_csv(args.values)
    if truth.shape[0] != exp.n:
        raise ConfigError(f"values file has {truth.shape[0]} rows but the instance has n = {exp.n} candidates")
    raw = load_values_csv(args.indices)
    selected = raw.astype(int)
    if np.any(selected != raw):
        raise ConfigError(f"{args.indices}: indices must be integers")
    if np.any((selected < 0) | (selected >= exp.n)):
        raise ConfigError(f"{args.indices}: indices out of range [0, {exp.n})")

    rng = np.random.default_rng(exp.seed)
    noise = 0.0 if args.noiseless else exp.eta * rng.standard_normal(selected.size)
    y = truth[selected] + noise

    post = gp.posterior(exp.dense_K(), selected, y, exp.eta, want_full_cov=False)
    truth_targets = truth[post.target_indices]
    rel = gp.relative_error(post.mean, truth_targets)

    out_dir = Path(args.out or "reconstruction")
    out_dir.mkdir(parents=True, exist_ok=True)
    save_values_csv(out_dir / "mean.csv", post.mean, header="mean")
    save_values_csv(out_dir / "std.csv", np.sqrt(np.maximum(post.cov_diag, 0.0)), header="std")
    save_values_csv(out_dir / "targets.csv", post.target_indices.astype(float), header="index")

    report = {
        "schema": SCHEMA_VERSION,
        "command": "reconstruct",
        "config": exp.resolved_config(),
        "seed": exp.seed,
        "noiseless": bool(args.noiseless),
        "selected_indices": [int(i) for i in selected],
        "relative_error": rel,
        "outputs": {"mean": str(out_dir / "mean.csv"), "std": str(out_dir / "std.csv"), "targets": str(out_dir / "targets.csv")},
    }
    if args.mean is not None:
        mu = load_values_csv(args.mean)
        if mu.shape[0] != exp.n:
            raise ConfigError(f"mean file has {mu.shape[0]} rows but the instance has n = {exp.n} candidates")
        report["relative_error_unnormalized"] = gp.relative_error_unnormalized(
            post.mean, truth_targets, mu[post.target_indices]
        )
    _emit_json(report, out_dir / "report.json")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    exp = Experiment(cfg, Path(args.config).parent, seed_override=args.seed)
    truth = load_values_csv(args.values)
    if truth.shape[0] != exp.n:
        raise ConfigError(f"values file has {truth.shape[0]} rows but the instance has n = {exp.n} candidates")

    sweep_cfg = cfg.get("sweep", {})
    sigma_grid = args.sigma_grid or sweep_cfg.get("sigma_grid")
    ell_grid = args.ell_grid or sweep_cfg.get("ell_grid")
    if not sigma_grid or not ell_grid:
        raise ConfigError("sweep needs sigma and ell grids (config 'sweep' section or --sigma-grid/--ell-grid)")
    approx_rank = sweep_cfg.get("approx_rank")
    dense_cap = int(sweep_cfg.get("dense_cap", 4000))

    best, table = gp.hyperparameter_sweep(
        exp.points,
        truth,
        exp.kernel.family,
        [float(s) for s in sigma_grid],
        [float(e) for e in ell_grid],
        exp.eta,
        approx_rank=approx_rank,
        seed=exp.seed,
        dense_cap=dense_cap,
    )
    report = {
        "schema": SCHEMA_VERSION,
        "command": "sweep",
        "config": exp.resolved_config(),
        "seed": exp.seed,
        "sigma_grid": [float(s) for s in sigma_grid],
        "ell_grid": [float(e) for e in ell_grid],
        "approx_rank": approx_rank,
        "best": {"family": best.family, "sigma_f": best.sigma_f, "ell": best.ell, "eta": best.eta},
        "log_marginal_likelihood": [[float(v) for v in row] for row in table],
    }
    _emit_json(report, args.out)
    return 0


def cmd_baseline(args) -> int:
    cfg = load_config(args.config)
    exp = Experiment(cfg, Path(args.config).parent, seed_override=args.seed)
    trials = int(args.trials if args.trials is not None else cfg.get("baseline", {}).get("trials", 10000))
    access = exp.access()

    threads = max(1, args.threads)
    chunk = (trials + threads - 1) // threads
    starts = list(range(0, trials, chunk))

    def run_chunk(start: int) -> np.ndarray:
        count = min(chunk, trials - start)
        return select.random_baseline(access, exp.k, exp.eta, trials=count, seed=exp.seed + start).scores

    scores = np.concatenate(_parallel_map(run_chunk, starts, threads)) if starts else np.empty(0)
    hist = select.BaselineHistogram(scores=scores)

    out_csv = args.out or "baseline_histogram.csv"
    Path(out_csv).parent.mkdir(parents=True, exist_ok=True)
    save_values_csv(out_csv, hist.scores, header="d_optimality")
    report = {
        "schema": SCHEMA_VERSION,
        "command": "baseline",
        "config": exp.resolved_config(),
        "seed": exp.seed,
        "summary": hist.summary(),
        "histogram_csv": str(out_csv),
    }
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def cmd_bounds_check(args) -> int:
    cfg = load_config(args.config)
    exp = Experiment(cfg, Path(args.config).parent, seed_override=args.seed)
    bounds_cfg = cfg.get("bounds", {})
    f = float(args.f if args.f is not None else bounds_cfg.get("f", 2.0))
    p = int(bounds_cfg.get("p", 10))
    if comb(exp.n, exp.k) > select.BRUTE_FORCE_BUDGET:
        brute = "never"
    else:
        brute = "auto"
    report = bounds_mod.bound_report(exp.dense_K(), exp.k, exp.eta, f=f, p=p, brute=brute)
    payload = {
        "schema": SCHEMA_VERSION,
        "command": "bounds-check",
        "config": exp.resolved_config(),
        "seed": exp.seed,
        "report": report.to_dict(),
        "all_asserted_ok": report.all_asserted_ok(),
    }
    _emit_json(payload, args.out)
    return 0 if report.all_asserted_ok() else 1


# ------------------------------------------------------------------- main --


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="path to the JSON experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed (unsigned 64-bit)")
    parser.add_argument("--out", default=None, help="output path (report JSON, or directory for reconstruct)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for trial/grid parallelism")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="doptk", description="D-optimal sensor placement via column subset selection")
    sub = parser.add_subparsers(dest="command", required=True)

    p_select = sub.add_parser("select", help="run the configured selection methods and score them")
    _add_common(p_select)
    p_select.set_defaults(func=cmd_select)

    p_rec = sub.add_parser("reconstruct", help="simulate observations at selected sensors and predict the rest")
    _add_common(p_rec)
    p_rec.add_argument("--values", required=True, help="CSV of true function values, one per candidate")
    p_rec.add_argument("--indices", required=True, help="CSV of selected candidate indices")
    p_rec.add_argument("--noiseless", action="store_true", help="add no observation noise (eta still used in the solve)")
    p_rec.add_argument("--mean", default=None, help="CSV reference mean for the unnormalized relative error")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_sweep = sub.add_parser("sweep", help="grid-search kernel hyperparameters by log marginal likelihood")
    _add_common(p_sweep)
    p_sweep.add_argument("--values", required=True, help="CSV of observed values, one per candidate")
    p_sweep.add_argument("--sigma-grid", type=float, nargs="+", default=None)
    p_sweep.add_argument("--ell-grid", type=float, nargs="+", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_base = sub.add_parser("baseline", help="histogram of D-optimality over random selections")
    _add_common(p_base)
    p_base.add_argument("--trials", type=int, default=None)
    p_base.set_defaults(func=cmd_baseline)

    p_bounds = sub.add_parser("bounds-check", help="evaluate the bound chain on the configured instance")
    _add_common(p_bounds)
    p_bounds.add_argument("--f", type=float, default=None, help="worst-case pivoting parameter (> 1)")
    p_bounds.set_defaults(func=cmd_bounds_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError, np.linalg.LinAlgError) as exc:
        error = {"error": {"type": type(exc).__name__, "message": str(exc), "command": args.command}}
        print(json.dumps(error, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

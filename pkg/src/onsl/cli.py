"""Command-line entry point: validate | sample | sweep | rate-fit."""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, io, kernels, metrics, validator
from . import random as rnd
from .oracle import (
    GaussianLaw,
    GaussianMixture,
    exact_score_field,
    load_distribution,
    perturb_score,
)
from .oracle.perturb import MODES
from .oracle.propagate import propagate_affine
from .process import GridError, build_time_grid, forward_sample, grid_from_iterations
from .sampler import VARIANTS, SamplerConfig, run_sampler

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
GRID_KEYS = {"delta", "T", "c", "K", "K_list"}


class ConfigError(ValueError):
    """Invalid experiment configuration (reported with exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    distribution: object = None
    grid: dict | None = None
    variants: tuple = ("ode-noise",)
    perturbation: str = "constant-bias"
    eps_score: float = 0.0
    eps_list: tuple | None = None
    n_samples: int = 10_000
    n_mc: int = 4000
    seed: int = 0
    out: str = "onsl-out"
    workers: int = 1
    floor_factor: int = 8
    estimator: bool = False
    formats: tuple = ("csv", "binary")
    validation: dict | None = None

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = sorted(set(data) - {f.name for f in fields(cls)})
        if unknown:
            raise ConfigError(f"unknown configuration keys: {unknown}")
        data = dict(data)
        for key in ("variants", "eps_list", "formats"):
            if data.get(key) is not None:
                val = data[key]
                data[key] = tuple(val) if isinstance(val, (list, tuple)) else (val,)
        cfg = cls(**data)
        cfg.check()
        return cfg

    def check(self):
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad:
            raise ConfigError(f"unknown variants {bad}; choose from {list(VARIANTS)}")
        if self.perturbation not in MODES:
            raise ConfigError(f"unknown perturbation {self.perturbation!r}; choose from {list(MODES)}")
        if self.eps_score < 0 or any(e < 0 for e in self.eps_list or ()):
            raise ConfigError("eps_score values must be nonnegative")
        if self.n_samples < 1 or self.workers < 1 or self.floor_factor < 1:
            raise ConfigError("n_samples, workers and floor_factor must be positive")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        bad_fmt = set(self.formats) - {"csv", "binary"}
        if bad_fmt:
            raise ConfigError(f"unknown output formats {sorted(bad_fmt)}")
        if self.grid is not None:
            unknown = sorted(set(self.grid) - GRID_KEYS)
            if unknown:
                raise ConfigError(f"unknown grid keys: {unknown}")
            if not {"delta", "T"} <= set(self.grid):
                raise ConfigError("grid needs delta and T")
            if len({"c", "K", "K_list"} & set(self.grid)) != 1:
                raise ConfigError("grid needs exactly one of c, K, K_list")
        if self.validation is not None:
            try:
                validator.ValidationConfig.from_dict(self.validation)
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        out = asdict(self)
        for key in ("variants", "eps_list", "formats"):
            if out[key] is not None:
                out[key] = list(out[key])
        return out

    def config_hash(self) -> str:
        payload = {k: v for k, v in self.to_dict().items() if k not in ("out", "workers")}
        if isinstance(self.distribution, str) and not self.distribution.lstrip().startswith("{"):
            payload["distribution"] = load_distribution(self.distribution).to_dict()
        blob = json.dumps(payload, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def data_law(self):
        if self.distribution is None:
            raise ConfigError("this command needs a distribution")
        try:
            return load_distribution(self.distribution)
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"cannot load distribution: {exc}") from None


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from None
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# -- helpers ---------------------------------------------------------------------

def _grid_for(grid_spec: dict, K: int | None = None):
    delta, T = grid_spec["delta"], grid_spec["T"]
    if K is not None:
        return grid_from_iterations(delta, T, K)[1]
    if "c" in grid_spec:
        return build_time_grid(delta, T, grid_spec["c"])
    return grid_from_iterations(delta, T, grid_spec["K"])[1]


def _estimate(cfg, law, grid, eps):
    base = exact_score_field(law, "x")
    if eps == 0:
        return base
    return perturb_score(base, cfg.perturbation, eps, cfg.seed, grid=grid, p_data=law, d=law.d, n_mc=cfg.n_mc)


def _gaussian(law):
    if isinstance(law, GaussianLaw):
        return law
    if isinstance(law, GaussianMixture) and law.is_gaussian():
        return law.as_gaussian()
    return None


def _meta(started: float, **extra) -> dict:
    return {
        "tool_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "started_utc": datetime.fromtimestamp(started, timezone.utc).isoformat(),
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "wall_seconds": time.time() - started,
        **extra,
    }


def _out_dir(cfg) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- validate --------------------------------------------------------------------

def cmd_validate(cfg: ExperimentConfig) -> int:
    started = time.time()
    vcfg = dict(cfg.validation or {})
    vcfg.setdefault("seed", cfg.seed)
    vcfg.setdefault("workers", cfg.workers)
    reports = validator.run_validation_suite(vcfg)
    out = _out_dir(cfg)
    summary = "\n".join(r.summary_line() for r in reports) + "\n"
    body = [{k: v for k, v in r.to_dict().items() if k != "wall_time"} for r in reports]
    io.write_json({"config_hash": cfg.config_hash(), "reports": body,
                   "passed": validator.suite_passed(reports)}, out / "validation_report.json")
    io.atomic_write(out / "validation_summary.txt", summary)
    io.write_json(_meta(started, wall_time={r.name: r.wall_time for r in reports}), out / "validation_meta.json")
    sys.stdout.write(summary)
    n_fail = sum(not r.passed for r in reports)
    sys.stdout.write(f"{len(reports) - n_fail}/{len(reports)} checks passed\n")
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


# -- sample ----------------------------------------------------------------------

def cmd_sample(cfg: ExperimentConfig) -> int:
    started = time.time()
    if cfg.grid is None or "K_list" in cfg.grid:
        raise ConfigError("sample needs a grid with c or K")
    if len(cfg.variants) != 1:
        raise ConfigError("sample runs exactly one variant")
    law = cfg.data_law()
    grid = _grid_for(cfg.grid)
    s_hat = _estimate(cfg, law, grid, cfg.eps_score)
    scfg = SamplerConfig(grid, s_hat, cfg.n_samples, cfg.seed, cfg.variants[0], law.d, cfg.workers)
    t_run = time.perf_counter()
    batch = run_sampler(scfg)
    t_run = time.perf_counter() - t_run
    out = _out_dir(cfg)
    files = []
    if "csv" in cfg.formats:
        files.append(io.write_batch_csv(batch, out / "samples.csv").name)
    if "binary" in cfg.formats:
        files.append(io.write_batch_binary(batch, out / "samples.bin").name)
    fit = metrics.empirical_gaussian_fit(batch) if batch.n >= law.d + 2 else None
    record = {
        "config_hash": cfg.config_hash(),
        "sampler_hash": batch.provenance,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "variant": scfg.variant,
        "grid": grid.to_dict(),
        "n_samples": batch.n,
        "d": batch.d,
        "at_time": batch.at_time,
        "files": files,
        "fitted_mean": None if fit is None else fit.mean,
        "fitted_cov": None if fit is None else fit.cov,
    }
    gauss = _gaussian(law)
    if gauss is not None and s_hat.affine(grid.t(1)) is not None:
        exact = propagate_affine(scfg.variant, grid, s_hat, law.d)
        record["exact_output_law"] = {"mean": exact.mean, "cov": exact.cov}
        record["kl_target_vs_exact_output"] = metrics.kl_gaussian(gauss.marginal(grid.t(1)), exact)
        if fit is not None:
            record["kl_fit_vs_target"] = metrics.kl_gaussian(fit, gauss.marginal(grid.t(1)))
    io.write_json(record, out / "run_record.json")
    io.write_json(_meta(started, sampler_seconds=t_run), out / "run_meta.json")
    sys.stdout.write(f"wrote {batch.n} samples (d={batch.d}) at t1={batch.at_time:.6g} to {out}\n")
    return EXIT_OK


# -- sweep -----------------------------------------------------------------------

def _exact_kl(variant, law, grid, s_hat):
    target = law.marginal(grid.t(1))
    return metrics.kl_gaussian(target, propagate_affine(variant, grid, s_hat, law.d))


def _estimated_kl(cfg, variant, law, grid, s_hat):
    batch = run_sampler(SamplerConfig(grid, s_hat, cfg.n_samples, cfg.seed, variant, law.d, cfg.workers))
    data_law = law.to_mixture() if isinstance(law, GaussianLaw) else law
    n = cfg.n_samples
    y = data_law.sample(n, cfg.seed, rnd.derive_stream("sweep-reference", "data"))
    ref = forward_sample(y, grid.t(1), rnd.normals(cfg.seed, rnd.derive_stream("sweep-reference", "noise"), n, law.d))
    return metrics.knn_kl_estimate(ref, batch.points, seed=cfg.seed).estimate


def _sweep_point(cfg, variant, law, K, eps):
    try:
        grid = _grid_for(cfg.grid, K)
    except GridError as exc:
        return None, str(exc)
    s_hat = _estimate(cfg, law, grid, eps)
    gauss = _gaussian(law)
    if gauss is not None and s_hat.affine(grid.t(1)) is not None:
        return {"K": grid.K, "c": grid.c, "kl": _exact_kl(variant, gauss, grid, s_hat)}, None
    if not cfg.estimator:
        raise ConfigError("non-Gaussian data or non-affine scores need \"estimator\": true")
    return {"K": grid.K, "c": grid.c, "kl": _estimated_kl(cfg, variant, law, grid, s_hat)}, None


def run_sweep(cfg: ExperimentConfig) -> dict:
    """Compute every sweep point and the per-variant fits; no file I/O."""
    if cfg.grid is None:
        raise ConfigError("sweep needs a grid")
    law = cfg.data_law()
    if cfg.eps_list is not None:
        if "K" not in cfg.grid:
            raise ConfigError("an eps sweep needs a fixed grid K")
        Ks = [cfg.grid["K"]]
    elif "K_list" in cfg.grid:
        Ks = sorted(int(k) for k in cfg.grid["K_list"])
    else:
        raise ConfigError("a K sweep needs grid.K_list")

    eps_values = list(cfg.eps_list) if cfg.eps_list is not None else [cfg.eps_score]
    jobs = []
    for variant in cfg.variants:
        if cfg.eps_list is not None:
            jobs += [(variant, Ks[0], 0.0, "floor")] + [(variant, Ks[0], e, "point") for e in eps_values]
        else:
            jobs += [(variant, K, cfg.eps_score, "point") for K in Ks]
            jobs.append((variant, cfg.floor_factor * max(Ks), cfg.eps_score, "floor"))

    def work(job):
        variant, K, eps, _ = job
        return _sweep_point(cfg, variant, law, K, eps)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    rows, fits, floors, skipped = [], {}, {}, []
    for variant in cfg.variants:
        mine = [(j, r) for j, r in zip(jobs, results) if j[0] == variant]
        floor_job = [(j, r) for j, r in mine if j[3] == "floor"][0]
        if floor_job[1][0] is None:
            raise GridError(f"floor grid K={floor_job[0][1]} is not solvable: {floor_job[1][1]}")
        floor = floor_job[1][0]["kl"]
        floors[variant] = {"K": floor_job[0][1], "kl_nats": floor}
        pts = []
        for (v, K, eps, kind), (res, err) in mine:
            if kind == "floor":
                continue
            if res is None:
                msg = f"skipping K={K} for {variant}: {err}"
                warnings.warn(msg, stacklevel=2)
                skipped.append({"variant": variant, "K": K, "reason": err})
                continue
            row = {"variant": variant, "K": res["K"], "c": res["c"], "d": law.d, "eps_score": eps,
                   "kl_nats": res["kl"], "floor_nats": floor, "corrected_nats": res["kl"] - floor}
            rows.append(row)
            pts.append(row)
        fits[variant] = _fit(cfg, pts)
    return {"rows": rows, "fits": fits, "floors": floors, "skipped": skipped, "d": law.d}


def _fit(cfg, pts):
    if cfg.eps_list is not None:
        x = [p["eps_score"] ** 2 for p in pts]
        y = [p["corrected_nats"] for p in pts]
        slope, r2 = metrics.fit_through_origin(x, y)
        return {"kind": "through-origin", "x": "eps_score^2", "slope": slope, "r_squared": r2, "n_points": len(pts)}
    try:
        fit = metrics.fit_rate_exponent(metrics.RatePoint(p["K"], max(p["corrected_nats"], 0.0)) for p in pts)
    except ValueError as exc:
        return {"kind": "log-log", "error": str(exc), "n_points": len(pts)}
    return {"kind": "log-log", **asdict(fit)}


def cmd_sweep(cfg: ExperimentConfig) -> int:
    started = time.time()
    result = run_sweep(cfg)
    out = _out_dir(cfg)
    h = cfg.config_hash()
    io.atomic_write(out / "sweep.csv", io.sweep_rows_to_csv(result["rows"], h))
    for variant in cfg.variants:
        rate_rows = [{"K": r["K"], "value": r["kl_nats"], "floor": r["floor_nats"], "corrected": r["corrected_nats"]}
                     for r in result["rows"] if r["variant"] == variant]
        io.atomic_write(out / f"rate_{variant}.csv", io.rate_rows_to_csv(rate_rows, h))
    report = {"config_hash": h, "tool_version": __version__, "config": cfg.to_dict(), **result}
    io.write_json(report, out / "sweep_report.json")
    io.write_json(_meta(started), out / "sweep_meta.json")
    for variant, fit in result["fits"].items():
        if "error" in fit:
            sys.stdout.write(f"{variant}: fit failed ({fit['error']})\n")
        else:
            sys.stdout.write(f"{variant}: slope={fit['slope']:.6g} R2={fit['r_squared']:.6g} "
                             f"({fit['n_points']} points)\n")
    return EXIT_OK


# -- rate-fit --------------------------------------------------------------------

def rate_fit_files(paths, floor: float | None = None, force: bool = False) -> dict:
    """Re-fit one or more sweep or rate CSVs; returns ``{group: RateFit}``."""
    hashes, groups = set(), {}
    for path in paths:
        text = Path(path).read_text()
        cols = io.SWEEP_COLUMNS if "corrected_nats" in text.splitlines()[1 if text.startswith("#") else 0] \
            else io.RATE_COLUMNS
        try:
            h, rows = io.read_table(path, cols)
        except io.FormatError as exc:
            raise ConfigError(str(exc)) from None
        hashes.add(h)
        offset = 3 if text.startswith("#") else 2
        for i, row in enumerate(rows):
            where = f"{path} row {i + offset}"
            try:
                if cols is io.SWEEP_COLUMNS:
                    group, K = row["variant"], int(row["K"])
                    value, _fl, corr = float(row["kl_nats"]), float(row["floor_nats"]), float(row["corrected_nats"])
                else:
                    group, K = Path(path).stem, int(row["K"])
                    value, _fl, corr = float(row["value"]), float(row["floor"]), float(row["corrected"])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"malformed {where}: {exc}") from None
            if floor is not None:
                corr = value - floor
            if not (math.isfinite(corr) and corr > 0):
                raise ConfigError(f"nonpositive corrected value {corr!r} at {where} (K={K})")
            groups.setdefault(group, []).append(metrics.RatePoint(K, corr))
    if len(hashes) > 1 and not force:
        raise ConfigError(f"inputs carry different config hashes {sorted(map(str, hashes))}; use --force")
    if not groups:
        raise ConfigError("no rows to fit")
    return {g: metrics.fit_rate_exponent(pts) for g, pts in groups.items()}


def cmd_rate_fit(cfg: ExperimentConfig, paths, floor=None, force=False, write=True) -> int:
    fits = rate_fit_files(paths, floor, force)
    for g, fit in fits.items():
        sys.stdout.write(f"{g}: slope={fit.slope!r} intercept={fit.intercept!r} R2={fit.r_squared!r} "
                         f"n={fit.n_points}\n")
    if write:
        io.write_json({g: asdict(f) for g, f in fits.items()}, _out_dir(cfg) / "rate_fit.json")
    return EXIT_OK


# -- argument parsing --------------------------------------------------------------

def _add_globals(p, suppress: bool):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=default, help="experiment config JSON")
    p.add_argument("--seed", type=int, default=default, help="RNG seed (u64)")
    p.add_argument("--out", default=default, help="output directory")
    p.add_argument("--workers", type=int, default=default, help="thread count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onsl", description="Two-phase diffusion sampler laboratory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("validate", "run the identity and bound checks"),
                       ("sample", "draw a sample batch"),
                       ("sweep", "exact-law KL sweep over K or eps")):
        _add_globals(sub.add_parser(name, help=text), suppress=True)
    rf = sub.add_parser("rate-fit", help="re-fit slopes from sweep or rate CSVs")
    _add_globals(rf, suppress=True)
    rf.add_argument("csv", nargs="+", help="CSV files written by sweep")
    rf.add_argument("--floor", type=float, default=None, help="override the floor subtracted from each value")
    rf.add_argument("--force", action="store_true", help="allow mixed config hashes")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    overrides = {"seed": args.seed, "out": args.out, "workers": args.workers}
    try:
        cfg = load_config(args.config, overrides)
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "sample":
            return cmd_sample(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        return cmd_rate_fit(cfg, args.csv, args.floor, args.force, write=args.out is not None or
                            args.config is not None)
    except ConfigError as exc:
        sys.stderr.write(f"onsl: error: {exc}\n")
        return EXIT_USAGE
    except (GridError, ValueError) as exc:
        sys.stderr.write(f"onsl: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

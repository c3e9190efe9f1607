"""Command-line front end.

    bsts {fit,calibrate,compare,decompose,cluster,periodogram} --config CONFIG.json
         [--seed N] [--output DIR] [--threads N] [--quiet]

Every command writes CSV outputs and a ``manifest.json`` holding the
resolved config, seed and library versions; passing the manifest back as
``--config`` reruns the command bit-identically.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
from pathlib import Path

import numba
import numpy as np
import scipy

from . import __version__
from .components import assemble, decompose
from .config import ConfigError, DataError, RunConfig, build_components, ingest_csv
from .evaluation import canonical_specs, compare_models, one_step_ahead
from .inference import (
    calibrate_and_fit,
    dynamic_coefficient_paths,
    posterior_summary,
    run_gibbs,
    write_draws,
)
from .intervals import hdi
from .preprocessing import cluster_trends, periodogram

log = logging.getLogger("bsts")

COMMANDS = ("fit", "calibrate", "compare", "decompose", "cluster", "periodogram")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _write_manifest(cmd: str, cfg: RunConfig, out: Path, results: dict | None = None):
    config = cfg.to_dict()
    blob = json.dumps(config, sort_keys=True).encode()
    outputs = {}
    for p in sorted(out.rglob("*")):
        if p.is_file() and p.name != "manifest.json":
            outputs[str(p.relative_to(out))] = _sha256(p)
    manifest = {
        "command": cmd,
        "seed": config["mcmc"]["seed"],
        "config_hash": hashlib.sha256(blob).hexdigest(),
        "data_sha256": _sha256(cfg.data),
        "versions": {"bsts": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "numba": numba.__version__, "python": platform.python_version()},
        "config": config,
        "results": results or {},
        "outputs": outputs,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _priors(cfg: RunConfig, model, y):
    vals = y.values
    var_y = float(np.nanvar(vals, ddof=1)) if np.sum(~np.isnan(vals)) > 1 else 1.0
    k = 0 if model.static_design is None else model.static_design.shape[1]
    priors = cfg.model_priors(k, var_y)
    for d in model.disturbances:
        priors.state[d.name] = d.prior or cfg.default_state_prior(var_y)
    return priors


def _fit(cfg: RunConfig, data):
    model = assemble(build_components(cfg.components, data), len(data.target))
    priors = _priors(cfg, model, data.target)
    return model, priors


def _dates(data):
    return [str(d) for d in data.timestamps]


def _write_variances(draws, out: Path):
    rows = []
    for j, name in enumerate(draws.variance_names):
        v = draws.variances[:, j]
        lo, hi = hdi(v) if len(v) >= 20 else (v.min(), v.max())
        rows.append((name, float(v.mean()), float(lo), float(hi)))
    _write_rows(out / "variances.csv", ("Variance", "Mean", "2.5%", "97.5%"), rows)


def _write_fit_outputs(draws, model, data, out: Path):
    if model.static_design is not None:
        table = posterior_summary(draws)
        table.write_csv(out / "summary.csv")
        (out / "summary.txt").write_text(table.to_text())
    _write_variances(draws, out)
    pred = one_step_ahead(draws, model, data.target)
    _write_rows(out / "osa.csv", ("date", "actual", "predicted"),
                zip(_dates(data), data.target.values, pred))
    write_draws(draws, out / "draws")


def cmd_fit(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    data = ingest_csv(cfg.data, cfg)
    model, priors = _fit(cfg, data)
    draws = run_gibbs(model, data.target, priors, cfg.mcmc_config())
    _write_fit_outputs(draws, model, data, out)
    return {"retained_draws": len(draws)}


def cmd_calibrate(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    data = ingest_csv(cfg.data, cfg)
    model, priors = _fit(cfg, data)
    if model.static_design is None:
        raise ConfigError("calibrate needs a static_regression component")
    mcmc = cfg.mcmc_config()
    cal = cfg.calibration
    result, final = calibrate_and_fit(model, data.target, priors, mcmc,
                                      chains=int(cal.get("chains", 30)),
                                      update_means=bool(cal.get("update_means", False)),
                                      workers=threads)
    names = model.static_names
    _write_rows(out / "calibration.csv",
                ("Variable", "initial_inclusion_prob", "calibrated_inclusion_prob",
                 "initial_prior_mean", "calibrated_prior_mean"),
                [(nm, float(result.initial_prior.inclusion_prob[j]),
                  float(result.prior.inclusion_prob[j]), float(result.initial_prior.prior_mean[j]),
                  float(result.prior.prior_mean[j])) for j, nm in enumerate(names)])
    _write_rows(out / "chain_inclusion.csv", ("seed", *names),
                [(str(s), *map(float, row)) for s, row in zip(result.seeds, result.inclusion)])
    _write_fit_outputs(final, model, data, out)
    return {"chains": len(result.seeds), "chain_seeds": [str(s) for s in result.seeds],
            "retained_draws": len(final)}


def cmd_compare(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    data = ingest_csv(cfg.data, cfg)
    opts = cfg.compare
    design = data.design if data.design.shape[1] else None
    specs = canonical_specs(design, data.regressor_names)
    wanted = opts.get("specs")
    if wanted:
        unknown = [s for s in wanted if s not in specs]
        if unknown:
            raise ConfigError(f"unknown or unavailable specs: {unknown}")
        specs = {s: specs[s] for s in wanted}
    var_y = float(np.nanvar(data.target.values, ddof=1))
    report = compare_models(data.target, specs, cfg.mcmc_config(),
                            priors=cfg.model_priors(0, var_y) if cfg.priors else None,
                            preselect_threshold=opts.get("preselect_threshold", 0.5),
                            exact=bool(opts.get("exact", False)))
    report.write_csv(out / "accuracy.csv")
    (out / "accuracy.txt").write_text(report.to_text())
    return {"scored_from": report.scored_from,
            "failed": {r.label: r.error for r in report.rows if not r.ok}}


def cmd_decompose(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    data = ingest_csv(cfg.data, cfg)
    model, priors = _fit(cfg, data)
    draws = run_gibbs(model, data.target, priors, cfg.mcmc_config())
    bands = decompose(draws, model)
    header, cols = ["date", "actual"], [_dates(data), data.target.values]
    for name, band in bands.items():
        header += [f"{name}_mean", f"{name}_low", f"{name}_high"]
        cols += [band.mean, band.low, band.high]
    _write_rows(out / "decomposition.csv", header, zip(*cols))
    if draws.dynamic_names:
        header, cols = ["date"], [_dates(data)]
        for name in draws.dynamic_names:
            band = dynamic_coefficient_paths(draws, name)
            header += [f"{name}_mean", f"{name}_low", f"{name}_high"]
            cols += [band.mean, band.low, band.high]
        _write_rows(out / "dynamic_coefficients.csv", header, zip(*cols))
    return {"components": list(bands)}


def cmd_cluster(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    data = ingest_csv(cfg.data, cfg)
    opts = cfg.cluster
    columns = opts.get("columns") or list(data.regressor_names)
    missing = [c for c in columns if c not in data.raw]
    if missing:
        raise ConfigError(f"cluster columns not found: {missing}")
    for c in columns:
        if np.isnan(data.raw[c]).any():
            raise DataError(f"cluster column {c!r} has missing values")
    tree = cluster_trends({c: data.raw[c] for c in columns}, opts.get("k"),
                          opts.get("method", "average"))
    leaves = len(tree.labels)
    _write_rows(out / "dendrogram.csv", ("node", "left", "right", "height", "size"),
                [(leaves + i, int(a), int(b), float(h), int(sz))
                 for i, (a, b, h, sz) in enumerate(tree.merges)])
    _write_rows(out / "leaves.csv", ("node", "series"), enumerate(tree.labels))
    _write_rows(out / "distances.csv", ("series", *tree.labels),
                [(nm, *map(float, row)) for nm, row in zip(tree.labels, tree.distances)])
    if tree.flat_labels is not None:
        _write_rows(out / "clusters.csv", ("series", "cluster"), tree.flat_labels.items())
    return {"series": leaves}


def cmd_periodogram(cfg: RunConfig, out: Path, threads: int = 1) -> dict:
    data = ingest_csv(cfg.data, cfg)
    column = cfg.periodogram.get("column") or cfg.target
    if column not in data.raw:
        raise ConfigError(f"periodogram column {column!r} not found")
    values = data.raw[column]
    if np.isnan(values).any():
        raise DataError(f"periodogram column {column!r} has missing values")
    pg = periodogram(values)
    _write_rows(out / "periodogram.csv", ("frequency", "period", "power"),
                zip(pg.frequency, pg.period, pg.power))
    return {"column": column, "dominant_period": float(pg.dominant_period)}


HANDLERS = {
    "fit": cmd_fit,
    "calibrate": cmd_calibrate,
    "compare": cmd_compare,
    "decompose": cmd_decompose,
    "cluster": cmd_cluster,
    "periodogram": cmd_periodogram,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bsts", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HANDLERS[name].__name__.replace("cmd_", "") + " command")
        p.add_argument("--config", required=True, type=Path, help="run config or manifest JSON")
        p.add_argument("--seed", type=int, help="override mcmc.seed")
        p.add_argument("--output", type=Path, help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker processes for chains")
        p.add_argument("--quiet", action="store_true")
    return parser


def run(command: str, cfg: RunConfig, threads: int = 1) -> Path:
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    results = HANDLERS[command](cfg, out, threads)
    _write_manifest(command, cfg, out, results)
    return out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config)
        if args.seed is not None:
            cfg.mcmc = {**cfg.mcmc, "seed": args.seed}
        if args.output is not None:
            cfg.output = args.output.resolve()
        out = run(args.command, cfg, max(1, args.threads))
    except Exception as exc:
        print(f"bsts {args.command}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if not args.quiet:
        print(f"bsts {args.command}: wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

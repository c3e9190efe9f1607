"""Columnar CSV archive of posterior draws with a JSON manifest.

``draws.csv`` has one row per retained draw and columns ``sigma2:<name>``,
``beta:<name>`` and ``gamma:<name>``. State paths, when kept, go to
``states.npy`` because they do not fit a flat row.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .gibbs import McmcConfig, PosteriorDraws

DRAWS_FILE = "draws.csv"
MANIFEST_FILE = "draws.json"
STATES_FILE = "states.npy"


def write_draws(draws: PosteriorDraws, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    header = ([f"sigma2:{nm}" for nm in draws.variance_names]
              + [f"beta:{nm}" for nm in draws.static_names]
              + [f"gamma:{nm}" for nm in draws.static_names])
    with open(d / DRAWS_FILE, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i in range(len(draws)):
            w.writerow([repr(float(v)) for v in draws.variances[i]]
                       + [repr(float(v)) for v in draws.beta[i]]
                       + [str(int(g)) for g in draws.gamma[i]])
    manifest = {
        "variance_names": list(draws.variance_names),
        "static_names": list(draws.static_names),
        "dynamic_names": list(draws.dynamic_names),
        "dynamic_rows": list(draws.dynamic_rows),
        "layout": {k: list(v) for k, v in draws.layout.items()},
        "config": {"iterations": draws.config.iterations, "burn_in": draws.config.burn_in,
                   "thin": draws.config.thin, "seed": int(draws.config.seed)},
        "states_file": STATES_FILE if draws.states is not None else None,
    }
    (d / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2) + "\n")
    if draws.states is not None:
        np.save(d / STATES_FILE, draws.states)
    return d


def read_draws(directory) -> PosteriorDraws:
    d = Path(directory)
    manifest = json.loads((d / MANIFEST_FILE).read_text())
    with open(d / DRAWS_FILE, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    nv = len(manifest["variance_names"])
    k = len(manifest["static_names"])
    if len(header) != nv + 2 * k:
        raise ValueError(f"{DRAWS_FILE} header does not match the manifest")
    table = np.array([[float(v) for v in r] for r in body]).reshape(len(body), nv + 2 * k)
    states = None
    if manifest.get("states_file"):
        states = np.load(d / manifest["states_file"])
    return PosteriorDraws(
        beta=table[:, nv:nv + k].copy(),
        gamma=table[:, nv + k:].astype(np.int8),
        variances=table[:, :nv].copy(),
        variance_names=tuple(manifest["variance_names"]),
        static_names=tuple(manifest["static_names"]),
        dynamic_names=tuple(manifest["dynamic_names"]),
        layout={nm: tuple(v) for nm, v in manifest["layout"].items()},
        config=McmcConfig(**manifest["config"]),
        states=states,
        dynamic_rows=tuple(manifest["dynamic_rows"]),
    )

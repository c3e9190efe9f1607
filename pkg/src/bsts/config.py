"""Run configuration (JSON) and CSV ingestion.

Config schema::

    {
      "data": "panel.csv",             # path, relative to the config file
      "target": "price",
      "regressors": ["x1", "x2"],      # or "all" (every non-target column)
      "frequency": "weekly",           # daily | weekly
      "standardize": true,
      "components": [
        {"type": "local_linear_trend"},
        {"type": "seasonal", "period": 4},
        {"type": "intervention", "kind": "level_shift", "onset": "2014-02-24"},
        {"type": "static_regression"},
        {"type": "dynamic_regression", "columns": ["x1"]}
      ],
      "priors": {"inclusion_prob": 0.5, "prior_mean": 0.0, "slab_variance": 1.0,
                 "variance_shape": 0.01, "variance_scale_fraction": 0.01},
      "mcmc": {"iterations": 3000, "burn_in": 981, "thin": 1, "seed": 1},
      "calibration": {"chains": 30, "update_means": false},
      "compare": {"specs": ["LL", "LLTI", "LLTV", "LLT", "LLTTI", "LLTTV"],
                  "preselect_threshold": 0.5, "exact": false},
      "cluster": {"columns": null, "k": 3},
      "periodogram": {"column": null},
      "output": "out"
    }

Components may carry ``"prior": {"shape": nu, "scale": s}`` (``level_prior``
and ``slope_prior`` for trends).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .components import (
    DynamicRegression,
    Intervention,
    LocalLevel,
    LocalLinearTrend,
    Seasonal,
    StaticRegression,
)
from .inference.gibbs import McmcConfig
from .preprocessing import standardize
from .priors import InverseGammaPrior, ModelPriors, SpikeSlabPrior
from .ssm import TimeSeries


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Ingested data: target series plus regressor design, both possibly standardized."""

    target: TimeSeries
    design: np.ndarray
    regressor_names: tuple
    raw: dict
    target_mean: float = 0.0
    target_sd: float = 1.0

    @property
    def timestamps(self) -> np.ndarray:
        return self.target.timestamps


@dataclass
class RunConfig:
    data: Path
    target: str
    regressors: object = "all"
    frequency: str = "daily"
    standardize: bool = True
    components: list = field(default_factory=lambda: [{"type": "local_linear_trend"}])
    priors: dict = field(default_factory=dict)
    mcmc: dict = field(default_factory=dict)
    calibration: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)
    cluster: dict = field(default_factory=dict)
    periodogram: dict = field(default_factory=dict)
    output: Path = Path("out")

    @classmethod
    def load(cls, path) -> "RunConfig":
        """Read a config file, or the ``config`` block of a run manifest."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if "command" in raw and "config" in raw:
            raw = raw["config"]
        return cls.from_dict(raw, base=path.parent)

    @classmethod
    def from_dict(cls, raw: dict, base=Path(".")) -> "RunConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("data", "target"):
            if key not in raw:
                raise ConfigError(f"config is missing required key {key!r}")
        kw = dict(raw)
        kw["data"] = (Path(base) / raw["data"]).resolve()
        kw["output"] = (Path(base) / raw.get("output", "out")).resolve()
        if kw.get("frequency", "daily") not in ("daily", "weekly"):
            raise ConfigError("frequency must be 'daily' or 'weekly'")
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "data": str(self.data),
            "target": self.target,
            "regressors": self.regressors,
            "frequency": self.frequency,
            "standardize": self.standardize,
            "components": self.components,
            "priors": self.priors,
            "mcmc": self.mcmc_config().__dict__ | {"seed": int(self.mcmc_config().seed)},
            "calibration": self.calibration,
            "compare": self.compare,
            "cluster": self.cluster,
            "periodogram": self.periodogram,
            "output": str(self.output),
        }

    def mcmc_config(self) -> McmcConfig:
        try:
            return McmcConfig(**self.mcmc)
        except TypeError as exc:
            raise ConfigError(f"bad mcmc settings: {exc}") from exc

    def model_priors(self, k: int, var_y: float) -> ModelPriors:
        p = self.priors
        obs = InverseGammaPrior.weak(var_y, p.get("variance_shape", 0.01),
                                     p.get("variance_scale_fraction", 0.01))
        slab = None
        if k:
            slab = SpikeSlabPrior.uninformative(k, p.get("inclusion_prob", 0.5),
                                                p.get("prior_mean", 0.0),
                                                p.get("slab_variance", 1.0))
        return ModelPriors(obs, {}, slab, dict(p.get("fixed", {})))

    def default_state_prior(self, var_y: float) -> InverseGammaPrior:
        p = self.priors
        return InverseGammaPrior.weak(var_y, p.get("variance_shape", 0.01),
                                      p.get("variance_scale_fraction", 0.01))


def _parse_float(text, row, col):
    try:
        return float(text)
    except ValueError:
        raise DataError(f"row {row}, column {col!r}: cannot parse {text!r} as a number") from None


def ingest_csv(path, config: RunConfig) -> Dataset:
    """Read a header-first CSV whose first column holds ISO-8601 dates.

    Empty target cells become missing values; an empty regressor cell is an
    error. Row numbers in messages count the header as row 1.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise DataError(f"{path} needs a header row and at least one data row")
    header = [h.strip() for h in rows[0]]
    if config.target not in header[1:]:
        raise DataError(f"target column {config.target!r} not found in {path}")
    if config.regressors == "all":
        regressors = [h for h in header[1:] if h != config.target]
    else:
        regressors = list(config.regressors or [])
        missing = [c for c in regressors if c not in header[1:]]
        if missing:
            raise DataError(f"regressor columns not found: {missing}")

    dates, columns = [], {h: [] for h in header[1:]}
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"row {i} has {len(row)} fields, header has {len(header)}")
        try:
            dates.append(np.datetime64(row[0].strip(), "D"))
        except ValueError:
            raise DataError(f"row {i}: unparseable date {row[0]!r}") from None
        for col, cell in zip(header[1:], row[1:]):
            cell = cell.strip()
            if cell == "":
                if col == config.target:
                    columns[col].append(np.nan)
                    continue
                if col in regressors:
                    raise DataError(f"row {i}, column {col!r}: missing regressor value")
                columns[col].append(np.nan)
                continue
            columns[col].append(_parse_float(cell, i, col))

    raw = {c: np.array(v, dtype=float) for c, v in columns.items()}
    y = raw[config.target]
    try:
        target = TimeSeries(np.array(dates), y, config.frequency)
    except ValueError as exc:
        raise DataError(str(exc)) from exc

    design = np.column_stack([raw[c] for c in regressors]) if regressors else np.zeros((y.size, 0))
    mean, sd = 0.0, 1.0
    if config.standardize:
        obs = ~np.isnan(y)
        s = standardize(y[obs])
        mean, sd = s.original_mean, s.original_sd
        target = TimeSeries(target.timestamps, (y - mean) / sd, config.frequency)
        if design.shape[1]:
            design = np.column_stack([standardize(design[:, j]).values
                                      for j in range(design.shape[1])])
    return Dataset(target, design, tuple(regressors), raw, mean, sd)


def _onset(value, dataset: Dataset) -> int:
    if isinstance(value, int):
        return value
    day = np.datetime64(str(value), "D")
    hits = np.flatnonzero(dataset.timestamps == day)
    if hits.size == 0:
        raise ConfigError(f"intervention date {value} is not in the sample")
    return int(hits[0]) + 1


def _ig(spec):
    return None if spec is None else InverseGammaPrior(float(spec["shape"]), float(spec["scale"]))


def _columns(spec, dataset: Dataset):
    cols = spec.get("columns")
    if cols is None:
        return dataset.design, dataset.regressor_names
    bad = [c for c in cols if c not in dataset.regressor_names]
    if bad:
        raise ConfigError(f"columns {bad} are not among the configured regressors")
    idx = [dataset.regressor_names.index(c) for c in cols]
    return dataset.design[:, idx], tuple(cols)


def build_components(specs, dataset: Dataset) -> list:
    out = []
    for spec in specs:
        kind = spec.get("type")
        if kind == "local_level":
            out.append(LocalLevel(_ig(spec.get("level_prior"))))
        elif kind == "local_linear_trend":
            out.append(LocalLinearTrend(_ig(spec.get("level_prior")), _ig(spec.get("slope_prior"))))
        elif kind == "seasonal":
            out.append(Seasonal(int(spec["period"]), _ig(spec.get("prior"))))
        elif kind == "intervention":
            out.append(Intervention(spec["kind"], _onset(spec["onset"], dataset),
                                    bool(spec.get("dynamic", False)), _ig(spec.get("prior")),
                                    spec.get("name")))
        elif kind == "static_regression":
            X, names = _columns(spec, dataset)
            out.append(StaticRegression(X, names))
        elif kind == "dynamic_regression":
            X, names = _columns(spec, dataset)
            out.append(DynamicRegression(X, names))
        else:
            raise ConfigError(f"unknown component type {kind!r}")
    return out

"""Accuracy metrics and multi-specification comparison."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .components import (
    AssembledModel,
    DynamicRegression,
    LocalLevel,
    LocalLinearTrend,
    StaticRegression,
    assemble,
)
from .inference.gibbs import McmcConfig, PosteriorDraws, run_gibbs
from .priors import ModelPriors
from .ssm import _filter_kernel, as_values

log = logging.getLogger(__name__)

CANONICAL_LABELS = ("LL", "LLTI", "LLTV", "LLT", "LLTTI", "LLTTV")
METRIC_COLUMNS = ("sMAPE", "MAE", "MSE")
REPORT_COLUMNS = ("Model", "Label", *METRIC_COLUMNS)
DESCRIPTIONS = {
    "LL": "Local level",
    "LLTI": "Local level with time-invariant regressors",
    "LLTV": "Local level with time-variant regressors",
    "LLT": "Local linear trend",
    "LLTTI": "Local linear trend with time-invariant regressors",
    "LLTTV": "Local linear trend with time-variant regressors",
}


def _pair(actual, predicted):
    y = np.asarray(actual, dtype=float).ravel()
    f = np.asarray(predicted, dtype=float).ravel()
    if y.shape != f.shape:
        raise ValueError(f"length mismatch: {y.size} actual vs {f.size} predicted")
    if y.size == 0:
        raise ValueError("metrics need at least one pair")
    return y, f


def smape(actual, predicted) -> float:
    """Symmetric mean absolute percentage error, in percent."""
    y, f = _pair(actual, predicted)
    denom = (np.abs(y) + np.abs(f)) / 2
    if (denom == 0).any():
        raise ValueError("sMAPE is undefined when actual and predicted are both zero")
    return float(100.0 / y.size * np.sum(np.abs(f - y) / denom))


def mae(actual, predicted) -> float:
    y, f = _pair(actual, predicted)
    return float(np.mean(np.abs(y - f)))


def mse(actual, predicted) -> float:
    y, f = _pair(actual, predicted)
    return float(np.mean((y - f) ** 2))


def one_step_ahead(draws: PosteriorDraws, model: AssembledModel, y, exact: bool = False,
                   max_draws: int = 200) -> np.ndarray:
    """Posterior mean of the one-step-ahead predictive mean at every t.

    The default runs one filter at the posterior-mean variances and
    coefficients; ``exact`` averages filter predictions over (up to
    ``max_draws``) retained draws.
    """
    vals = as_values(y)
    Z = np.array(model.matrices.Z)
    T = np.array(model.matrices.T)
    a0, P0 = np.array(model.init.mean), np.array(model.init.covariance)
    rows = np.array([d.row for d in model.disturbances], dtype=int)
    m = model.state_dim

    def predict(variances, beta):
        RQR = np.zeros((m, m))
        RQR[rows, rows] = variances[1:]
        offset = model.static_contribution(beta)
        out = _filter_kernel(vals - offset, Z, T, RQR, float(variances[0]), a0, P0)
        if out[-1] >= 0:
            raise ValueError(f"non-positive predictive variance at t={out[-1] + 1}")
        return out[4] + offset

    if not exact:
        return predict(draws.variances.mean(axis=0), draws.beta.mean(axis=0))
    idx = np.unique(np.linspace(0, len(draws) - 1, min(max_draws, len(draws))).astype(int))
    return np.mean([predict(draws.variances[i], draws.beta[i]) for i in idx], axis=0)


def canonical_specs(design=None, names=()) -> dict:
    """The six reference specifications: level or trend, without / static / dynamic regressors."""
    specs = {"LL": [LocalLevel()], "LLT": [LocalLinearTrend()]}
    if design is not None:
        specs["LLTI"] = [LocalLevel(), StaticRegression(design, tuple(names))]
        specs["LLTV"] = [LocalLevel(), DynamicRegression(design, tuple(names))]
        specs["LLTTI"] = [LocalLinearTrend(), StaticRegression(design, tuple(names))]
        specs["LLTTV"] = [LocalLinearTrend(), DynamicRegression(design, tuple(names))]
    return {label: specs[label] for label in CANONICAL_LABELS if label in specs}


@dataclass
class AccuracyRow:
    label: str
    smape: float = math.nan
    mae: float = math.nan
    mse: float = math.nan
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class AccuracyReport:
    rows: list = field(default_factory=list)
    scored_from: int = 0

    def __getitem__(self, label) -> AccuracyRow:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    @property
    def labels(self) -> tuple:
        return tuple(r.label for r in self.rows)

    def write_csv(self, path):
        """One row per spec: description, label, sMAPE, MAE, MSE (NaN for failed specs)."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for r in self.rows:
                w.writerow((DESCRIPTIONS.get(r.label, r.label), r.label,
                            repr(r.smape), repr(r.mae), repr(r.mse)))

    def to_text(self) -> str:
        desc = [DESCRIPTIONS.get(r.label, r.label) for r in self.rows]
        w0 = max(len("Model"), *(len(d) for d in desc))
        w1 = max(len("Label"), *(len(r.label) for r in self.rows))
        lines = ["Model".ljust(w0) + "  " + "Label".ljust(w1)
                 + "".join(c.rjust(12) for c in METRIC_COLUMNS)]
        for d, r in zip(desc, self.rows):
            if r.ok:
                cells = "".join(f"{v:12.3f}" for v in (r.smape, r.mae, r.mse))
            else:
                cells = f"  failed: {r.error}"
            lines.append(d.ljust(w0) + "  " + r.label.ljust(w1) + cells)
        return "\n".join(lines) + "\n"


def _preselect(components, y, priors, config, threshold):
    """Swap each DynamicRegression for one restricted to columns a static fit includes."""
    dyn = [c for c in components if isinstance(c, DynamicRegression)]
    if not dyn:
        return components
    out = []
    for c in components:
        if not isinstance(c, DynamicRegression):
            out.append(c)
            continue
        static = [s for s in components if not isinstance(s, (DynamicRegression, StaticRegression))]
        static.append(StaticRegression(c.design, c.names))
        model = assemble(static, len(as_values(y)))
        draws = run_gibbs(model, y, priors, config, keep_states=False)
        freq = draws.inclusion_frequency
        keep = np.flatnonzero(freq >= threshold)
        if keep.size == 0:
            keep = np.array([int(np.argmax(freq))])
        X = np.asarray(c.design, dtype=float)
        X = X[:, None] if X.ndim == 1 else X
        names = tuple(model.static_names[j] for j in keep)
        pri = tuple(c.priors[j] for j in keep) if c.priors else ()
        log.info("dynamic regression keeps %s", ", ".join(names))
        out.append(DynamicRegression(X[:, keep], names, pri, c.name))
    return out


def compare_models(data, specs: dict, config: McmcConfig, priors: ModelPriors | None = None,
                   preselect_threshold: float | None = 0.5, skip: int | None = None,
                   exact: bool = False) -> AccuracyReport:
    """Fit every specification and score its one-step-ahead predictions.

    The first ``skip`` points (default: the largest state dimension among the
    specs) are left out of every score so the diffuse start does not dominate.
    A spec that fails to assemble or fit keeps its row, flagged with the error.
    """
    vals = as_values(data)
    n = vals.size
    rows, models = [], {}
    for label, comps in specs.items():
        try:
            if preselect_threshold is not None:
                comps = _preselect(comps, vals, priors, config, preselect_threshold)
            models[label] = assemble(comps, n)
        except Exception as exc:
            models[label] = exc
    if skip is None:
        dims = [m.state_dim for m in models.values() if isinstance(m, AssembledModel)]
        skip = min(max(dims, default=1), n // 2)
    window = np.zeros(n, dtype=bool)
    window[skip:] = True
    window &= ~np.isnan(vals)
    for label, model in models.items():
        if isinstance(model, Exception):
            rows.append(AccuracyRow(label, error=f"{type(model).__name__}: {model}"))
            continue
        try:
            draws = run_gibbs(model, vals, priors, config, keep_states=False)
            pred = one_step_ahead(draws, model, vals, exact=exact)
            y, f = vals[window], pred[window]
            rows.append(AccuracyRow(label, smape(y, f), mae(y, f), mse(y, f)))
        except Exception as exc:
            log.warning("spec %s failed: %s", label, exc)
            rows.append(AccuracyRow(label, error=f"{type(exc).__name__}: {exc}"))
    return AccuracyReport(rows, skip)

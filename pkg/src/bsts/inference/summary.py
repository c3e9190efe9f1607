from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ..components import Band
from ..intervals import MIN_SAMPLES, hdi, hdi_bands
from .gibbs import PosteriorDraws

COLUMNS = ("Mean", "2.5%", "97.5%", "Non-zero probability")


@dataclass(frozen=True)
class SummaryTable:
    """Per-coefficient posterior summary in the layout of a standardized-coefficient table."""

    names: tuple
    mean: np.ndarray
    low: np.ndarray
    high: np.ndarray
    nonzero_prob: np.ndarray

    def rows(self):
        for i, name in enumerate(self.names):
            yield name, (float(self.mean[i]), float(self.low[i]), float(self.high[i]),
                         float(self.nonzero_prob[i]))

    def write_csv(self, path):
        """Row labels go in an unnamed first column; the value columns are ``COLUMNS``."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("", *COLUMNS))
            for name, vals in self.rows():
                w.writerow((name, *(repr(v) for v in vals)))

    def to_text(self) -> str:
        width = max([1, *(len(n) for n in self.names)])
        lines = ["".ljust(width) + "".join(c.rjust(10) for c in COLUMNS[:3])
                 + "  " + COLUMNS[3]]
        for name, vals in self.rows():
            cells = "".join(f"{_show(v):10.3f}" for v in vals[:3])
            lines.append(name.ljust(width) + cells + f"{vals[3]:>{len(COLUMNS[3]) + 2}.3f}")
        return "\n".join(lines) + "\n"


def _show(v: float) -> float:
    # keeps -0.0004 from printing as -0.000
    return round(v, 3) + 0.0


def _included_interval(values: np.ndarray, mass: float):
    if values.size == 0:
        return 0.0, 0.0
    if values.size < MIN_SAMPLES:
        return float(values.min()), float(values.max())
    return hdi(values, mass)


def posterior_summary(draws: PosteriorDraws, mass: float = 0.95) -> SummaryTable:
    """Mean (zeros included), HDI of the included draws, and inclusion frequency.

    A coefficient that is never included gets an all-zero row; one included
    in fewer than 20 draws gets the min-max range of those draws.
    """
    if len(draws) == 0:
        raise ValueError("no draws to summarize")
    k = draws.beta.shape[1]
    low, high = np.zeros(k), np.zeros(k)
    for j in range(k):
        inc = draws.gamma[:, j] == 1
        low[j], high[j] = _included_interval(draws.beta[inc, j], mass)
    return SummaryTable(
        names=tuple(draws.static_names),
        mean=draws.beta.mean(axis=0),
        low=low,
        high=high,
        nonzero_prob=draws.gamma.mean(axis=0),
    )


def dynamic_coefficient_paths(draws: PosteriorDraws, column, mass: float = 0.95) -> Band:
    """Pointwise posterior mean and HDI of a time-varying coefficient."""
    if draws.states is None:
        raise ValueError("draws were stored without state paths")
    names = tuple(draws.dynamic_names)
    if isinstance(column, str):
        if column not in names:
            raise KeyError(f"{column!r} is not a dynamic-regression column")
        j = names.index(column)
    else:
        j = int(column)
        if not 0 <= j < len(names):
            raise KeyError(f"dynamic column index {j} out of range")
    path = draws.states[:, :, draws.dynamic_rows[j]]
    low, high = hdi_bands(path, mass)
    return Band(path.mean(axis=0), low, high)

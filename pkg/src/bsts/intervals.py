"""Highest density intervals from Monte Carlo samples."""
from __future__ import annotations

import math

import numpy as np

MIN_SAMPLES = 20


def _window(n: int, mass: float) -> int:
    if not 0 < mass < 1:
        raise ValueError(f"mass must be in (0, 1), got {mass}")
    # guard against 0.95 * 100 landing a hair above 95
    return max(1, math.ceil(mass * n - 1e-9))


def hdi(samples, mass: float = 0.95) -> tuple[float, float]:
    """Shortest interval spanning ceil(mass * n) of the sorted samples.

    Ties go to the window with the lowest start.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n < MIN_SAMPLES:
        raise ValueError(f"hdi needs at least {MIN_SAMPLES} samples, got {n}")
    k = _window(n, mass)
    widths = x[k - 1:] - x[: n - k + 1]
    i = int(np.argmin(widths))
    return float(x[i]), float(x[i + k - 1])


def hdi_bands(samples, mass: float = 0.95) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise HDI over axis 0 of an (ndraw, ...) array."""
    x = np.sort(np.asarray(samples, dtype=float), axis=0)
    n = x.shape[0]
    if n < MIN_SAMPLES:
        raise ValueError(f"hdi needs at least {MIN_SAMPLES} samples, got {n}")
    k = _window(n, mass)
    widths = x[k - 1:] - x[: n - k + 1]
    i = np.argmin(widths, axis=0)[None]
    low = np.take_along_axis(x, i, axis=0)[0]
    high = np.take_along_axis(x, i + k - 1, axis=0)[0]
    return low, high

"""Standardization, periodogram and DTW clustering of candidate driver series."""
from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .ssm import TimeSeries


@dataclass(frozen=True)
class StandardizedSeries:
    values: np.ndarray
    original_mean: float
    original_sd: float

    def destandardize(self, values=None) -> np.ndarray:
        v = self.values if values is None else np.asarray(values, dtype=float)
        return v * self.original_sd + self.original_mean


def standardize(series) -> StandardizedSeries:
    """Center on the sample mean and divide by the sample sd (n - 1 divisor)."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("standardize needs a 1-d series of length >= 2")
    if not np.isfinite(x).all():
        raise ValueError("standardize needs finite values")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    if not sd > 0:
        raise ValueError("cannot standardize a series with zero variance")
    return StandardizedSeries((x - mean) / sd, mean, sd)


def destandardize(s: StandardizedSeries) -> np.ndarray:
    return s.destandardize()


@dataclass(frozen=True)
class Periodogram:
    frequency: np.ndarray
    power: np.ndarray
    n: int

    @property
    def period(self) -> np.ndarray:
        return 1.0 / self.frequency

    @property
    def dominant_frequency(self) -> float:
        return float(self.frequency[np.argmax(self.power)])

    @property
    def dominant_period(self) -> float:
        return 1.0 / self.dominant_frequency

    def total_power(self) -> float:
        """Average power over all nonzero Fourier frequencies (both halves).

        Equals the mean square of the centered series.
        """
        p = self.power.copy()
        if self.n % 2 == 0:
            p[-1] *= 0.5
        return 2.0 * p.sum() / self.n


def periodogram(series) -> Periodogram:
    """Raw periodogram |DFT|^2 / n of the mean-removed series at j/n, j = 1..n//2."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 8:
        raise ValueError("periodogram needs a 1-d series of length >= 8")
    if not np.isfinite(x).all():
        raise ValueError("periodogram needs finite values; impute or trim missing points")
    n = x.size
    dft = np.fft.rfft(x - x.mean())
    j = np.arange(1, n // 2 + 1)
    return Periodogram(j / n, np.abs(dft[j]) ** 2 / n, n)


@nb.njit(cache=True)
def _dtw(a, b):
    n, m = a.size, b.size
    D = np.full((n + 1, m + 1), np.inf)
    D[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            best = min(D[i - 1, j], D[i, j - 1], D[i - 1, j - 1])
            D[i, j] = abs(a[i - 1] - b[j - 1]) + best
    return D[n, m]


def dtw_distance(a, b) -> float:
    """Unconstrained DTW with absolute-difference cost and steps (1,0), (0,1), (1,1)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("dtw needs two nonempty sequences")
    return float(_dtw(a, b))


def dtw_matrix(series) -> np.ndarray:
    k = len(series)
    D = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            D[i, j] = D[j, i] = dtw_distance(series[i], series[j])
    return D


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree in scipy linkage format: rows (left, right, height, size)."""

    labels: tuple
    merges: np.ndarray
    distances: np.ndarray
    flat_labels: dict | None = None

    @property
    def heights(self) -> np.ndarray:
        return self.merges[:, 2]


def cluster_trends(series: dict, k: int | None = None, method: str = "average") -> Dendrogram:
    """Hierarchical clustering of standardized series on pairwise DTW distances."""
    if len(series) < 2:
        raise ValueError("clustering needs at least two series")
    freqs = {s.frequency for s in series.values() if isinstance(s, TimeSeries)}
    if len(freqs) > 1:
        raise ValueError(f"series have mismatched frequencies {sorted(map(str, freqs))}")
    labels = tuple(series)
    values = []
    for name in labels:
        s = series[name]
        v = s.values if isinstance(s, TimeSeries) else np.asarray(s, dtype=float)
        values.append(standardize(v).values)
    D = dtw_matrix(values)
    Z = linkage(squareform(D, checks=False), method=method)
    flat = None
    if k is not None:
        if not 1 <= k <= len(labels):
            raise ValueError(f"k must be in 1..{len(labels)}")
        ids = fcluster(Z, t=k, criterion="maxclust")
        flat = {nm: int(c) for nm, c in zip(labels, ids)}
    return Dendrogram(labels, Z, D, flat)

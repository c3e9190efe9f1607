"""Univariate linear Gaussian state-space models.

Observation and state equations::

    y_t       = Z_t a_t + eps_t,      eps_t ~ N(0, H)
    a_{t+1}   = T a_t + R eta_t,      eta_t ~ N(0, Q)

The initial state ``init`` is the prior of ``a_1``. Missing observations are
encoded as NaN and skip the measurement update.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

DIFFUSE_VARIANCE = 1e7
_FREQ_STEP = {"daily": np.timedelta64(1, "D"), "weekly": np.timedelta64(7, "D")}


class DegenerateVarianceError(ValueError):
    """Raised when the one-step-ahead variance is not positive at an observed step."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TimeSeries:
    """Equally spaced scalar series; NaN marks a missing value."""

    timestamps: np.ndarray
    values: np.ndarray
    frequency: str | None = None

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype="datetime64[D]").copy()
        vals = np.asarray(self.values, dtype=float).copy()
        if vals.ndim != 1 or ts.shape != vals.shape:
            raise ValueError("timestamps and values must be 1-d and of equal length")
        if vals.size < 1:
            raise ValueError("a TimeSeries needs at least one value")
        if np.isinf(vals).any():
            raise ValueError("values must be finite or NaN (missing)")
        steps = np.diff(ts)
        if (steps <= np.timedelta64(0, "D")).any():
            raise ValueError("timestamps must be strictly increasing")
        if self.frequency is not None:
            if self.frequency not in _FREQ_STEP:
                raise ValueError(f"unknown frequency {self.frequency!r}")
            bad = np.flatnonzero(steps != _FREQ_STEP[self.frequency])
            if bad.size:
                raise ValueError(
                    f"spacing violates {self.frequency} frequency between "
                    f"{ts[bad[0]]} and {ts[bad[0] + 1]}"
                )
        object.__setattr__(self, "timestamps", _readonly(ts))
        object.__setattr__(self, "values", _readonly(vals))

    @classmethod
    def from_values(cls, values, start="2000-01-01", frequency="daily"):
        vals = np.asarray(values, dtype=float)
        ts = np.datetime64(start, "D") + _FREQ_STEP[frequency] * np.arange(vals.size)
        return cls(ts, vals, frequency)

    def __len__(self):
        return self.values.size

    @property
    def observed(self) -> np.ndarray:
        return ~np.isnan(self.values)


def as_values(y) -> np.ndarray:
    if isinstance(y, TimeSeries):
        return np.asarray(y.values, dtype=float)
    vals = np.asarray(y, dtype=float)
    if vals.ndim != 1:
        raise ValueError("observations must be one-dimensional")
    if np.isinf(vals).any():
        raise ValueError("observations must be finite or NaN (missing)")
    return vals


@dataclass(frozen=True)
class SystemMatrices:
    """System matrices of a univariate state-space model.

    ``Z`` is either a constant row of length m or an (n, m) array holding one
    row per time point. ``Q`` is the r x r diagonal disturbance covariance.
    """

    Z: np.ndarray
    T: np.ndarray
    R: np.ndarray
    H: float
    Q: np.ndarray

    def __post_init__(self):
        Z = np.atleast_1d(np.asarray(self.Z, dtype=float)).copy()
        T = np.atleast_2d(np.asarray(self.T, dtype=float)).copy()
        R = np.atleast_2d(np.asarray(self.R, dtype=float)).copy()
        Q = np.asarray(self.Q, dtype=float)
        if Q.ndim < 2:
            Q = np.diag(np.atleast_1d(Q))
        Q = Q.copy()
        m = T.shape[0]
        if T.shape != (m, m):
            raise ValueError(f"transition must be square, got {T.shape}")
        if Z.ndim > 2 or Z.shape[-1] != m:
            raise ValueError(f"observation map has shape {Z.shape}, expected (..., {m})")
        if R.shape[0] != m or Q.shape != (R.shape[1], R.shape[1]):
            raise ValueError(f"R {R.shape} and Q {Q.shape} are inconsistent with m={m}")
        if np.count_nonzero(Q - np.diag(np.diag(Q))):
            raise ValueError("state disturbance covariance must be diagonal")
        if (np.diag(Q) < 0).any():
            raise ValueError("state variances must be nonnegative")
        if not np.isfinite(self.H) or self.H < 0:
            raise ValueError("observation variance must be finite and nonnegative")
        for name, a in (("Z", Z), ("T", T), ("R", R), ("Q", Q)):
            if not np.isfinite(a).all():
                raise ValueError(f"{name} contains non-finite entries")
        object.__setattr__(self, "Z", _readonly(Z))
        object.__setattr__(self, "T", _readonly(T))
        object.__setattr__(self, "R", _readonly(R))
        object.__setattr__(self, "Q", _readonly(Q))
        object.__setattr__(self, "H", float(self.H))

    @property
    def state_dim(self) -> int:
        return self.T.shape[0]

    def obs_rows(self, n: int) -> np.ndarray:
        """Observation map expanded to one row per time point."""
        if self.Z.ndim == 1:
            return np.broadcast_to(self.Z, (n, self.state_dim)).copy()
        if self.Z.shape[0] != n:
            raise ValueError(f"time-varying Z covers {self.Z.shape[0]} steps, series has {n}")
        return np.array(self.Z)

    def state_noise(self) -> np.ndarray:
        return self.R @ self.Q @ self.R.T


@dataclass(frozen=True)
class GaussianState:
    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float)).copy()
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=float)).copy()
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match mean")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise ValueError("state moments must be finite")
        if np.abs(cov - cov.T).max(initial=0.0) > 1e-10:
            raise ValueError("covariance is not symmetric")
        if np.linalg.eigvalsh(cov).min() < -1e-10 * max(1.0, np.abs(cov).max()):
            raise ValueError("covariance is not positive semidefinite")
        object.__setattr__(self, "mean", _readonly(mean))
        object.__setattr__(self, "covariance", _readonly(cov))

    @classmethod
    def diffuse(cls, m: int, variance: float = DIFFUSE_VARIANCE) -> "GaussianState":
        return cls(np.zeros(m), variance * np.eye(m))


@dataclass(frozen=True)
class FilterResult:
    """Kalman filter output, stacked over time.

    ``predicted_*`` hold the moments of a_t given y_{1:t-1}; ``filtered_*``
    those of a_t given y_{1:t}.
    """

    predicted_mean: np.ndarray
    predicted_cov: np.ndarray
    filtered_mean: np.ndarray
    filtered_cov: np.ndarray
    osa_mean: np.ndarray
    osa_variance: np.ndarray
    log_likelihood: float
    observed: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)

    def __len__(self):
        return self.osa_mean.size

    def predicted_state(self, t: int) -> GaussianState:
        return GaussianState(self.predicted_mean[t], self.predicted_cov[t])

    def filtered_state(self, t: int) -> GaussianState:
        return GaussianState(self.filtered_mean[t], self.filtered_cov[t])


@nb.njit(cache=True)
def _filter_kernel(y, Z, T, RQR, H, a0, P0):
    n = y.shape[0]
    m = a0.shape[0]
    a_pred = np.empty((n, m))
    P_pred = np.empty((n, m, m))
    a_filt = np.empty((n, m))
    P_filt = np.empty((n, m, m))
    f_mean = np.empty(n)
    f_var = np.empty(n)
    loglik = 0.0
    bad = -1
    a = a0.copy()
    P = P0.copy()
    for t in range(n):
        a_pred[t] = a
        P_pred[t] = P
        z = Z[t]
        Pz = P @ z
        F = z @ Pz + H
        v = y[t] - z @ a
        f_mean[t] = z @ a
        f_var[t] = F
        if np.isnan(y[t]):
            af = a.copy()
            Pf = P.copy()
        else:
            if not F > 0.0:
                bad = t
                break
            K = Pz / F
            af = a + K * v
            Pf = P - np.outer(K, Pz)
            Pf = 0.5 * (Pf + Pf.T)
            loglik += -0.5 * (np.log(2.0 * np.pi * F) + v * v / F)
        a_filt[t] = af
        P_filt[t] = Pf
        a = T @ af
        P = T @ Pf @ T.T + RQR
        P = 0.5 * (P + P.T)
    return a_pred, P_pred, a_filt, P_filt, f_mean, f_var, loglik, bad


def _check_init(model: SystemMatrices, init: GaussianState):
    if init.mean.size != model.state_dim:
        raise ValueError(
            f"initial state has dimension {init.mean.size}, model has {model.state_dim}"
        )


def kalman_filter(model: SystemMatrices, init: GaussianState, y) -> FilterResult:
    """Run the covariance-form Kalman filter over ``y``."""
    _check_init(model, init)
    vals = as_values(y)
    Z = model.obs_rows(vals.size)
    out = _filter_kernel(vals, Z, np.array(model.T), model.state_noise(), model.H,
                         np.array(init.mean), np.array(init.covariance))
    a_pred, P_pred, a_filt, P_filt, f_mean, f_var, loglik, bad = out
    if bad >= 0:
        raise DegenerateVarianceError(
            f"one-step-ahead variance {f_var[bad]!r} is not positive at t={bad + 1}"
        )
    observed = ~np.isnan(vals)
    return FilterResult(a_pred, P_pred, a_filt, P_filt, f_mean, f_var, float(loglik),
                        observed, vals)


def kalman_smooth(model: SystemMatrices, filt: FilterResult) -> list[GaussianState]:
    """Fixed-interval smoother (backward state recursion of Durbin and Koopman)."""
    n = len(filt)
    Z = model.obs_rows(n)
    T = model.T
    m = model.state_dim
    r = np.zeros(m)
    N = np.zeros((m, m))
    means = np.empty((n, m))
    covs = np.empty((n, m, m))
    for t in range(n - 1, -1, -1):
        a, P = filt.predicted_mean[t], filt.predicted_cov[t]
        if filt.observed[t]:
            z = Z[t]
            F = filt.osa_variance[t]
            v = filt.y[t] - filt.osa_mean[t]
            K = T @ P @ z / F
            L = T - np.outer(K, z)
            r = z * (v / F) + L.T @ r
            N = np.outer(z, z) / F + L.T @ N @ L
        else:
            r = T.T @ r
            N = T.T @ N @ T
        means[t] = a + P @ r
        V = P - P @ N @ P
        covs[t] = 0.5 * (V + V.T)
    return [GaussianState(means[t], _clip_psd(covs[t])) for t in range(n)]


def _clip_psd(S: np.ndarray) -> np.ndarray:
    # rounding can leave eigenvalues a hair below zero
    w, V = np.linalg.eigh(S)
    if w.min() >= 0:
        return S
    S = (V * np.maximum(w, 0.0)) @ V.T
    return 0.5 * (S + S.T)


@nb.njit(cache=True)
def _psd_cholesky(A):
    # lower factor of a positive semidefinite matrix; near-zero pivots give zero columns
    m = A.shape[0]
    L = np.zeros((m, m))
    scale = 0.0
    for i in range(m):
        scale = max(scale, abs(A[i, i]))
    tol = 1e-13 * scale
    for j in range(m):
        d = A[j, j]
        for k in range(j):
            d -= L[j, k] * L[j, k]
        if d <= tol:
            continue
        L[j, j] = np.sqrt(d)
        for i in range(j + 1, m):
            s = A[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / L[j, j]
    return L


@nb.njit(cache=True)
def _psd_draw(mean, cov, z):
    return mean + _psd_cholesky(cov) @ z


@nb.njit(cache=True)
def _pinv_sym(A):
    w, V = np.linalg.eigh(A)
    tol = 1e-13 * max(np.abs(w).max(), 1e-300)
    for i in range(w.shape[0]):
        w[i] = 1.0 / w[i] if w[i] > tol else 0.0
    return (V * w) @ V.T


@nb.njit(cache=True)
def _backward_sample(a_filt, P_filt, a_pred, P_pred, T, z):
    n, m = a_filt.shape
    path = np.empty((n, m))
    path[n - 1] = _psd_draw(a_filt[n - 1], P_filt[n - 1], z[n - 1])
    for t in range(n - 2, -1, -1):
        Pf = P_filt[t]
        J = Pf @ T.T @ _pinv_sym(P_pred[t + 1])
        mean = a_filt[t] + J @ (path[t + 1] - a_pred[t + 1])
        cov = Pf - J @ T @ Pf
        cov = 0.5 * (cov + cov.T)
        path[t] = _psd_draw(mean, cov, z[t])
    return path


@nb.njit(cache=True)
def _mean_correction_sample(y, Z, T, R, q_sd, H, a0, P0, z0, eta_z, eps_z):
    # draw (a+, y+) from the model, then add the smoothed mean of y - y+.
    # Written with explicit loops: this runs once per Gibbs sweep.
    n, m = Z.shape
    r = R.shape[1]
    RQR = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            acc = 0.0
            for k in range(r):
                acc += R[i, k] * q_sd[k] * q_sd[k] * R[j, k]
            RQR[i, j] = acc
    plus = np.empty((n, m))
    L0 = _psd_cholesky(P0)
    for i in range(m):
        acc = a0[i]
        for k in range(m):
            acc += L0[i, k] * z0[k]
        plus[0, i] = acc
    for t in range(1, n):
        for i in range(m):
            acc = 0.0
            for k in range(m):
                acc += T[i, k] * plus[t - 1, k]
            for k in range(r):
                acc += R[i, k] * q_sd[k] * eta_z[t - 1, k]
            plus[t, i] = acc
    sh = np.sqrt(H)

    # forward pass on y* = y - y+ from a zero mean; keep P z, F and v
    Pz_all = np.zeros((n, m))
    F_all = np.zeros(n)
    v_all = np.zeros(n)
    a = np.zeros(m)
    af = np.empty(m)
    P = P0.copy()
    Pf = np.empty((m, m))
    TP = np.empty((m, m))
    for t in range(n):
        ys = y[t]
        if not np.isnan(ys):
            for i in range(m):
                ys -= Z[t, i] * plus[t, i]
            ys -= sh * eps_z[t]
            F = H
            fm = 0.0
            for i in range(m):
                acc = 0.0
                for k in range(m):
                    acc += P[i, k] * Z[t, k]
                Pz_all[t, i] = acc
                F += Z[t, i] * acc
                fm += Z[t, i] * a[i]
            if not F > 0.0:
                return plus, t
            v = ys - fm
            F_all[t] = F
            v_all[t] = v
            for i in range(m):
                af[i] = a[i] + Pz_all[t, i] * v / F
                for j in range(m):
                    Pf[i, j] = P[i, j] - Pz_all[t, i] * Pz_all[t, j] / F
        else:
            F_all[t] = -1.0
            for i in range(m):
                af[i] = a[i]
                for j in range(m):
                    Pf[i, j] = P[i, j]
        for i in range(m):
            acc = 0.0
            for k in range(m):
                acc += T[i, k] * af[k]
            a[i] = acc
            for j in range(m):
                acc = 0.0
                for k in range(m):
                    acc += T[i, k] * Pf[k, j]
                TP[i, j] = acc
        for i in range(m):
            for j in range(i + 1):
                acc = RQR[i, j]
                for k in range(m):
                    acc += TP[i, k] * T[j, k]
                P[i, j] = acc
                P[j, i] = acc

    # backward pass: r_{t-1} = Z_t' v_t / F_t + L_t' r_t with L_t = T - K_t Z_t
    rs = np.empty((n, m))
    rv = np.zeros(m)
    tmp = np.empty(m)
    for t in range(n - 1, -1, -1):
        for i in range(m):
            acc = 0.0
            for k in range(m):
                acc += T[k, i] * rv[k]
            tmp[i] = acc
        if F_all[t] > 0.0:
            # K_t . r_t with K_t = T P z / F
            kr = 0.0
            for i in range(m):
                acc = 0.0
                for k in range(m):
                    acc += T[i, k] * Pz_all[t, k]
                kr += acc * rv[i]
            c = v_all[t] / F_all[t] - kr / F_all[t]
            for i in range(m):
                tmp[i] += Z[t, i] * c
        for i in range(m):
            rv[i] = tmp[i]
            rs[t, i] = tmp[i]

    # forward pass for the smoothed mean, added onto the unconditional draw
    hat = np.empty(m)
    for i in range(m):
        acc = 0.0
        for k in range(m):
            acc += P0[i, k] * rs[0, k]
        hat[i] = acc
        plus[0, i] += acc
    for t in range(1, n):
        for i in range(m):
            acc = 0.0
            for k in range(m):
                acc += T[i, k] * hat[k] + RQR[i, k] * rs[t, k]
            tmp[i] = acc
        for i in range(m):
            hat[i] = tmp[i]
            plus[t, i] += tmp[i]
    return plus, -1


def simulate_states(model: SystemMatrices, y, rng: np.random.Generator,
                    init: GaussianState | None = None,
                    filt: FilterResult | None = None, method: str = "mean_correction") -> np.ndarray:
    """Draw one state path from p(a_{1:n} | y_{1:n}); returns an (n, m) array.

    ``method="ffbs"`` filters forward and samples backward, conditioning each
    a_t on the drawn a_{t+1}. The default ``"mean_correction"`` simulates
    (a+, y+) from the model and adds the smoothed mean of y - y+; it never
    inverts a predicted covariance, so states without noise stay exactly
    deterministic even under a diffuse start. Both give exact draws.
    ``filt`` (a filter run on the same model and data) is reused by ``"ffbs"``.
    """
    if init is None:
        init = GaussianState.diffuse(model.state_dim)
    _check_init(model, init)
    if method == "ffbs":
        if filt is None:
            filt = kalman_filter(model, init, y)
        n, m = filt.filtered_mean.shape
        z = rng.standard_normal((n, m))
        return _backward_sample(filt.filtered_mean, filt.filtered_cov, filt.predicted_mean,
                                filt.predicted_cov, np.array(model.T), z)
    if method != "mean_correction":
        raise ValueError(f"unknown simulation method {method!r}")
    vals = as_values(y)
    n, m, r = vals.size, model.state_dim, model.R.shape[1]
    z0 = rng.standard_normal(m)
    eta = rng.standard_normal((max(n - 1, 1), r))
    eps = rng.standard_normal(n)
    path, bad = _mean_correction_sample(
        vals, model.obs_rows(n), np.array(model.T), np.array(model.R),
        np.sqrt(np.diag(model.Q)), model.H, np.array(init.mean), np.array(init.covariance),
        z0, eta, eps)
    if bad >= 0:
        raise DegenerateVarianceError(f"one-step-ahead variance is not positive at t={bad + 1}")
    return path


def simulate_data(model: SystemMatrices, init: GaussianState, n: int,
                  rng: np.random.Generator, start="2000-01-01", frequency="daily"):
    """Generate (series, states) from the model, with a_1 drawn from ``init``.

    States have shape (n, m).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_init(model, init)
    Z = model.obs_rows(n)
    m = model.state_dim
    r = model.R.shape[1]
    q_sd = np.sqrt(np.diag(model.Q))
    states = np.empty((n, m))
    states[0] = _psd_draw(np.array(init.mean), np.array(init.covariance),
                          rng.standard_normal(m))
    eta = rng.standard_normal((n, r)) * q_sd
    eps = rng.standard_normal(n) * np.sqrt(model.H)
    for t in range(1, n):
        states[t] = model.T @ states[t - 1] + model.R @ eta[t - 1]
    y = np.einsum("tm,tm->t", Z, states) + eps
    return TimeSeries.from_values(y, start=start, frequency=frequency), states

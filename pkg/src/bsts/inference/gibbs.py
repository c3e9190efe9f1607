"""Gibbs sampler for structural time-series models with spike-and-slab regression."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from ..components import AssembledModel
from ..priors import InverseGammaPrior, ModelPriors, SpikeSlabPrior
from ..ssm import _mean_correction_sample, as_values

log = logging.getLogger(__name__)


class GibbsDivergenceError(RuntimeError):
    def __init__(self, iteration: int, reason: str):
        self.iteration = iteration
        super().__init__(f"sampler diverged at iteration {iteration}: {reason}")


@dataclass(frozen=True)
class McmcConfig:
    iterations: int = 3000
    burn_in: int | None = None
    thin: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.iterations // 3)
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError(f"burn_in {self.burn_in} must be in [0, iterations)")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def retained(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thin))

    def with_seed(self, seed: int) -> "McmcConfig":
        return McmcConfig(self.iterations, self.burn_in, self.thin, int(seed))


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained draws of one chain.

    ``states`` is (ndraw, n, m) or None when paths were not kept; ``beta`` and
    ``gamma`` are (ndraw, k); ``variances`` is (ndraw, 1 + r) with columns
    named by ``variance_names`` (observation variance first).
    """

    beta: np.ndarray
    gamma: np.ndarray
    variances: np.ndarray
    variance_names: tuple
    static_names: tuple
    dynamic_names: tuple
    layout: dict
    config: McmcConfig
    states: np.ndarray | None = field(default=None, repr=False)
    dynamic_rows: tuple = ()

    def __len__(self):
        return self.variances.shape[0]

    def variance(self, name: str) -> np.ndarray:
        return self.variances[:, self.variance_names.index(name)]

    @property
    def inclusion_frequency(self) -> np.ndarray:
        return self.gamma.mean(axis=0)


def draw_variance(residuals, prior: InverseGammaPrior, rng: np.random.Generator) -> float:
    """Conjugate draw of a variance given zero-mean Gaussian residuals."""
    e = np.asarray(residuals, dtype=float).ravel()
    if not np.isfinite(e).all():
        raise ValueError("residuals must be finite")
    shape = 0.5 * (prior.shape + e.size)
    rate = 0.5 * (prior.scale + e @ e)
    return 1.0 / rng.gamma(shape, 1.0 / rate)


@nb.njit(cache=True)
def _cholesky_pd(M):
    m = M.shape[0]
    L = np.zeros((m, m))
    for j in range(m):
        d = M[j, j]
        for k in range(j):
            d -= L[j, k] * L[j, k]
        # relative pivot test: exact collinearity leaves only round-off behind
        if not d > 1e-12 * M[j, j]:
            return L, False
        L[j, j] = np.sqrt(d)
        for i in range(j + 1, m):
            s = M[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / L[j, j]
    return L, True


@nb.njit(cache=True)
def _forward(L, b):
    x = b.copy()
    for i in range(b.size):
        for k in range(i):
            x[i] -= L[i, k] * x[k]
        x[i] /= L[i, i]
    return x


@nb.njit(cache=True)
def _backward(L, b):
    # solves L' x = b
    x = b.copy()
    for i in range(b.size - 1, -1, -1):
        for k in range(i + 1, b.size):
            x[i] -= L[k, i] * x[k]
        x[i] /= L[i, i]
    return x


@nb.njit(cache=True)
def _posterior_factor(A, h, prec0, b0, g):
    idx = np.flatnonzero(g)
    p = idx.size
    omega = np.empty((p, p))
    rhs = np.empty(p)
    for a in range(p):
        rhs[a] = h[idx[a]] + prec0[idx[a]] * b0[idx[a]]
        for b in range(p):
            omega[a, b] = A[idx[a], idx[b]]
        omega[a, a] += prec0[idx[a]]
    L, ok = _cholesky_pd(omega)
    return idx, L, rhs, ok


@nb.njit(cache=True)
def _log_marginal(A, h, prec0, b0, g):
    # log p(target | gamma) with beta integrated out, up to a gamma-free constant
    idx, L, rhs, ok = _posterior_factor(A, h, prec0, b0, g)
    if not ok:
        return 0.0, False
    w = _forward(L, rhs)
    out = 0.5 * (w @ w)
    for a in range(idx.size):
        j = idx[a]
        out -= 0.5 * (prec0[j] * b0[j] * b0[j] - np.log(prec0[j])) + np.log(L[a, a])
    return out, True


@nb.njit(cache=True)
def _ssvs_kernel(A, h, prec0, b0, pi, g, u, z):
    k = h.size
    current, ok = _log_marginal(A, h, prec0, b0, g)
    if not ok:
        return np.zeros(k), g, False
    for j in range(k):
        if pi[j] <= 0.0 or pi[j] >= 1.0:
            new = pi[j] >= 1.0
            if new != g[j]:
                g[j] = new
                current, ok = _log_marginal(A, h, prec0, b0, g)
                if not ok:
                    return np.zeros(k), g, False
            continue
        g[j] = not g[j]
        other, ok = _log_marginal(A, h, prec0, b0, g)
        if not ok:
            return np.zeros(k), g, False
        g[j] = not g[j]
        if g[j]:
            diff = current - other
        else:
            diff = other - current
        logit = np.log(pi[j]) - np.log1p(-pi[j]) + diff
        p_in = 1.0 / (1.0 + np.exp(-logit))
        new = u[j] < p_in
        if new != g[j]:
            g[j] = new
            current = other
    beta = np.zeros(k)
    idx, L, rhs, ok = _posterior_factor(A, h, prec0, b0, g)
    if not ok:
        return beta, g, False
    mean = _backward(L, _forward(L, rhs))
    noise = _backward(L, z[: idx.size])
    for a in range(idx.size):
        beta[idx[a]] = mean[a] + noise[a]
    return beta, g, True


def draw_coefficients(design, target, sigma2: float, prior: SpikeSlabPrior,
                      rng: np.random.Generator, gamma=None):
    """One Gibbs sweep over inclusion indicators, then the included coefficients.

    Each indicator is drawn from its conditional with the coefficients
    integrated out; coefficients of excluded columns are exactly zero.
    Returns ``(beta, gamma)``.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(target, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError(f"design {X.shape} does not match target of length {y.size}")
    k = X.shape[1]
    if len(prior) != k:
        raise ValueError(f"prior has {len(prior)} entries for {k} columns")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("design and target must be finite")
    return _draw_coefficients(X.T @ X, X.T @ y, sigma2, prior, rng, gamma)


def _draw_coefficients(XtX, Xty, sigma2, prior, rng, gamma=None):
    k = Xty.size
    g = np.zeros(k, dtype=np.bool_) if gamma is None else np.array(gamma, dtype=np.bool_)
    u = rng.random(k)
    z = rng.standard_normal(k)
    beta, g, ok = _ssvs_kernel(XtX / sigma2, Xty / sigma2, 1.0 / prior.slab_variance,
                               np.array(prior.prior_mean), np.array(prior.inclusion_prob),
                               g, u, z)
    if not ok:
        raise ValueError("conditional precision of included coefficients is singular")
    return beta, g.astype(np.int8)


def resolve_priors(model: AssembledModel, y, priors: ModelPriors | None = None) -> ModelPriors:
    """Fill every prior the model needs, starting from ``priors`` and component settings."""
    vals = as_values(y)
    var_y = float(np.var(vals[~np.isnan(vals)], ddof=1)) if np.sum(~np.isnan(vals)) > 1 else 1.0
    state = {}
    for d in model.disturbances:
        if priors is not None and d.name in priors.state:
            state[d.name] = priors.state[d.name]
        else:
            state[d.name] = d.prior or InverseGammaPrior.weak(var_y)
    obs = priors.observation if priors is not None else InverseGammaPrior.weak(var_y)
    slab = priors.spike_slab if priors is not None else None
    if model.static_design is not None:
        k = model.static_design.shape[1]
        if slab is None:
            slab = model.spike_slab if model.spike_slab is not None else \
                SpikeSlabPrior.uninformative(k)
        if len(slab) != k:
            raise ValueError(f"spike-and-slab prior has {len(slab)} entries for {k} columns")
    else:
        slab = None
    fixed = dict(priors.fixed) if priors is not None else {}
    unknown = set(fixed) - {"obs", *model.disturbance_names}
    if unknown:
        raise ValueError(f"cannot fix unknown variances {sorted(unknown)}")
    return ModelPriors(obs, state, slab, fixed)


def run_gibbs(model: AssembledModel, y, priors: ModelPriors | None = None,
              config: McmcConfig | None = None, keep_states: bool = True) -> PosteriorDraws:
    """Sample states, variances and static coefficients; deterministic given the seed.

    One sweep draws (1) the state path with the mean-correction simulation
    smoother, (2) each state disturbance variance, (3) static coefficients
    and inclusion indicators, (4) the observation variance.
    """
    config = config or McmcConfig()
    vals = as_values(y)
    if vals.size != model.n:
        raise ValueError(f"series has {vals.size} points, model was assembled for {model.n}")
    priors = resolve_priors(model, vals, priors)
    rng = np.random.default_rng(int(config.seed))

    obs = ~np.isnan(vals)
    y_obs = vals[obs]
    Z = np.array(model.matrices.Z)
    T = np.array(model.matrices.T)
    a0 = np.array(model.init.mean)
    P0 = np.array(model.init.covariance)
    rows = np.array([d.row for d in model.disturbances], dtype=int)
    R = np.array(model.matrices.R)
    r = R.shape[1]
    names = model.disturbance_names

    X = model.static_design
    k = 0 if X is None else X.shape[1]
    if k:
        X_obs = X[obs]
        XtX = X_obs.T @ X_obs

    fixed = priors.fixed
    sigma2_obs = fixed.get("obs", priors.observation.guess)
    q = np.array([fixed.get(nm, priors.state[nm].guess) for nm in names])
    beta = np.zeros(k)
    gamma = np.zeros(k, dtype=np.int8)

    n, m = Z.shape
    ndraw = config.retained
    out_states = np.empty((ndraw, n, m)) if keep_states else None
    out_beta = np.zeros((ndraw, k))
    out_gamma = np.zeros((ndraw, k), dtype=np.int8)
    out_var = np.empty((ndraw, 1 + len(names)))
    slot = 0

    for it in range(config.iterations):
        y_adj = vals - X @ beta if k else vals
        path, bad = _mean_correction_sample(
            y_adj, Z, T, R, np.sqrt(q), sigma2_obs, a0, P0, rng.standard_normal(m),
            rng.standard_normal((max(n - 1, 1), r)), rng.standard_normal(n))
        if bad >= 0:
            raise GibbsDivergenceError(it, f"non-positive predictive variance at t={bad + 1}")
        if not np.isfinite(path).all():
            raise GibbsDivergenceError(it, "non-finite state path")

        innov = path[1:] - path[:-1] @ T.T
        for i, nm in enumerate(names):
            if nm not in fixed:
                q[i] = draw_variance(innov[:, rows[i]], priors.state[nm], rng)

        state_mean = np.einsum("tm,tm->t", Z, path)[obs]
        if k:
            partial = y_obs - state_mean
            beta, gamma = _draw_coefficients(XtX, X_obs.T @ partial, sigma2_obs,
                                             priors.spike_slab, rng, gamma)
            resid = partial - X_obs @ beta
        else:
            resid = y_obs - state_mean
        if "obs" not in fixed:
            sigma2_obs = draw_variance(resid, priors.observation, rng)

        if not (np.isfinite(q).all() and np.isfinite(sigma2_obs) and np.isfinite(beta).all()):
            raise GibbsDivergenceError(it, "non-finite parameter draw")
        if it >= config.burn_in and (it - config.burn_in) % config.thin == 0:
            if keep_states:
                out_states[slot] = path
            out_beta[slot] = beta
            out_gamma[slot] = gamma
            out_var[slot, 0] = sigma2_obs
            out_var[slot, 1:] = q
            slot += 1

    log.debug("gibbs run finished: %d retained draws (seed %d)", ndraw, config.seed)
    return PosteriorDraws(
        beta=out_beta,
        gamma=out_gamma,
        variances=out_var,
        variance_names=("obs", *names),
        static_names=model.static_names,
        dynamic_names=model.dynamic_names,
        layout={nm: (s.start, s.stop) for nm, s in model.layout.items()},
        config=config,
        states=out_states,
        dynamic_rows=tuple(d.row for d in model.disturbances if d.name.startswith("dyn:")),
    )

"""Structural components and their superposition into one state-space model."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .intervals import hdi_bands
from .priors import InverseGammaPrior, SpikeSlabPrior
from .ssm import DIFFUSE_VARIANCE, GaussianState, SystemMatrices

INTERVENTION_KINDS = ("pulse", "level_shift", "slope_shift")
CATEGORIES = ("trend", "seasonal", "intervention", "static_regression", "dynamic_regression")


@dataclass(frozen=True)
class LocalLevel:
    level_prior: InverseGammaPrior | None = None
    name: str = "trend"


@dataclass(frozen=True)
class LocalLinearTrend:
    level_prior: InverseGammaPrior | None = None
    slope_prior: InverseGammaPrior | None = None
    name: str = "trend"


@dataclass(frozen=True)
class Seasonal:
    period: int
    prior: InverseGammaPrior | None = None
    name: str = "seasonal"


@dataclass(frozen=True)
class Intervention:
    """Pulse, level-shift or slope-shift regressor starting at 1-based time ``onset``.

    The coefficient is constant unless ``dynamic`` is set, in which case it
    follows a random walk.
    """

    kind: str
    onset: int
    dynamic: bool = False
    prior: InverseGammaPrior | None = None
    name: str | None = None


@dataclass(frozen=True)
class StaticRegression:
    design: np.ndarray
    names: tuple = ()
    prior: SpikeSlabPrior | None = None
    name: str = "static_regression"


@dataclass(frozen=True)
class DynamicRegression:
    design: np.ndarray
    names: tuple = ()
    priors: tuple = ()
    name: str = "dynamic_regression"


def intervention_design(kind: str, onset: int, n: int) -> np.ndarray:
    if kind not in INTERVENTION_KINDS:
        raise ValueError(f"unknown intervention kind {kind!r}")
    if not 1 <= onset <= n:
        raise ValueError(f"intervention onset {onset} outside 1..{n}")
    t = np.arange(1, n + 1)
    if kind == "pulse":
        return (t == onset).astype(float)
    if kind == "level_shift":
        return (t >= onset).astype(float)
    return np.maximum(0, t - onset + 1).astype(float)


@dataclass(frozen=True)
class Disturbance:
    name: str
    row: int
    prior: InverseGammaPrior | None


@dataclass(frozen=True)
class AssembledModel:
    """Superposed model: system matrices plus the bookkeeping to read them back.

    ``matrices`` carries placeholder variances (H=1, Q=I); use
    :meth:`with_variances` to plug in actual values.
    """

    matrices: SystemMatrices
    init: GaussianState
    layout: dict
    categories: dict
    disturbances: tuple
    static_design: np.ndarray | None
    static_names: tuple
    spike_slab: SpikeSlabPrior | None
    dynamic_names: tuple
    components: tuple = field(repr=False)

    @property
    def n(self) -> int:
        return self.matrices.Z.shape[0]

    @property
    def state_dim(self) -> int:
        return self.matrices.state_dim

    @property
    def disturbance_names(self) -> tuple:
        return tuple(d.name for d in self.disturbances)

    def with_variances(self, obs_variance: float, state_variances) -> SystemMatrices:
        q = np.asarray(state_variances, dtype=float).reshape(len(self.disturbances))
        m = self.matrices
        return SystemMatrices(m.Z, m.T, m.R, obs_variance, np.diag(q))

    def static_contribution(self, beta) -> np.ndarray:
        if self.static_design is None:
            return np.zeros(self.n)
        return self.static_design @ np.asarray(beta, dtype=float)


def _as_design(X, n, label):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] != n:
        raise ValueError(f"{label} design has {X.shape[0]} rows, series has {n}")
    if not np.isfinite(X).all():
        raise ValueError(f"{label} design contains missing or non-finite values")
    return X


def _names(names, k, prefix):
    names = tuple(names)
    if not names:
        return tuple(f"{prefix}{j + 1}" for j in range(k))
    if len(names) != k:
        raise ValueError(f"got {len(names)} names for {k} columns")
    return names


def assemble(components, n: int, diffuse_variance: float = DIFFUSE_VARIANCE) -> AssembledModel:
    """Stack components block-diagonally into one model for a series of length n."""
    components = tuple(components)
    if n < 1:
        raise ValueError("series length must be positive")
    trends = [c for c in components if isinstance(c, (LocalLevel, LocalLinearTrend))]
    if len(trends) > 1:
        raise ValueError("at most one of LocalLevel / LocalLinearTrend may be used")
    statics = [c for c in components if isinstance(c, StaticRegression)]
    if len(statics) > 1:
        raise ValueError("at most one StaticRegression component may be used")

    Z_blocks, T_blocks = [], []
    layout, categories = {}, {}
    disturbances = []
    dynamic_names = ()
    row = 0
    n_interventions = 0

    def add_block(name, category, Z, T, noisy_rows):
        nonlocal row
        if name in layout:
            raise ValueError(f"duplicate component name {name!r}")
        dim = T.shape[0]
        Z_blocks.append(Z)
        T_blocks.append(T)
        layout[name] = slice(row, row + dim)
        categories[name] = category
        for label, local_row, prior in noisy_rows:
            disturbances.append(Disturbance(label, row + local_row, prior))
        row += dim

    for comp in components:
        if isinstance(comp, LocalLevel):
            add_block(comp.name, "trend", np.ones((n, 1)), np.eye(1),
                      [("level", 0, comp.level_prior)])
        elif isinstance(comp, LocalLinearTrend):
            Z = np.zeros((n, 2))
            Z[:, 0] = 1.0
            add_block(comp.name, "trend", Z, np.array([[1.0, 1.0], [0.0, 1.0]]),
                      [("level", 0, comp.level_prior), ("slope", 1, comp.slope_prior)])
        elif isinstance(comp, Seasonal):
            S = int(comp.period)
            if S < 2:
                raise ValueError("seasonal period must be at least 2")
            if S > n / 2:
                raise ValueError(f"seasonal period {S} exceeds half the series length {n}")
            T = np.zeros((S - 1, S - 1))
            T[0, :] = -1.0
            T[1:, :-1] = np.eye(S - 2)
            Z = np.zeros((n, S - 1))
            Z[:, 0] = 1.0
            add_block(comp.name, "seasonal", Z, T, [(comp.name, 0, comp.prior)])
        elif isinstance(comp, Intervention):
            n_interventions += 1
            name = comp.name or f"intervention_{n_interventions}"
            x = intervention_design(comp.kind, int(comp.onset), n)
            noisy = [(name, 0, comp.prior)] if comp.dynamic else []
            add_block(name, "intervention", x[:, None], np.eye(1), noisy)
        elif isinstance(comp, DynamicRegression):
            X = _as_design(comp.design, n, "dynamic regression")
            k = X.shape[1]
            names = _names(comp.names, k, "x")
            priors = tuple(comp.priors) or (None,) * k
            if len(priors) != k:
                raise ValueError("one variance prior per dynamic column is required")
            add_block(comp.name, "dynamic_regression", X, np.eye(k),
                      [(f"dyn:{nm}", j, p) for j, (nm, p) in enumerate(zip(names, priors))])
            dynamic_names = dynamic_names + names
        elif isinstance(comp, StaticRegression):
            pass
        else:
            raise TypeError(f"unsupported component {comp!r}")

    if row == 0:
        raise ValueError("the model needs at least one state component")

    Z = np.hstack(Z_blocks)
    T = block_diag(*T_blocks)
    R = np.zeros((row, len(disturbances)))
    for j, d in enumerate(disturbances):
        R[d.row, j] = 1.0
    matrices = SystemMatrices(Z, T, R, 1.0, np.eye(len(disturbances)))

    static_design, static_names, spike_slab = None, (), None
    if statics:
        comp = statics[0]
        static_design = _as_design(comp.design, n, "static regression")
        static_names = _names(comp.names, static_design.shape[1], "x")
        spike_slab = comp.prior
        if spike_slab is not None and len(spike_slab) != static_design.shape[1]:
            raise ValueError("spike-and-slab prior length does not match the design")
        static_design.flags.writeable = False

    return AssembledModel(
        matrices=matrices,
        init=GaussianState.diffuse(row, diffuse_variance),
        layout=layout,
        categories=categories,
        disturbances=tuple(disturbances),
        static_design=static_design,
        static_names=static_names,
        spike_slab=spike_slab,
        dynamic_names=dynamic_names,
        components=components,
    )


def fitted_mean(model: AssembledModel, states: np.ndarray, beta=None) -> np.ndarray:
    """Observation mean Z_t a_t + x_t'beta for each draw; states is (ndraw, n, m)."""
    Z = model.matrices.Z
    out = np.einsum("tm,dtm->dt", Z, states)
    if model.static_design is not None and beta is not None:
        out = out + np.asarray(beta) @ model.static_design.T
    return out


def component_contributions(model: AssembledModel, states: np.ndarray, beta=None) -> dict:
    """Per-draw contribution of each category, each of shape (ndraw, n).

    Categories absent from the model are returned as zeros.
    """
    if states.ndim != 3 or states.shape[1:] != (model.n, model.state_dim):
        raise ValueError(
            f"state draws of shape {states.shape} do not match the model layout "
            f"(n={model.n}, m={model.state_dim})"
        )
    Z = model.matrices.Z
    out = {c: np.zeros(states.shape[:2]) for c in CATEGORIES}
    for name, rows in model.layout.items():
        out[model.categories[name]] += np.einsum("tm,dtm->dt", Z[:, rows], states[:, :, rows])
    if model.static_design is not None and beta is not None:
        out["static_regression"] = np.asarray(beta) @ model.static_design.T
    return out


@dataclass(frozen=True)
class Band:
    mean: np.ndarray
    low: np.ndarray
    high: np.ndarray


def decompose(draws, model: AssembledModel, mass: float = 0.95) -> dict:
    """Posterior mean and pointwise HDI of every component's contribution.

    Returns a dict keyed by category plus ``"fitted"`` for the total.
    """
    if draws.states is None:
        raise ValueError("draws were stored without state paths")
    if tuple(draws.layout) != tuple(model.layout) or draws.states.shape[2] != model.state_dim:
        raise ValueError("draws were not produced on this model layout")
    beta = draws.beta if model.static_design is not None else None
    parts = component_contributions(model, draws.states, beta)
    parts["fitted"] = fitted_mean(model, draws.states, beta)
    bands = {}
    for name, per_draw in parts.items():
        low, high = hdi_bands(per_draw, mass)
        bands[name] = Band(per_draw.mean(axis=0), low, high)
    return bands

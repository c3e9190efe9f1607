"""Bayesian structural time series: Kalman filtering, Gibbs sampling with
spike-and-slab selection, decomposition and forecast evaluation."""

from .components import (
    AssembledModel,
    DynamicRegression,
    Intervention,
    LocalLevel,
    LocalLinearTrend,
    Seasonal,
    StaticRegression,
    assemble,
    decompose,
    intervention_design,
)
from .priors import InverseGammaPrior, ModelPriors, SpikeSlabPrior
from .ssm import (
    FilterResult,
    GaussianState,
    SystemMatrices,
    TimeSeries,
    kalman_filter,
    kalman_smooth,
    simulate_data,
    simulate_states,
)

__version__ = "0.1.0"

__all__ = [
    "AssembledModel",
    "DynamicRegression",
    "FilterResult",
    "GaussianState",
    "Intervention",
    "InverseGammaPrior",
    "LocalLevel",
    "LocalLinearTrend",
    "ModelPriors",
    "Seasonal",
    "SpikeSlabPrior",
    "StaticRegression",
    "SystemMatrices",
    "TimeSeries",
    "assemble",
    "decompose",
    "intervention_design",
    "kalman_filter",
    "kalman_smooth",
    "simulate_data",
    "simulate_states",
]

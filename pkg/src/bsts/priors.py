from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_SHAPE = 0.01
DEFAULT_SCALE_FRACTION = 0.01


@dataclass(frozen=True)
class InverseGammaPrior:
    """Prior on a variance through its precision: 1/sigma^2 ~ Gamma(shape/2, rate=scale/2).

    ``shape`` acts as a prior sample size and ``scale`` as a prior sum of squares.
    """

    shape: float
    scale: float

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError(f"inverse-gamma weights must be positive, got {self}")

    @classmethod
    def weak(cls, sample_variance: float, shape: float = DEFAULT_SHAPE,
             scale_fraction: float = DEFAULT_SCALE_FRACTION) -> "InverseGammaPrior":
        """Weak prior whose scale tracks the data's sample variance."""
        v = float(sample_variance)
        if not np.isfinite(v) or v <= 0:
            v = 1.0
        return cls(shape, scale_fraction * v)

    @property
    def guess(self) -> float:
        return self.scale / self.shape


@dataclass(frozen=True)
class SpikeSlabPrior:
    """Point mass at zero mixed with a Gaussian slab, one entry per column."""

    inclusion_prob: np.ndarray
    prior_mean: np.ndarray
    slab_variance: np.ndarray

    def __post_init__(self):
        pi = np.atleast_1d(np.asarray(self.inclusion_prob, dtype=float)).copy()
        k = pi.size
        mean = np.broadcast_to(np.asarray(self.prior_mean, dtype=float), (k,)).copy()
        var = np.broadcast_to(np.asarray(self.slab_variance, dtype=float), (k,)).copy()
        if ((pi < 0) | (pi > 1)).any() or np.isnan(pi).any():
            raise ValueError("inclusion probabilities must lie in [0, 1]")
        if not (var > 0).all():
            raise ValueError("slab variances must be positive")
        if not np.isfinite(mean).all():
            raise ValueError("prior means must be finite")
        for a in (pi, mean, var):
            a.flags.writeable = False
        object.__setattr__(self, "inclusion_prob", pi)
        object.__setattr__(self, "prior_mean", mean)
        object.__setattr__(self, "slab_variance", var)

    @classmethod
    def uninformative(cls, k: int, inclusion_prob: float = 0.5, prior_mean: float = 0.0,
                      slab_variance: float = 1.0) -> "SpikeSlabPrior":
        return cls(np.full(k, inclusion_prob), np.full(k, prior_mean), np.full(k, slab_variance))

    def __len__(self):
        return self.inclusion_prob.size


@dataclass(frozen=True)
class ModelPriors:
    """Complete prior set for a Gibbs run.

    ``state`` maps disturbance names to their variance priors; ``fixed`` pins
    variances (keyed by disturbance name or ``"obs"``) to constants.
    """

    observation: InverseGammaPrior
    state: dict = field(default_factory=dict)
    spike_slab: SpikeSlabPrior | None = None
    fixed: dict = field(default_factory=dict)

    def replace_spike_slab(self, prior: SpikeSlabPrior) -> "ModelPriors":
        return ModelPriors(self.observation, dict(self.state), prior, dict(self.fixed))

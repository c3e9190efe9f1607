"""Empirical-Bayes calibration of inclusion probabilities from independent chains."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..components import AssembledModel
from ..priors import ModelPriors, SpikeSlabPrior
from .gibbs import McmcConfig, resolve_priors, run_gibbs

log = logging.getLogger(__name__)


class CalibrationError(RuntimeError):
    def __init__(self, failures: dict):
        self.failures = failures
        detail = "; ".join(f"seed {s}: {e}" for s, e in failures.items())
        super().__init__(f"{len(failures)} chain(s) failed: {detail}")


@dataclass(frozen=True)
class CalibrationResult:
    prior: SpikeSlabPrior
    initial_prior: SpikeSlabPrior
    seeds: tuple
    inclusion: np.ndarray
    coefficient_means: np.ndarray


def chain_seeds(seed: int, chains: int) -> tuple:
    """Independent 64-bit seeds derived from one master seed."""
    children = np.random.SeedSequence(int(seed)).spawn(chains)
    return tuple(int(c.generate_state(1, np.uint64)[0]) for c in children)


def _chain(args):
    model, y, priors, config = args
    draws = run_gibbs(model, y, priors, config, keep_states=False)
    return draws.inclusion_frequency, draws.beta.mean(axis=0)


def multi_seed_calibrate(model: AssembledModel, y, priors: ModelPriors | None,
                         config: McmcConfig, chains: int, update_means: bool = False,
                         seeds=None, workers: int = 1) -> CalibrationResult:
    """Run ``chains`` independent chains and average their inclusion frequencies.

    The updated prior sets each inclusion probability to the across-chain mean
    inclusion frequency. Prior means are replaced by across-chain mean
    coefficients only when ``update_means`` is set, since that reuses the data
    twice.
    """
    if chains < 1:
        raise ValueError("chains must be >= 1")
    if model.static_design is None:
        raise ValueError("calibration needs a StaticRegression component")
    priors = resolve_priors(model, y, priors)
    seeds = tuple(int(s) for s in seeds) if seeds is not None else chain_seeds(config.seed, chains)
    if len(seeds) != chains:
        raise ValueError(f"got {len(seeds)} seeds for {chains} chains")
    jobs = [(model, y, priors, config.with_seed(s)) for s in seeds]

    results, failures = {}, {}
    if workers > 1 and chains > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {s: pool.submit(_chain, job) for s, job in zip(seeds, jobs)}
            for s, fut in futures.items():
                try:
                    results[s] = fut.result()
                except Exception as exc:  # reported per seed below
                    failures[s] = exc
    else:
        for i, (s, job) in enumerate(zip(seeds, jobs)):
            try:
                results[s] = _chain(job)
            except Exception as exc:
                failures[s] = exc
            log.info("calibration chain %d/%d done", i + 1, chains)
    if failures:
        raise CalibrationError(failures)

    inclusion = np.vstack([results[s][0] for s in seeds])
    coef = np.vstack([results[s][1] for s in seeds])
    start = priors.spike_slab
    mean = coef.mean(axis=0) if update_means else start.prior_mean
    updated = SpikeSlabPrior(inclusion.mean(axis=0), mean, start.slab_variance)
    return CalibrationResult(updated, start, seeds, inclusion, coef)


def calibrate_and_fit(model: AssembledModel, y, priors: ModelPriors | None, config: McmcConfig,
                      chains: int, update_means: bool = False, seeds=None, workers: int = 1,
                      keep_states: bool = True):
    """Calibrate the spike-and-slab prior over ``chains`` chains, then run one reference chain.

    The reference chain uses the updated prior and ``config.seed``; its
    inclusion frequencies are the calibrated inclusion probabilities.
    Returns ``(CalibrationResult, PosteriorDraws)``.
    """
    result = multi_seed_calibrate(model, y, priors, config, chains, update_means, seeds, workers)
    base = resolve_priors(model, y, priors)
    final = run_gibbs(model, y, base.replace_spike_slab(result.prior), config, keep_states)
    return result, final

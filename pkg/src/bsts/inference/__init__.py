from ..intervals import hdi, hdi_bands
from .archive import read_draws, write_draws
from .calibrate import (
    CalibrationError,
    CalibrationResult,
    calibrate_and_fit,
    chain_seeds,
    multi_seed_calibrate,
)
from .gibbs import (
    GibbsDivergenceError,
    McmcConfig,
    PosteriorDraws,
    draw_coefficients,
    draw_variance,
    resolve_priors,
    run_gibbs,
)
from .summary import COLUMNS, SummaryTable, dynamic_coefficient_paths, posterior_summary

__all__ = [
    "COLUMNS",
    "CalibrationError",
    "CalibrationResult",
    "GibbsDivergenceError",
    "McmcConfig",
    "PosteriorDraws",
    "SummaryTable",
    "calibrate_and_fit",
    "chain_seeds",
    "draw_coefficients",
    "draw_variance",
    "dynamic_coefficient_paths",
    "hdi",
    "hdi_bands",
    "multi_seed_calibrate",
    "posterior_summary",
    "read_draws",
    "resolve_priors",
    "run_gibbs",
    "write_draws",
]

"""Regenerate the bundled synthetic panel and its run config.

The panel mimics the layout of a weekly price series with 20 candidate
drivers in four correlated groups. The target is a local linear trend plus a
sparse regression on the standardized drivers, drawn with simulate_data.

    python scripts/make_fixtures.py
"""
import csv
import json

import numpy as np

from bsts import GaussianState, LocalLinearTrend, DynamicRegression, assemble, simulate_data
from bsts.data import DATA_DIR
from bsts.preprocessing import standardize

SEED = 20170601
N = 230
START = "2013-01-06"
GROUPS = ("macro", "chain", "search_a", "search_b")
TRUE_BETA = {"macro_1": 3.0, "macro_3": -2.5, "search_a_2": 2.5, "chain_4": -2.0}


def drivers(rng):
    names, cols = [], []
    for g in GROUPS:
        factor = np.cumsum(rng.standard_normal(N))
        for i in range(1, 6):
            noise = np.zeros(N)
            e = rng.standard_normal(N)
            for t in range(1, N):
                noise[t] = 0.8 * noise[t - 1] + e[t]
            names.append(f"{g}_{i}")
            cols.append(standardize(factor + 1.5 * noise).values)
    return names, np.column_stack(cols)


def main():
    rng = np.random.default_rng(SEED)
    names, X = drivers(rng)
    k = len(names)
    model = assemble([LocalLinearTrend(), DynamicRegression(X, tuple(names))], N)
    q = np.zeros(2 + k)
    q[:2] = [0.2 ** 2, 0.02 ** 2]
    matrices = model.with_variances(0.3 ** 2, q)
    beta = np.array([TRUE_BETA.get(nm, 0.0) for nm in names])
    init = GaussianState(np.r_[10.0, 0.05, beta], np.zeros((2 + k, 2 + k)))
    series, _ = simulate_data(matrices, init, N, rng, start=START, frequency="weekly")

    with open(DATA_DIR / "synthetic_panel.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", "price", *names])
        for t in range(N):
            w.writerow([str(series.timestamps[t]), f"{series.values[t]:.6f}",
                        *(f"{v:.6f}" for v in X[t])])

    config = {
        "data": "synthetic_panel.csv",
        "target": "price",
        "regressors": "all",
        "frequency": "weekly",
        "standardize": True,
        "components": [{"type": "local_linear_trend"}, {"type": "static_regression"}],
        "priors": {"inclusion_prob": 0.5, "prior_mean": 0.0, "slab_variance": 1.0},
        "mcmc": {"iterations": 3000, "burn_in": 981, "thin": 1, "seed": SEED},
        "calibration": {"chains": 30, "update_means": False},
        "compare": {"specs": ["LL", "LLTI", "LLTV", "LLT", "LLTTI", "LLTTV"]},
        "cluster": {"k": 4},
        "periodogram": {"column": "price"},
        "output": "out",
    }
    (DATA_DIR / "synthetic_panel.json").write_text(json.dumps(config, indent=2) + "\n")
    print(f"wrote {DATA_DIR / 'synthetic_panel.csv'} (seed {SEED})")


if __name__ == "__main__":
    main()

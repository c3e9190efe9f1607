"""Exit criteria, one test (or parametrized family) per criterion.

Each test carries ``@pytest.mark.acceptance(number, title)``; the terminal
summary prints one PASS/FAIL line per criterion. Runtime limits are measured
after a tiny warm-up call so one-off JIT compilation is not counted.
"""
import csv
import json
import time

import numpy as np
import pytest

from bsts import data as bundled
from bsts.cli import COMMANDS, main
from bsts.components import (
    DynamicRegression,
    Intervention,
    LocalLevel,
    LocalLinearTrend,
    Seasonal,
    StaticRegression,
    assemble,
    component_contributions,
    fitted_mean,
)
from bsts.config import RunConfig, build_components, ingest_csv
from bsts.evaluation import (
    CANONICAL_LABELS,
    DESCRIPTIONS,
    canonical_specs,
    compare_models,
    mae,
    mse,
    smape,
)
from bsts.inference import McmcConfig, calibrate_and_fit, draw_variance, run_gibbs
from bsts.intervals import hdi
from bsts.preprocessing import dtw_distance, periodogram, standardize
from bsts.priors import InverseGammaPrior, SpikeSlabPrior
from bsts.ssm import (
    GaussianState,
    SystemMatrices,
    kalman_filter,
    kalman_smooth,
    simulate_data,
    simulate_states,
)
from oracles import (
    dtw_bruteforce,
    joint_gaussian,
    mae_direct,
    mse_direct,
    random_ssm,
    smape_direct,
    ssvs_model_probs,
)
from test_cli import DETERMINISM_CONFIGS, run_twice_from_manifest
from test_inference import ssvs_frequencies, total_variation

acceptance = pytest.mark.acceptance


# 1 -------------------------------------------------------------------------------------------

@acceptance(1, "filter/smoother match joint-Gaussian conditioning on 50 random models")
def test_filter_oracle():
    local = SystemMatrices([1.0], [[1.0]], [[1.0]], 1.0, [1.0])
    kalman_smooth(local, kalman_filter(local, GaussianState([0.0], [[1.0]]), [1.0]))
    rng = np.random.default_rng(2024)
    cases = [random_ssm(rng, m=int(rng.integers(1, 5)), n=int(rng.integers(1, 7)))
             for _ in range(50)]
    start = time.perf_counter()
    for Z, T, R, Q, H, a0, P0, y in cases:
        model = SystemMatrices(Z, T, R, H, np.diag(Q))
        res = kalman_filter(model, GaussianState(a0, P0), y)
        sm = kalman_smooth(model, res)
        o = joint_gaussian(Z, T, R, Q, H, a0, P0, y)
        np.testing.assert_allclose(res.filtered_mean, o["filt_mean"], atol=1e-8, rtol=0)
        np.testing.assert_allclose(res.filtered_cov, o["filt_cov"], atol=1e-8, rtol=0)
        np.testing.assert_allclose([s.mean for s in sm], o["smooth_mean"], atol=1e-8, rtol=0)
        np.testing.assert_allclose([s.covariance for s in sm], o["smooth_cov"], atol=1e-8, rtol=0)
        assert abs(res.log_likelihood - o["loglik"]) <= 1e-8
    assert time.perf_counter() - start < 10.0


# 2 -------------------------------------------------------------------------------------------

@acceptance(2, "20000 state draws reproduce smoother moments within 4 MC standard errors")
@pytest.mark.parametrize("method", ["ffbs", "mean_correction"])
def test_state_sampler_consistency(method):
    model = SystemMatrices([1.0], [[1.0]], [[1.0]], 1.0, [1.0])
    init = GaussianState([0.0], [[1.0]])
    y = np.array([1.0, 2.0, 3.0])
    res = kalman_filter(model, init, y)
    sm = kalman_smooth(model, res)
    rng = np.random.default_rng(20000)
    simulate_states(model, y, rng, init, res, method)
    start = time.perf_counter()
    draws = np.array([simulate_states(model, y, rng, init, res, method)[:, 0]
                      for _ in range(20000)])
    elapsed = time.perf_counter() - start
    N = draws.shape[0]
    for t, s in enumerate(sm):
        mu, var = s.mean[0], s.covariance[0, 0]
        assert abs(draws[:, t].mean() - mu) <= 4 * np.sqrt(var / N)
        assert abs(draws[:, t].var(ddof=1) - var) <= 4 * var * np.sqrt(2 / (N - 1))
    assert elapsed < 30.0


# 3 -------------------------------------------------------------------------------------------

@acceptance(3, "10^5 precision draws match the Gamma full conditional within 2%")
@pytest.mark.parametrize("nu,s,n,sse", [(0.01, 0.01, 50, 37.0), (2.0, 3.0, 10, 4.5),
                                        (5.0, 0.5, 200, 180.0)])
def test_variance_conditional(nu, s, n, sse):
    rng = np.random.default_rng(n)
    e = rng.normal(size=n)
    e *= np.sqrt(sse / (e @ e))
    prior = InverseGammaPrior(nu, s)
    prec = np.array([1.0 / draw_variance(e, prior, rng) for _ in range(100_000)])
    shape, rate = (nu + n) / 2, (s + sse) / 2
    assert abs(prec.mean() / (shape / rate) - 1) <= 0.02
    assert abs(prec.var() / (shape / rate ** 2) - 1) <= 0.02


# 4 -------------------------------------------------------------------------------------------

def _ssvs_design(k):
    rng = np.random.default_rng(100 + k)
    n = 25
    base = rng.normal(size=(n, 1))
    X = 0.6 * base + rng.normal(size=(n, k))
    X -= X.mean(axis=0)
    y = X @ np.linspace(0.35, -0.2, k) + rng.normal(size=n)
    prior = SpikeSlabPrior(np.linspace(0.5, 0.3, k), 0.0, np.linspace(1.0, 2.0, k))
    return X, y, prior


@acceptance(4, "SSVS model frequencies match enumeration within 0.02 total variation")
@pytest.mark.parametrize("k", [1, 2, 3])
def test_ssvs_exactness(k):
    X, y, prior = _ssvs_design(k)
    sigma2 = 0.8
    exact = ssvs_model_probs(X, y, sigma2, prior.inclusion_prob, prior.slab_variance)
    freq = ssvs_frequencies(X, y, sigma2, prior, 50_000, seed=k)
    assert total_variation(freq, exact) <= 0.02


# 5 -------------------------------------------------------------------------------------------

SIGNAL = {0: 1.0, 7: -0.75, 13: 0.5}


def _sparse_regression(seed, n=500, k=20):
    rng = np.random.default_rng(seed)
    X = np.column_stack([standardize(rng.standard_normal(n)).values for _ in range(k)])
    beta = np.zeros(k)
    for j, b in SIGNAL.items():
        beta[j] = b
    return 2.0 + X @ beta + rng.standard_normal(n), X, beta


@acceptance(5, "calibrated selection recovers 3 signals among 20 columns at 3 seeds")
@pytest.mark.parametrize("seed", [1, 2, 3])
def test_selection_recovery(seed):
    start = time.perf_counter()
    y, X, beta = _sparse_regression(seed)
    model = assemble([LocalLevel(), StaticRegression(X)], len(y))
    _, final = calibrate_and_fit(model, y, None, McmcConfig(3000, 981, seed=seed), chains=5)
    inc = final.inclusion_frequency
    signal = beta != 0
    assert time.perf_counter() - start < 100.0
    assert (inc[signal] > 0.9).all(), f"signal inclusion {np.round(inc[signal], 3)}"
    assert (inc[~signal] < 0.1).all(), f"null inclusion {np.round(inc[~signal], 3)}"


# 6 -------------------------------------------------------------------------------------------

TRUE_VARIANCES = {"obs": 1.0, "level": 0.1, "slope": 0.01}


@acceptance(6, "95% HDIs cover the true LLT variances in at least 2 of 3 runs")
def test_parameter_recovery():
    n = 500
    model = assemble([LocalLinearTrend()], n)
    truth = model.with_variances(TRUE_VARIANCES["obs"],
                                 [TRUE_VARIANCES["level"], TRUE_VARIANCES["slope"]])
    report, covered = [], 0
    for seed in (1, 2, 3):
        y, _ = simulate_data(truth, GaussianState([10.0, 0.1], np.zeros((2, 2))), n,
                             np.random.default_rng(seed))
        draws = run_gibbs(model, y, None, McmcConfig(3000, 981, seed=seed), keep_states=False)
        hits = []
        for name, value in TRUE_VARIANCES.items():
            lo, hi = hdi(draws.variance(name), 0.95)
            hits.append(lo <= value <= hi)
            report.append(f"seed {seed} {name}: {value} in [{lo:.4g}, {hi:.4g}]")
        covered += all(hits)
    assert covered >= 2, "\n".join(report)


# 7 -------------------------------------------------------------------------------------------

def _fixture_models():
    rng = np.random.default_rng(7)
    n = 90
    X = rng.normal(size=(n, 3))
    y = np.cumsum(rng.normal(size=n)) + X @ [1.0, 0.0, -0.5] + np.sin(np.arange(n) * np.pi / 2)
    yield "local level", [LocalLevel()], y
    yield "trend + seasonal", [LocalLinearTrend(), Seasonal(4)], y
    yield "interventions", [LocalLevel(), Intervention("pulse", 20),
                            Intervention("level_shift", 40),
                            Intervention("slope_shift", 60, dynamic=True)], y
    yield "static + dynamic", [LocalLinearTrend(), StaticRegression(X[:, :2]),
                               DynamicRegression(X[:, 2:], ("z",))], y
    cfg = RunConfig.load(bundled.path("synthetic_panel.json"))
    data = ingest_csv(cfg.data, cfg)
    yield "bundled panel", build_components(cfg.components, data), data.target


@acceptance(7, "per-draw component contributions add up to the fitted mean")
@pytest.mark.parametrize("name,components,y", list(_fixture_models()),
                         ids=lambda v: v if isinstance(v, str) else "")
def test_decomposition_additivity(name, components, y):
    n = len(y)
    model = assemble(components, n)
    draws = run_gibbs(model, y, None, McmcConfig(150, seed=1))
    parts = component_contributions(model, draws.states, draws.beta)
    total = fitted_mean(model, draws.states, draws.beta)
    assert np.abs(sum(parts.values()) - total).max() <= 1e-10


# 8 -------------------------------------------------------------------------------------------

@acceptance(8, "metrics equal direct formulas; six-spec report has the reference layout")
def test_metrics_and_report_format(tmp_path):
    rng = np.random.default_rng(8)
    for _ in range(100):
        n = int(rng.integers(1, 80))
        y, f = rng.normal(5, 3, n), rng.normal(5, 3, n)
        for fast, direct in ((smape, smape_direct), (mae, mae_direct), (mse, mse_direct)):
            assert abs(fast(y, f) - direct(y, f)) <= 1e-12 * max(1.0, abs(direct(y, f)))

    n = 150
    X = rng.normal(size=(n, 4))
    y = 50 + np.cumsum(rng.normal(scale=0.3, size=n)) + X @ [1.0, 0.0, -0.5, 0.0] \
        + rng.normal(scale=0.5, size=n)
    report = compare_models(y, canonical_specs(X), McmcConfig(200, seed=8))
    report.write_csv(tmp_path / "accuracy.csv")
    rows = list(csv.reader(open(tmp_path / "accuracy.csv")))
    assert rows[0] == ["Model", "Label", "sMAPE", "MAE", "MSE"]
    assert [r[1] for r in rows[1:]] == list(CANONICAL_LABELS)
    assert [r[0] for r in rows[1:]] == [DESCRIPTIONS[lab] for lab in CANONICAL_LABELS]
    assert all(np.isfinite(float(v)) for r in rows[1:] for v in r[2:])


# 9 -------------------------------------------------------------------------------------------

@acceptance(9, "periodogram finds the exact Fourier bin and satisfies Parseval")
def test_periodogram():
    for n, j in ((120, 10), (97, 13), (256, 1), (64, 31)):
        t = np.arange(n)
        pg = periodogram(2.0 * np.cos(2 * np.pi * j * t / n + 0.3))
        assert int(np.argmax(pg.power)) + 1 == j
        assert pg.dominant_frequency == pytest.approx(j / n, abs=1e-15)
    rng = np.random.default_rng(9)
    for _ in range(100):
        x = rng.normal(size=int(rng.integers(8, 300))) * rng.uniform(0.1, 50)
        assert abs(periodogram(x).total_power() - np.var(x)) <= 1e-8


# 10 ------------------------------------------------------------------------------------------

@acceptance(10, "DTW equals exhaustive path search on 200 random pairs")
def test_dtw_oracle():
    rng = np.random.default_rng(10)
    for _ in range(200):
        a = rng.normal(size=int(rng.integers(1, 7)))
        b = rng.normal(size=int(rng.integers(1, 7)))
        d = dtw_distance(a, b)
        assert abs(d - dtw_bruteforce(a, b)) <= 1e-12
        assert d == dtw_distance(b, a)
        assert dtw_distance(a, a) == 0.0


# 11 ------------------------------------------------------------------------------------------

@acceptance(11, "every subcommand rerun from its manifest is byte-identical")
@pytest.mark.parametrize("command", COMMANDS)
def test_determinism(tmp_path, command):
    raw = {"data": str(bundled.path("synthetic_panel.csv")), "target": "price",
           "frequency": "weekly", "output": str(tmp_path / "out"),
           **DETERMINISM_CONFIGS[command]}
    first, second = run_twice_from_manifest(tmp_path, command, raw)
    assert first.keys() == second.keys() and first
    for name in first:
        assert first[name] == second[name], name


# 12 ------------------------------------------------------------------------------------------

@acceptance(12, "reference protocol runs on the bundled panel and emits the summary table")
def test_reference_protocol(tmp_path):
    raw = json.loads(bundled.path("synthetic_panel.json").read_text())
    assert (raw["calibration"]["chains"], raw["mcmc"]["iterations"], raw["mcmc"]["burn_in"],
            raw["priors"]["inclusion_prob"]) == (30, 3000, 981, 0.5)
    raw["data"] = str(bundled.path("synthetic_panel.csv"))
    raw["output"] = str(tmp_path / "protocol")
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(raw))
    start = time.perf_counter()
    assert main(["calibrate", "--config", str(cfg), "--quiet"]) == 0
    assert time.perf_counter() - start < 15 * 60
    out = tmp_path / "protocol"
    rows = list(csv.reader(open(out / "summary.csv")))
    assert rows[0] == ["", "Mean", "2.5%", "97.5%", "Non-zero probability"]
    assert len(rows) == 21 and len({r[0] for r in rows[1:]}) == 20
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["results"]["chains"] == 30 and manifest["results"]["retained_draws"] == 2019
    assert len(list(csv.reader(open(out / "chain_inclusion.csv")))) == 31

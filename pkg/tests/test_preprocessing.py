import itertools

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from bsts.preprocessing import (
    cluster_trends,
    destandardize,
    dtw_distance,
    dtw_matrix,
    periodogram,
    standardize,
)
from bsts.ssm import TimeSeries
from oracles import dtw_bruteforce

finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


# --- standardize -----------------------------------------------------------------------------

def test_standardize_small_example():
    s = standardize([1.0, 2.0, 3.0])
    np.testing.assert_allclose(s.values, [-1.0, 0.0, 1.0])
    assert s.original_mean == 2.0 and s.original_sd == 1.0
    np.testing.assert_allclose(destandardize(s), [1.0, 2.0, 3.0])


def test_standardize_is_idempotent():
    x = np.random.default_rng(0).normal(3.0, 2.0, size=50)
    once = standardize(x).values
    np.testing.assert_allclose(standardize(once).values, once, atol=1e-10)


def test_standardize_rejects_constant_series():
    with pytest.raises(ValueError, match="zero variance"):
        standardize([5.0, 5.0, 5.0])


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=3, max_size=40), st.floats(0.01, 100), finite)
def test_standardize_is_affine_invariant(x, c, d):
    x = np.asarray(x)
    assume(np.std(x) > 1e-3)
    np.testing.assert_allclose(standardize(c * x + d).values, standardize(x).values, atol=1e-7)


# --- periodogram -----------------------------------------------------------------------------

def test_sinusoid_at_fourier_frequency_lands_in_its_bin():
    t = np.arange(120)
    pg = periodogram(np.sin(2 * np.pi * t / 12))
    assert pg.dominant_period == 12.0
    j = int(np.argmax(pg.power)) + 1
    assert j == 10
    # the analytic DFT puts all the power (n * A^2 / 4 = 30) in that bin
    assert pg.power[j - 1] == pytest.approx(30.0, abs=1e-9)
    others = np.delete(pg.power, j - 1)
    assert others.max() < 1e-20


def test_constant_series_has_no_power():
    pg = periodogram(np.full(64, 7.5))
    assert np.abs(pg.power).max() < 1e-10


def test_stronger_of_two_sinusoids_dominates():
    t = np.arange(240)
    x = 3 * np.cos(2 * np.pi * 8 * t / 240) + np.sin(2 * np.pi * 30 * t / 240)
    pg = periodogram(x)
    assert pg.dominant_frequency == pytest.approx(8 / 240)
    np.testing.assert_allclose(np.sort(pg.power)[-2:], [240 / 4, 9 * 240 / 4], rtol=1e-12)


def test_frequency_grid():
    pg = periodogram(np.random.default_rng(0).normal(size=11))
    np.testing.assert_allclose(pg.frequency, np.arange(1, 6) / 11)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=8, max_size=200))
def test_total_power_equals_variance(x):
    x = np.asarray(x)
    assert periodogram(x).total_power() == pytest.approx(np.var(x), abs=1e-8)


def test_periodogram_errors():
    with pytest.raises(ValueError):
        periodogram(np.ones(4))
    with pytest.raises(ValueError):
        periodogram(np.r_[np.ones(10), np.nan])


# --- dtw -------------------------------------------------------------------------------------

def test_dtw_examples():
    assert dtw_distance([0.0], [3.0]) == 3.0
    assert dtw_distance([0, 1, 2], [0, 2]) == dtw_bruteforce([0, 1, 2], [0, 2]) == 1.0
    a = np.random.default_rng(0).normal(size=30)
    assert dtw_distance(a, a) == 0.0
    with pytest.raises(ValueError):
        dtw_distance([], [1.0])


@settings(max_examples=150, deadline=None)
@given(st.lists(finite, min_size=1, max_size=6), st.lists(finite, min_size=1, max_size=6))
def test_dtw_matches_path_enumeration(a, b):
    assert dtw_distance(a, b) == pytest.approx(dtw_bruteforce(a, b), abs=1e-9)
    assert dtw_distance(a, b) == dtw_distance(b, a)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30).flatmap(lambda n: st.tuples(st.lists(finite, min_size=n, max_size=n),
                                                      st.lists(finite, min_size=n, max_size=n))))
def test_dtw_bounded_by_pointwise_distance(pair):
    a, b = map(np.asarray, pair)
    assert dtw_distance(a, b) <= np.abs(a - b).sum() + 1e-9


# --- clustering ------------------------------------------------------------------------------

def test_identical_pair_is_clustered_together():
    t = np.linspace(0, 1, 40)
    tree = cluster_trends({"a": t ** 2, "b": t ** 2, "c": np.sin(12 * t)}, k=2)
    assert tree.flat_labels["a"] == tree.flat_labels["b"] != tree.flat_labels["c"]
    assert tree.heights[0] == 0.0


def test_noisy_copies_of_two_shapes():
    rng = np.random.default_rng(5)
    t = np.linspace(0, 1, 60)
    up, bump = t, np.exp(-((t - 0.5) / 0.1) ** 2)
    series = {"up1": up + rng.normal(0, 0.02, 60), "up2": up + rng.normal(0, 0.02, 60),
              "bump1": bump + rng.normal(0, 0.05, 60), "bump2": bump + rng.normal(0, 0.05, 60)}
    labels = cluster_trends(series, k=2).flat_labels
    assert labels["up1"] == labels["up2"] != labels["bump1"] == labels["bump2"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_dendrogram_heights_never_decrease(seed, k):
    rng = np.random.default_rng(seed)
    series = {f"s{i}": np.cumsum(rng.normal(size=25)) for i in range(k)}
    h = cluster_trends(series).heights
    assert (np.diff(h) >= -1e-12).all()


def test_cluster_rejects_mixed_frequencies():
    a = TimeSeries.from_values(np.arange(10.0), frequency="daily")
    b = TimeSeries.from_values(np.arange(10.0) ** 2, frequency="weekly")
    with pytest.raises(ValueError, match="frequenc"):
        cluster_trends({"a": a, "b": b})


def test_distance_matrix_is_symmetric_with_zero_diagonal():
    rng = np.random.default_rng(1)
    D = dtw_matrix([rng.normal(size=n) for n in (5, 8, 13)])
    assert np.array_equal(D, D.T) and not np.diag(D).any()
    for i, j in itertools.combinations(range(3), 2):
        assert D[i, j] > 0

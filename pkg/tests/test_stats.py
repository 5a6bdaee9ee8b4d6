import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmfs.stats import correlation_matrix, pearson

from helpers import make_dataset
from oracles import pearson_two_pass

# two-pass by hand: centered x = (-1.5, -.5, .5, 1.5), y = (-1.75, -.75, .25, 2.25)
# sum xy = 6.5, sum xx = 5, sum yy = 8.75
PEARSON_1234_1235 = 6.5 / math.sqrt(5 * 8.75)


def test_pearson_hand_value():
    assert pearson_two_pass([1, 2, 3, 4], [1, 2, 3, 5]) == pytest.approx(PEARSON_1234_1235, abs=1e-15)
    assert abs(pearson([1, 2, 3, 4], [1, 2, 3, 5]) - PEARSON_1234_1235) <= 1e-12


def test_self_and_negated():
    x = np.random.default_rng(0).normal(size=50)
    assert abs(pearson(x, x) - 1) <= 1e-12
    assert abs(pearson(x, -x) + 1) <= 1e-12


def test_undefined_for_constant():
    assert pearson([1, 1, 1], [1, 2, 3]) is None
    assert pearson([1, 2, 3], [4, 4, 4]) is None


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        pearson([1, 2, 3], [1, 2])
    with pytest.raises(ValueError):
        pearson([1], [2])


def test_identical_columns_correlate_one():
    x = np.random.default_rng(1).normal(size=20)
    corr = correlation_matrix(make_dataset(np.c_[x, x], np.arange(20) % 2))
    assert corr.values[0, 1] == pytest.approx(1.0, abs=1e-12)


def test_matrix_matches_pairwise_calls():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(30, 4))
    labels = np.arange(30) % 3
    corr, label_corr = correlation_matrix(make_dataset(x, labels), include_label=True)
    for i in range(4):
        for j in range(4):
            assert abs(corr.values[i, j] - pearson(x[:, i], x[:, j])) <= 1e-12
        assert abs(label_corr[i] - pearson(x[:, i], labels)) <= 1e-12


def test_degenerate_column_marked_undefined():
    x = np.c_[np.arange(5.0), np.full(5, 2.0), [1.0, 3, 2, 5, 4]]
    corr, label_corr = correlation_matrix(make_dataset(x, [0, 1, 0, 1, 0]), include_label=True)
    assert corr.defined.tolist() == [[True, False, True], [False, False, False], [True, False, True]]
    assert np.isnan(corr.values[1]).all()
    assert np.isnan(label_corr[1])
    assert corr.filled()[1].tolist() == [0.0, 0.0, 0.0]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), a=st.floats(-100, 100).filter(lambda v: abs(v) > 1e-3), b=st.floats(-100, 100))
def test_affine_invariance(seed, a, b):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=25), rng.normal(size=25)
    assert abs(pearson(a * x + b, y) - math.copysign(1, a) * pearson(x, y)) <= 1e-9


def test_single_pass_agrees_with_two_pass_oracle():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(2, 200))
        x = rng.normal(size=n) * 10 ** rng.uniform(-3, 3)
        y = rng.normal(size=n) * 10 ** rng.uniform(-3, 3) + 0.5 * x
        assert abs(pearson(x, y) - pearson_two_pass(x.tolist(), y.tolist())) <= 1e-9


def test_matrix_symmetry_and_bounds():
    rng = np.random.default_rng(6)
    for _ in range(20):
        n, d = int(rng.integers(2, 500)), int(rng.integers(1, 50))
        x = rng.normal(size=(n, d)) @ rng.normal(size=(d, d))
        corr = correlation_matrix(make_dataset(x, np.arange(n) % 2))
        v = corr.values
        assert np.array_equal(v, v.T, equal_nan=True)
        assert np.all(np.abs(v[corr.defined]) <= 1 + 1e-12)
        assert np.all(np.diag(v) == 1.0)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from markov_order.numerics import chi2_sf, gamma_q, log_gamma, log_sum_exp
from conftest import chi2_tail_quadrature


@pytest.mark.parametrize("x, expected", [
    (5.0, 3.1780538303479458),   # ln 4!
    (1.0, 0.0),
    (0.5, 0.5723649429247001),   # ln sqrt(pi)
])
def test_log_gamma_known_values(x, expected):
    assert log_gamma(x) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
def test_log_gamma_domain(x):
    with pytest.raises(ValueError):
        log_gamma(x)


def test_log_gamma_recurrence():
    # beyond ~1e4 the difference of two large values loses more than 1e-10 to rounding
    for x in np.geomspace(1e-3, 1e4, 200):
        assert abs(log_gamma(x + 1) - log_gamma(x) - math.log(x)) < 1e-10


def test_chi2_sf_simple_values():
    assert chi2_sf(0.0, 7) == 1.0
    assert chi2_sf(4.0, 2) == pytest.approx(0.1353352832366127, abs=1e-12)
    # frozen from chi2_tail_quadrature(20, 12)
    assert chi2_sf(20.0, 12) == pytest.approx(0.06708596287903183, abs=1e-8)


def test_chi2_sf_df2_closed_form():
    for x in np.linspace(0, 100, 401):
        assert abs(chi2_sf(x, 2) - math.exp(-x / 2)) < 1e-10


@pytest.mark.parametrize("df", [1, 3, 12, 20])
def test_chi2_sf_matches_quadrature(df):
    for x in [0.05, 0.7, 3.0, 11.0, 25.0, 60.0]:
        assert chi2_sf(x, df) == pytest.approx(chi2_tail_quadrature(x, df), abs=1e-8)


def test_chi2_sf_monotone():
    xs = np.linspace(0, 80, 161)
    for df in [1, 2, 5, 30]:
        vals = [chi2_sf(x, df) for x in xs]
        assert all(a >= b for a, b in zip(vals, vals[1:]))
        assert all(0 <= v <= 1 for v in vals)
    for x in [0.5, 5.0, 40.0]:
        vals = [chi2_sf(x, df) for df in range(1, 40)]
        assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_chi2_sf_huge_df():
    # eta far below its expectation under an astronomically large df
    assert chi2_sf(1e6, 3.7e8) == pytest.approx(1.0)
    assert chi2_sf(1e6, math.inf) == 1.0
    assert chi2_sf(2e9, 1e9) == pytest.approx(0.0, abs=1e-12)


def test_chi2_sf_moderately_large_df_uses_exact_path():
    # near the mean the series needs far more than 500 terms
    assert chi2_sf(5e5, 5e5) == pytest.approx(0.4997340, abs=1e-6)


@pytest.mark.parametrize("x, df", [(-1.0, 2), (1.0, 0), (1.0, 0.5)])
def test_chi2_sf_domain(x, df):
    with pytest.raises(ValueError):
        chi2_sf(x, df)


def test_gamma_q_bounds():
    assert gamma_q(3.0, 0.0) == 1.0
    assert 0 <= gamma_q(100.0, 1000.0) <= 1e-100


def test_log_sum_exp_examples():
    assert log_sum_exp([-1000.0, -1000.0]) == pytest.approx(-1000 + math.log(2), abs=1e-12)
    assert log_sum_exp([-math.inf, -5.0]) == -5.0
    assert log_sum_exp([-math.inf, -math.inf]) == -math.inf
    with pytest.raises(ValueError):
        log_sum_exp([])


finite = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=1, max_size=20), st.floats(-1e3, 1e3))
def test_log_sum_exp_shift(values, c):
    shifted = log_sum_exp([v + c for v in values])
    assert shifted == pytest.approx(log_sum_exp(values) + c, abs=1e-9, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(finite, min_size=1, max_size=20), st.randoms())
def test_log_sum_exp_permutation(values, rnd):
    perm = list(values)
    rnd.shuffle(perm)
    assert log_sum_exp(perm) == pytest.approx(log_sum_exp(values), abs=1e-12)

"""Special-function building blocks against scipy references."""

import math

import numpy as np
import pytest
from scipy import special as sp
from scipy import stats

import gammacbm as g


def test_log_gamma_matches_math_lgamma():
    for x in (0.1, 0.5, 1.0, 2.5, 7.0, 30.0, 171.5, 1e4):
        assert g.log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-14)


def test_log_gamma_rejects_nonpositive():
    with pytest.raises(g.DomainError):
        g.log_gamma(0.0)
    with pytest.raises(g.DomainError):
        g.log_gamma(-1.0)


def test_beta_fn_matches_scipy():
    rng = np.random.default_rng(101)
    for _ in range(20):
        a, b = rng.uniform(0.05, 40.0, size=2)
        assert g.beta_fn(a, b) == pytest.approx(sp.beta(a, b), rel=1e-12)


def test_regularized_gammas_match_scipy():
    rng = np.random.default_rng(102)
    for _ in range(60):
        shape = rng.uniform(0.05, 80.0)
        x = rng.uniform(0.0, 160.0)
        assert g.regularized_upper_gamma(shape, x) == pytest.approx(
            sp.gammaincc(shape, x), abs=1e-13
        )
        assert g.regularized_lower_gamma(shape, x) == pytest.approx(
            sp.gammainc(shape, x), abs=1e-13
        )


def test_regularized_gammas_sum_to_one():
    rng = np.random.default_rng(103)
    for _ in range(40):
        shape = rng.uniform(0.1, 50.0)
        x = rng.uniform(0.0, 100.0)
        total = g.regularized_lower_gamma(shape, x) + g.regularized_upper_gamma(
            shape, x
        )
        assert total == pytest.approx(1.0, abs=1e-12)


def test_upper_incomplete_gamma_matches_scipy():
    rng = np.random.default_rng(104)
    for _ in range(40):
        shape = rng.uniform(0.1, 30.0)
        x = rng.uniform(0.0, 60.0)
        expected = sp.gammaincc(shape, x) * sp.gamma(shape)
        assert g.upper_incomplete_gamma(shape, x) == pytest.approx(
            expected, rel=1e-11, abs=1e-300
        )


def test_gamma_cdf_matches_scipy():
    rng = np.random.default_rng(105)
    for _ in range(40):
        shape = rng.uniform(0.1, 40.0)
        scale = rng.uniform(0.2, 5.0)
        x = rng.uniform(0.0, shape * scale * 3.0)
        assert g.gamma_cdf(x, shape, scale) == pytest.approx(
            stats.gamma.cdf(x, a=shape, scale=scale), abs=1e-12
        )


def test_gamma_cdf_edges():
    assert g.gamma_cdf(0.0, 2.0, 1.0) == 0.0
    assert g.gamma_cdf(-0.1, 2.0, 1.0) == 0.0
    assert g.gamma_cdf(1e9, 2.0, 1.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(g.DomainError):
        g.gamma_cdf(1.0, -2.0, 1.0)
    with pytest.raises(g.DomainError):
        g.gamma_cdf(1.0, 2.0, 0.0)


def test_sample_gamma_moments():
    rng = g.RngStream(42)
    shape, scale = 3.5, 2.0
    draws = g.sample_gamma(shape, scale, rng, size=200_000)
    se_mean = math.sqrt(shape * scale**2 / draws.size)
    assert abs(draws.mean() - shape * scale) < 3.0 * se_mean
    assert draws.var() == pytest.approx(shape * scale**2, rel=0.05)


def test_rng_substreams_are_reproducible_and_distinct():
    root = g.RngStream(7)
    a = root.substream(1, 2).uniform(size=5)
    b = g.RngStream(7).substream(1, 2).uniform(size=5)
    c = root.substream(2, 1).uniform(size=5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)

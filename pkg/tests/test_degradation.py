"""Combined-level law: expansion, density, survival, hitting times.

Oracle strategy: the n=1 case is checked against scipy's gamma law
exactly; the n=2 case against a direct numerical convolution; moments
against closed forms; the general case against seeded Monte Carlo.
"""

import numpy as np
import pytest
from scipy import integrate, stats

import gammacbm as g
from gammacbm.degradation import overall_survival_many

REFERENCE_T = 1.9474

# Expansion-based survival at the reference scenario's threshold and
# inspection interval; cross-checked against 1e5 Monte Carlo draws
# (p_hat 0.01451 +/- 0.00038).
REFERENCE_HITTING = 0.0149294057235


def _random_combo(rng, max_procs=5):
    n = int(rng.integers(1, max_procs + 1))
    weights = rng.uniform(0.2, 1.5, size=n)
    procs = [
        g.GammaProcessSpec(
            shape_coeff=float(rng.uniform(0.5, 2.0)),
            shape_power=float(rng.uniform(0.8, 2.0)),
            scale=float(rng.uniform(0.5, 3.0)),
        )
        for _ in range(n)
    ]
    return g.LinearCombination(tuple(weights), tuple(procs))


def test_spec_validation():
    with pytest.raises(g.DomainError):
        g.GammaProcessSpec(0.0, 1.0, 1.0)
    with pytest.raises(g.DomainError):
        g.GammaProcessSpec(1.0, -1.0, 1.0)
    with pytest.raises(g.DomainError):
        g.GammaProcessSpec(1.0, 1.0, 0.0)
    with pytest.raises(g.DomainError):
        g.LinearCombination((1.0,), ())


def test_shape_at_power_law():
    spec = g.GammaProcessSpec(1.5, 2.0, 1.0)
    assert spec.shape_at(3.0) == pytest.approx(1.5 * 9.0, rel=1e-14)


def test_combo_moments_closed_form(combo):
    t = 2.0
    mean, var = g.combo_moments(combo, t)
    expected_mean = sum(
        b * p.shape_at(t) * p.scale for b, p in zip(combo.weights, combo.processes)
    )
    expected_var = sum(
        b**2 * p.shape_at(t) * p.scale**2
        for b, p in zip(combo.weights, combo.processes)
    )
    assert mean == pytest.approx(expected_mean, rel=1e-14)
    assert var == pytest.approx(expected_var, rel=1e-14)


def test_single_process_reduces_to_gamma():
    spec = g.GammaProcessSpec(1.3, 1.7, 0.9)
    combo = g.LinearCombination((1.5,), (spec,))
    t = 1.3
    expansion = g.moschopoulos_expand(combo, t)
    shape = spec.shape_at(t)
    scale = 1.5 * spec.scale
    ys = np.linspace(0.05, shape * scale * 4.0, 50)
    pdf = g.overall_pdf(expansion, ys)
    ref_pdf = stats.gamma.pdf(ys, a=shape, scale=scale)
    assert np.max(np.abs(pdf - ref_pdf)) < 1e-10
    cdf = 1.0 - overall_survival_many(expansion, ys)
    ref_cdf = stats.gamma.cdf(ys, a=shape, scale=scale)
    assert np.max(np.abs(cdf - ref_cdf)) < 1e-10


def test_equal_effective_scales_reduce_to_gamma():
    # Distinct per-process scales whose weighted products coincide: the
    # combination is then one gamma with the pooled shape.
    procs = (
        g.GammaProcessSpec(0.8, 1.0, 1.0),
        g.GammaProcessSpec(1.1, 2.0, 2.0),
        g.GammaProcessSpec(0.6, 1.5, 4.0),
    )
    combo = g.LinearCombination((2.0, 1.0, 0.5), procs)
    t = 1.4
    pooled_shape = sum(p.shape_at(t) for p in procs)
    expansion = g.moschopoulos_expand(combo, t)
    ys = np.linspace(0.1, pooled_shape * 2.0 * 4.0, 50)
    pdf = g.overall_pdf(expansion, ys)
    ref_pdf = stats.gamma.pdf(ys, a=pooled_shape, scale=2.0)
    assert np.max(np.abs(pdf - ref_pdf)) < 1e-10
    cdf = 1.0 - overall_survival_many(expansion, ys)
    ref_cdf = stats.gamma.cdf(ys, a=pooled_shape, scale=2.0)
    assert np.max(np.abs(cdf - ref_cdf)) < 1e-10


def test_two_process_pdf_matches_direct_convolution():
    # Independent oracle: f_Y(y) = int f_1(x) f_2(y - x) dx evaluated by
    # adaptive quadrature on the weighted component laws.
    w1, w2 = 0.7, 1.3
    p1 = g.GammaProcessSpec(1.2, 1.0, 0.8)
    p2 = g.GammaProcessSpec(0.9, 1.5, 1.6)
    combo = g.LinearCombination((w1, w2), (p1, p2))
    t = 1.8
    expansion = g.moschopoulos_expand(combo, t)
    a1, s1 = p1.shape_at(t), w1 * p1.scale
    a2, s2 = p2.shape_at(t), w2 * p2.scale

    def conv_pdf(y):
        val, _ = integrate.quad(
            lambda x: stats.gamma.pdf(x, a=a1, scale=s1)
            * stats.gamma.pdf(y - x, a=a2, scale=s2),
            0.0,
            y,
            limit=200,
            epsabs=1e-13,
            epsrel=1e-11,
        )
        return val

    for y in (0.5, 1.5, 3.0, 5.0, 8.0):
        assert g.overall_pdf(expansion, y) == pytest.approx(
            conv_pdf(y), rel=1e-8, abs=1e-12
        )


def test_pdf_integrates_to_one_randomized():
    rng = np.random.default_rng(2026)
    for _ in range(5):
        combo = _random_combo(rng)
        t = float(rng.uniform(0.5, 2.5))
        expansion = g.moschopoulos_expand(combo, t)
        mean, var = g.combo_moments(combo, t)
        hi = mean + 40.0 * var**0.5
        total, _ = integrate.quad(
            lambda y: g.overall_pdf(expansion, y), 0.0, hi, limit=400
        )
        assert total == pytest.approx(1.0, abs=1e-6)


def test_expansion_moments_match_closed_form():
    rng = np.random.default_rng(404)
    for _ in range(5):
        combo = _random_combo(rng)
        t = float(rng.uniform(0.5, 2.5))
        expansion = g.moschopoulos_expand(combo, t)
        k = np.arange(len(expansion.weights))
        shapes = expansion.shape_total + k
        m1 = float(np.dot(expansion.weights, shapes)) * expansion.base_scale
        m2 = float(np.dot(expansion.weights, shapes * (shapes + 1.0)))
        m2 *= expansion.base_scale**2
        mean, var = g.combo_moments(combo, t)
        assert m1 == pytest.approx(mean, rel=1e-8)
        assert m2 - m1**2 == pytest.approx(var, rel=1e-6)


def test_survival_matches_pdf_tail_integral(combo):
    t = 1.2
    expansion = g.moschopoulos_expand(combo, t)
    mean, var = g.combo_moments(combo, t)
    hi = mean + 40.0 * var**0.5
    for threshold in (mean * 0.5, mean, mean + 2.0 * var**0.5):
        tail, _ = integrate.quad(
            lambda y: g.overall_pdf(expansion, y), threshold, hi, limit=400
        )
        assert g.overall_survival(expansion, threshold) == pytest.approx(
            tail, rel=1e-8, abs=1e-12
        )


def test_survival_many_matches_scalar(combo):
    expansion = g.moschopoulos_expand(combo, REFERENCE_T)
    ys = np.linspace(0.0, 40.0, 57)
    scalar = np.array([g.overall_survival(expansion, y) for y in ys])
    vect = overall_survival_many(expansion, ys)
    assert np.max(np.abs(scalar - vect)) < 1e-9


def test_hitting_cdf_reference_value(combo, scenario):
    value = g.hitting_cdf(combo, scenario.threshold, REFERENCE_T)
    assert value == pytest.approx(REFERENCE_HITTING, rel=1e-9)


def test_hitting_cdf_monotone_in_time():
    rng = np.random.default_rng(77)
    for _ in range(5):
        combo = _random_combo(rng, max_procs=3)
        threshold = float(rng.uniform(1.0, 10.0))
        ts = np.linspace(0.3, 4.0, 12)
        values = [g.hitting_cdf(combo, threshold, t) for t in ts]
        # Monotone up to the expansion's truncation error (tail_tol 1e-10).
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_hitting_cdf_monte_carlo(combo, scenario):
    draws = g.sample_overall_many(combo, REFERENCE_T, g.RngStream(31), size=100_000)
    p_hat = float(np.mean(draws >= scenario.threshold))
    se = np.sqrt(p_hat * (1.0 - p_hat) / draws.size)
    assert abs(p_hat - REFERENCE_HITTING) < 3.0 * se


def test_kolmogorov_smirnov_against_sampler(combo):
    expansion = g.moschopoulos_expand(combo, REFERENCE_T)
    draws = np.sort(
        g.sample_overall_many(combo, REFERENCE_T, g.RngStream(31), size=100_000)
    )
    cdf = 1.0 - overall_survival_many(expansion, draws)
    i = np.arange(1, draws.size + 1)
    ks = max(
        float(np.max(np.abs(cdf - i / draws.size))),
        float(np.max(np.abs(cdf - (i - 1) / draws.size))),
    )
    assert ks < 0.015


def test_truncation_error_when_terms_exhausted():
    combo = g.LinearCombination(
        (1.0, 1.0),
        (g.GammaProcessSpec(1.0, 1.0, 1.0), g.GammaProcessSpec(1.0, 1.0, 2e7)),
    )
    with pytest.raises(g.TruncationError):
        g.moschopoulos_expand(combo, 1.0)


def test_scaled_multiplies_every_scale(combo):
    factor = 1.37
    scaled = combo.scaled(factor)
    for orig, new in zip(combo.processes, scaled.processes):
        assert new.scale == pytest.approx(orig.scale * factor, rel=1e-14)
    assert scaled.weights == combo.weights


def test_pruned_drops_zero_weights():
    procs = (g.GammaProcessSpec(1.0, 1.0, 1.0), g.GammaProcessSpec(2.0, 1.0, 2.0))
    combo = g.LinearCombination((0.0, 1.0), procs)
    pruned = combo.pruned()
    assert pruned.size == 1
    assert pruned.weights == (1.0,)


def test_expansion_cache_reuses_objects(combo):
    first = g.moschopoulos_expand(combo, 1.5)
    second = g.moschopoulos_expand(combo, 1.5)
    assert first is second

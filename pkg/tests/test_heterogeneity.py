"""Unit-to-unit variability: scale mixing, covariate links, mixed arrivals."""

import math

import numpy as np
import pytest
from scipy import integrate, stats

import gammacbm as g

REFERENCE_T = 1.9474

# Both evaluation routes agree on this value at the bundled scenario's
# policy point; seeded Monte Carlo (400k draws) reproduces it within one
# standard error.
REFERENCE_MIXED_HITTING = 0.103832152182


def test_random_effect_model_validation():
    with pytest.raises(g.DomainError):
        g.RandomEffectModel(gamma_param=0.0, delta_param=1.0)
    with pytest.raises(g.DomainError):
        g.RandomEffectModel(gamma_param=1.0, delta_param=-2.0)
    with pytest.raises(g.DomainError):
        g.RandomEffectModel(1.0, 1.0, covariate_coeffs=(0.5,), covariates=())


def test_effect_moments_match_gamma_law():
    model = g.RandomEffectModel(gamma_param=2.5, delta_param=4.0)
    dist = stats.gamma(a=4.0, scale=1.0 / 2.5)
    assert model.effect_mean == pytest.approx(dist.mean(), rel=1e-14)
    assert model.effect_variance == pytest.approx(dist.var(), rel=1e-14)


def test_covariate_scale_is_exponential_link():
    model = g.RandomEffectModel(
        1.0, 1.0, covariate_coeffs=(0.3, -0.2), covariates=(1.5, 2.0)
    )
    assert g.covariate_scale(model) == pytest.approx(
        math.exp(0.3 * 1.5 - 0.2 * 2.0), rel=1e-14
    )
    spec = g.GammaProcessSpec(1.0, 1.0, 9.9)
    replaced = g.with_covariate_scale(model, spec)
    # The link value replaces the scale outright.
    assert replaced.scale == pytest.approx(math.exp(0.05), rel=1e-14)
    assert replaced.shape_coeff == spec.shape_coeff


def test_mixed_joint_density_against_quadrature():
    specs = (
        g.GammaProcessSpec(0.7, 1.0, 1.3),
        g.GammaProcessSpec(1.2, 1.0, 0.8),
    )
    combo = g.LinearCombination((1.0, 1.0), specs)
    model = g.RandomEffectModel(gamma_param=1.5, delta_param=2.5)
    t = 1.7

    def oracle(x1, x2):
        def integrand(w):
            value = stats.gamma.pdf(w, a=model.delta_param,
                                    scale=1.0 / model.gamma_param)
            for x, spec in zip((x1, x2), specs):
                value *= stats.gamma.pdf(x, a=spec.shape_at(t),
                                         scale=spec.scale / w)
            return value

        val, _ = integrate.quad(integrand, 0.0, np.inf, limit=300)
        return val

    for x in ((0.5, 0.9), (1.4, 2.0), (3.0, 1.1), (0.8, 4.0), (2.2, 2.7)):
        mine = g.mixed_joint_density(model, specs, t, np.array(x))
        assert mine == pytest.approx(oracle(*x), rel=1e-9)


def test_mixed_density_normalizes():
    spec = g.GammaProcessSpec(1.0, 1.0, 2.0)
    model = g.RandomEffectModel(gamma_param=2.0, delta_param=3.0)
    t = 1.0
    total, _ = integrate.quad(
        lambda x: g.mixed_joint_density(model, (spec,), t, np.array([x])),
        0.0,
        np.inf,
        limit=400,
    )
    assert total == pytest.approx(1.0, abs=1e-8)


def test_degenerate_effect_recovers_scaled_density():
    # A near-point effect at mean m multiplies every conditional scale by m.
    m = 2.0
    delta = 1e6
    model = g.RandomEffectModel(gamma_param=delta * m, delta_param=delta)
    spec = g.GammaProcessSpec(1.3, 1.0, 0.7)
    t = 1.5
    for x in (0.5, 1.0, 2.5, 5.0):
        mixed = g.mixed_joint_density(model, (spec,), t, np.array([x]))
        fixed = g.gamma_pdf(x, spec.shape_at(t), m * spec.scale)
        assert mixed == pytest.approx(fixed, rel=1e-5)


def test_mixed_hitting_routes_agree_randomized():
    rng = np.random.default_rng(42)
    for _ in range(5):
        n = int(rng.integers(1, 4))
        weights = tuple(float(v) for v in rng.uniform(0.2, 1.5, size=n))
        procs = tuple(
            g.GammaProcessSpec(
                float(rng.uniform(0.5, 2.0)),
                float(rng.uniform(0.8, 2.0)),
                float(rng.uniform(0.5, 3.0)),
            )
            for _ in range(n)
        )
        combo = g.LinearCombination(weights, procs)
        model = g.RandomEffectModel(
            gamma_param=float(rng.uniform(0.5, 3.0)),
            delta_param=float(rng.uniform(0.5, 4.0)),
        )
        threshold = float(rng.uniform(1.0, 15.0))
        t = float(rng.uniform(0.5, 2.5))
        report = g.mixed_hitting_report(model, combo, threshold, t)
        assert report.quadrature == pytest.approx(report.series, abs=1e-8)
        assert 0.0 <= report.value <= 1.0


def test_mixed_hitting_reference_value(scenario):
    report = g.mixed_hitting_report(
        scenario.random_effect, scenario.combo, scenario.threshold, REFERENCE_T
    )
    assert report.quadrature == pytest.approx(REFERENCE_MIXED_HITTING, rel=1e-8)
    assert report.series == pytest.approx(REFERENCE_MIXED_HITTING, rel=1e-8)


def test_mixed_hitting_monte_carlo(scenario):
    draws = g.sample_mixed_overall(
        scenario.random_effect, scenario.combo, REFERENCE_T, g.RngStream(7), 400_000
    )
    p_hat = float(np.mean(draws >= scenario.threshold))
    se = math.sqrt(p_hat * (1.0 - p_hat) / draws.size)
    assert abs(p_hat - REFERENCE_MIXED_HITTING) < 3.0 * se


def test_degenerate_effect_hitting_matches_fixed(scenario):
    m = 2.0
    delta = 1e6
    model = g.RandomEffectModel(gamma_param=delta * m, delta_param=delta)
    mixed = g.mixed_hitting_prob(model, scenario.combo, scenario.threshold, 1.9)
    fixed = g.hitting_cdf(scenario.combo.scaled(m), scenario.threshold, 1.9)
    assert mixed == pytest.approx(fixed, abs=1e-6)


@pytest.mark.parametrize("exponent", ["nu", "mu"])
def test_arrival_joint_pdf_against_quadrature(exponent):
    model = g.ArrivalModel(rate=1.0, mix_mu=1.7, mix_nu=2.3,
                           mixing_exponent=exponent)
    times = np.array([0.4, 1.1, 0.8])
    n = times.size
    nu, mu = model.mix_nu, model.mix_mu
    rate_param = nu if exponent == "nu" else mu
    prefactor = (mu / rate_param) ** nu

    def integrand(lam):
        return lam**n * math.exp(-lam * times.sum()) * stats.gamma.pdf(
            lam, a=nu, scale=1.0 / rate_param
        )

    oracle, _ = integrate.quad(integrand, 0.0, np.inf, limit=300)
    assert g.arrival_joint_pdf(model, times) == pytest.approx(
        prefactor * oracle, rel=1e-8
    )


def test_arrival_joint_pdf_single_time_limit():
    # With one occurrence and unit mixing parameters the density at tiny
    # elapsed time approaches Gamma(2)/1 = 1.
    model = g.ArrivalModel(rate=1.0, mix_mu=1.0, mix_nu=1.0)
    assert g.arrival_joint_pdf(model, [1e-9]) == pytest.approx(1.0, rel=1e-6)


def test_arrival_model_validation():
    with pytest.raises(g.DomainError):
        g.ArrivalModel(rate=0.0)
    with pytest.raises(g.DomainError):
        g.ArrivalModel(rate=1.0, mixing_exponent="sigma")
    with pytest.raises(g.DomainError):
        g.arrival_joint_pdf(g.ArrivalModel(rate=1.0), [])
    with pytest.raises(g.DomainError):
        g.arrival_joint_pdf(g.ArrivalModel(rate=1.0), [0.5, -0.2])

"""Monte Carlo estimators: agreement, common random numbers, variance."""

import dataclasses
import math

import numpy as np
import pytest

import gammacbm as g

SEED = 20260815
REFERENCE_Q0 = 346.631294288
REFERENCE_CV = 156.759345715


def test_estimate_from_samples_formulas():
    samples = np.array([1.0, 2.0, 3.0, 4.0])
    est = g.estimate_from_samples(samples)
    assert est.mean == pytest.approx(2.5)
    assert est.std_error == pytest.approx(samples.std(ddof=1) / 2.0)
    assert est.replications == 4
    single = g.estimate_from_samples([5.0])
    assert single.mean == 5.0
    assert single.std_error == 0.0
    with pytest.raises(g.DomainError):
        g.estimate_from_samples([])


def test_hybrid_matches_analytic(combo, repair, costs, arrivals,
                                 reference_policy):
    est_q0 = g.estimate_q0(combo, repair, costs, arrivals, reference_policy,
                           3000, SEED)
    est_cv = g.estimate_cv(combo, repair, costs, arrivals, reference_policy,
                           3000, SEED)
    assert abs(est_q0.mean - REFERENCE_Q0) < 3.0 * est_q0.std_error
    assert abs(est_cv.mean - REFERENCE_CV) < 3.0 * est_cv.std_error


def test_event_estimator_runs_and_differs(combo, repair, costs, arrivals,
                                          reference_policy):
    hybrid = g.estimate_q0(combo, repair, costs, arrivals, reference_policy,
                           2000, SEED, kind=g.EstimatorKind.HYBRID_COUNTS)
    event = g.estimate_q0(combo, repair, costs, arrivals, reference_policy,
                          2000, SEED, kind=g.EstimatorKind.FULL_EVENT)
    assert event.mean > 0.0
    # Sampling the defect counts adds variance the hybrid estimator
    # integrates out analytically.
    assert hybrid.std_error < event.std_error


def test_event_variable_cost_unbiased(combo, repair, costs, arrivals,
                                      reference_policy):
    # Per-occurrence accounting changes the threshold-penalty term but the
    # variable cost rate stays a Monte Carlo twin of the analytic one.
    est = g.estimate_cv(combo, repair, costs, arrivals, reference_policy,
                        4000, SEED, kind=g.EstimatorKind.FULL_EVENT)
    assert abs(est.mean - REFERENCE_CV) < 3.0 * est.std_error


def test_common_random_numbers_pair_runs(combo, repair, costs, arrivals,
                                         reference_policy):
    # Same seed means shared degradation draws, so doubling every variable
    # rate shifts each replication by exactly its own variable
    # contribution: the paired difference carries no Monte Carlo noise.
    from gammacbm.simulate import _cycle_rate_samples

    doubled = dataclasses.replace(
        costs, variable_rates=tuple(2.0 * r for r in costs.variable_rates)
    )
    base = g.q0_samples(combo, repair, costs, arrivals, reference_policy,
                        500, SEED)
    other = g.q0_samples(combo, repair, doubled, arrivals, reference_policy,
                         500, SEED)
    variable_base = _cycle_rate_samples(
        combo, repair, costs, arrivals, reference_policy, 500, SEED,
        g.EstimatorKind.HYBRID_COUNTS, variable_only=True,
    )
    assert np.allclose(other - base, variable_base, rtol=1e-12, atol=1e-12)


def test_seed_reproducibility(combo, repair, costs, arrivals,
                              reference_policy):
    a = g.q0_samples(combo, repair, costs, arrivals, reference_policy, 100, 12)
    b = g.q0_samples(combo, repair, costs, arrivals, reference_policy, 100, 12)
    c = g.q0_samples(combo, repair, costs, arrivals, reference_policy, 100, 13)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_estimate_hitting_reference(combo, scenario):
    est = g.estimate_hitting(combo, scenario.threshold, 1.9474, 100_000, 99)
    analytic = g.hitting_cdf(combo, scenario.threshold, 1.9474)
    assert abs(est.mean - analytic) < 3.0 * est.std_error
    assert est.std_error == pytest.approx(
        math.sqrt(est.mean * (1.0 - est.mean) / 100_000), rel=1e-12
    )


def test_estimate_hitting_zero_threshold(combo):
    est = g.estimate_hitting(combo, 0.0, 1.0, 50, 1)
    assert est.mean == 1.0
    assert est.std_error == 0.0


def test_confidence_interval_coverage():
    # Normal-theory intervals from estimate_from_samples cover the true
    # gamma mean at close to the nominal rate.
    rng = g.RngStream(2468)
    true_mean = 2.0 * 3.0
    hits = 0
    trials = 500
    for i in range(trials):
        draws = rng.substream(i).gamma(2.0, 3.0, size=200)
        est = g.estimate_from_samples(draws)
        if abs(est.mean - true_mean) <= 1.96 * est.std_error:
            hits += 1
    coverage = hits / trials
    assert 0.93 <= coverage <= 0.97


def test_validation_errors(combo, repair, costs, arrivals, reference_policy):
    with pytest.raises(g.DomainError):
        g.estimate_q0(combo, repair, costs, arrivals, reference_policy, 0, 1)
    with pytest.raises(g.DomainError):
        g.estimate_hitting(combo, -1.0, 1.0, 10, 1)

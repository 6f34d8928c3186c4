"""Shared fixtures: the bundled reference scenario and its pieces."""

import pytest

import gammacbm as g


@pytest.fixture(scope="session")
def scenario():
    return g.load_bundled_scenario()


@pytest.fixture(scope="session")
def combo(scenario):
    return scenario.combo


@pytest.fixture(scope="session")
def repair(scenario):
    return scenario.repair


@pytest.fixture(scope="session")
def costs(scenario):
    return scenario.costs


@pytest.fixture(scope="session")
def arrivals(scenario):
    return scenario.arrivals


@pytest.fixture(scope="session")
def reference_policy(scenario):
    return g.PolicySpec(
        scenario.policy_point.t, scenario.policy_point.n, scenario.threshold
    )

"""Seeded Monte Carlo twins of the analytic quantities.

Every estimator keys its gamma draws by (cycle, defect-type) sub-streams of
one root stream, with the replication index as the vector dimension: runs
that differ only in cost constants therefore reuse identical degradation
draws (common random numbers), and results are reproducible regardless of
evaluation order.

The hybrid estimator takes the expected defect count per cycle
analytically and samples only degradation levels, so its mean matches the
analytic cost rate exactly in expectation and its variance is free of
count noise.  The event-driven estimator also draws Poisson defect counts
and per-occurrence degradation levels; it exists to expose the modeling
gap between per-cycle expected counts and per-occurrence accounting, and
charges the threshold penalty once per cycle whose realized combined
degradation reaches the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cost import CostKind, CostStructure
from .degradation import LinearCombination, sample_overall_many
from .errors import DomainError
from .heterogeneity import ArrivalModel
from .policy import PolicySpec, RepairModel
from .rng import RngStream


class EstimatorKind(Enum):
    """Which replacement-cycle estimator to run."""

    HYBRID_COUNTS = "hybrid"
    FULL_EVENT = "event"


@dataclass(frozen=True)
class SimEstimate:
    """A Monte Carlo mean with its standard error."""

    mean: float
    std_error: float
    replications: int

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError(
                f"replications must be at least 1, got {self.replications}"
            )
        if self.std_error < 0.0:
            raise DomainError(f"std_error must be non-negative, got {self.std_error}")


def estimate_from_samples(samples) -> SimEstimate:
    """Summarize replication-level values into a mean and standard error."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DomainError("samples must be a non-empty vector")
    n = arr.size
    mean = float(arr.mean())
    if n == 1:
        return SimEstimate(mean=mean, std_error=0.0, replications=1)
    se = float(arr.std(ddof=1) / math.sqrt(n))
    return SimEstimate(mean=mean, std_error=se, replications=n)


def _variable_values(levels: np.ndarray, rate: float, kind: CostKind) -> np.ndarray:
    if kind is CostKind.CONSTANT:
        return np.full_like(levels, rate)
    if kind is CostKind.LINEAR:
        return rate * levels
    if kind is CostKind.QUADRATIC:
        return rate * levels**2
    raise DomainError(f"unknown cost kind {kind!r}")


def _hybrid_cycle_costs(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    reps: int,
    root: RngStream,
    variable_only: bool,
) -> np.ndarray:
    interval = policy.inspection_interval
    n = policy.replacement_count
    a1 = model.a1(interval)
    a2 = model.a2(interval)
    lam = arrivals.rate
    fixed_total = sum(costs.fixed)
    totals = np.zeros(reps)
    for j in range(1, n + 1):
        count = a1 ** (j - 1) / lam
        scale_factor = a2 ** (j - 1)
        combined = np.zeros(reps)
        variable = np.zeros(reps)
        for k, (weight, proc, rate) in enumerate(
            zip(combo.weights, combo.processes, costs.variable_rates)
        ):
            levels = root.substream(j, k).gamma(
                proc.shape_at(interval), proc.scale * scale_factor, size=reps
            )
            combined += weight * levels
            variable += _variable_values(levels, rate, costs.variable_kind)
        totals += count * variable
        if not variable_only:
            totals += costs.inspection + count * fixed_total
            totals += costs.threshold_penalty * count * (combined >= policy.threshold)
    if not variable_only:
        totals += costs.replacement
    return totals


def _event_cycle_costs(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    reps: int,
    root: RngStream,
    variable_only: bool,
) -> np.ndarray:
    interval = policy.inspection_interval
    n = policy.replacement_count
    a1 = model.a1(interval)
    a2 = model.a2(interval)
    lam = arrivals.rate
    totals = np.zeros(reps)
    rep_index = np.arange(reps)
    for j in range(1, n + 1):
        mean_count = a1 ** (j - 1) / lam
        scale_factor = a2 ** (j - 1)
        combined = np.zeros(reps)
        for k, (weight, proc, rate) in enumerate(
            zip(combo.weights, combo.processes, costs.variable_rates)
        ):
            stream = root.substream(j, k)
            counts = stream.poisson(mean_count, size=reps)
            draws = stream.gamma(
                proc.shape_at(interval),
                proc.scale * scale_factor,
                size=int(counts.sum()),
            )
            owner = np.repeat(rep_index, counts)
            level_sum = np.bincount(owner, weights=draws, minlength=reps)
            combined += weight * level_sum
            variable = np.bincount(
                owner,
                weights=_variable_values(draws, rate, costs.variable_kind),
                minlength=reps,
            )
            totals += variable
            if not variable_only:
                totals += costs.fixed[k] * counts
        if not variable_only:
            totals += costs.inspection
            totals += costs.threshold_penalty * (combined >= policy.threshold)
    if not variable_only:
        totals += costs.replacement
    return totals


def _cycle_rate_samples(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    reps: int,
    seed: int,
    kind: EstimatorKind,
    variable_only: bool,
) -> np.ndarray:
    if reps < 1:
        raise DomainError(f"reps must be at least 1, got {reps}")
    root = RngStream(seed)
    if kind is EstimatorKind.HYBRID_COUNTS:
        totals = _hybrid_cycle_costs(
            combo, model, costs, arrivals, policy, reps, root, variable_only
        )
    elif kind is EstimatorKind.FULL_EVENT:
        totals = _event_cycle_costs(
            combo, model, costs, arrivals, policy, reps, root, variable_only
        )
    else:
        raise DomainError(f"unknown estimator kind {kind!r}")
    horizon = policy.replacement_count * policy.inspection_interval
    return totals / horizon


def estimate_q0(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    reps: int,
    seed: int,
    kind: EstimatorKind = EstimatorKind.HYBRID_COUNTS,
) -> SimEstimate:
    """Monte Carlo estimate of the total cost rate over a replacement cycle."""
    samples = _cycle_rate_samples(
        combo, model, costs, arrivals, policy, reps, seed, kind, variable_only=False
    )
    return estimate_from_samples(samples)


def estimate_cv(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    reps: int,
    seed: int,
    kind: EstimatorKind = EstimatorKind.HYBRID_COUNTS,
) -> SimEstimate:
    """Monte Carlo estimate of the variable cost rate over a replacement cycle."""
    samples = _cycle_rate_samples(
        combo, model, costs, arrivals, policy, reps, seed, kind, variable_only=True
    )
    return estimate_from_samples(samples)


def q0_samples(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    reps: int,
    seed: int,
    kind: EstimatorKind = EstimatorKind.HYBRID_COUNTS,
) -> np.ndarray:
    """Replication-level cost rates, for paired comparisons and diagnostics."""
    return _cycle_rate_samples(
        combo, model, costs, arrivals, policy, reps, seed, kind, variable_only=False
    )


def estimate_hitting(
    combo: LinearCombination,
    threshold: float,
    t: float,
    reps: int,
    seed: int,
) -> SimEstimate:
    """Binomial estimate of P(combined level >= threshold at t)."""
    if threshold < 0.0:
        raise DomainError(f"threshold must be non-negative, got {threshold}")
    if reps < 1:
        raise DomainError(f"reps must be at least 1, got {reps}")
    if threshold == 0.0:
        return SimEstimate(mean=1.0, std_error=0.0, replications=reps)
    draws = sample_overall_many(combo, t, RngStream(seed), size=reps)
    p_hat = float(np.mean(draws >= threshold))
    se = math.sqrt(p_hat * (1.0 - p_hat) / reps)
    return SimEstimate(mean=p_hat, std_error=se, replications=reps)

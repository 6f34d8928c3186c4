"""Imperfect-repair maintenance policies: objective, constraint, optimizer.

After each of the ``N - 1`` imperfect repairs in a replacement cycle of
length ``N*T``, defects arrive more often (factor ``a1(T)`` per cycle) and
grow faster (every scale multiplied by ``a2(T)`` per cycle).  The objective
``q0`` is the expected total cost per unit time over the cycle; ``cv`` is
its variable-cost part, which a budget may cap.  The optimizer scans an
``(N, T)`` grid, restricted to the feasible region when a budget is given,
and refines the winning ``T`` by golden-section search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost import CostKind, CostStructure, expected_variable_cost
from .degradation import (
    DEFAULT_TAIL_TOL,
    LinearCombination,
    hitting_cdf,
)
from .errors import DomainError, InfeasibleError, UnsupportedModelError
from .heterogeneity import ArrivalModel

_RATIO_UNIT_TOL = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ConstantFactor:
    """Repair factor that ignores the inspection interval."""

    value: float

    def __post_init__(self):
        if not self.value > 0.0:
            raise DomainError(f"repair factor must be positive, got {self.value}")

    def __call__(self, interval: float) -> float:
        return self.value

    @property
    def is_constant(self) -> bool:
        return True


@dataclass(frozen=True)
class ScaledExpSaturation:
    """Repair factor ``scale * (level - dip * exp(-T))``.

    Non-decreasing in the interval (``dip >= 0``) and saturating at
    ``scale * level``; positivity for all T > 0 requires ``level > dip``.
    """

    scale: float
    level: float
    dip: float

    def __post_init__(self):
        if not self.scale > 0.0:
            raise DomainError(f"scale must be positive, got {self.scale}")
        if self.dip < 0.0:
            raise DomainError(f"dip must be non-negative, got {self.dip}")
        if not self.level > self.dip:
            raise DomainError(
                f"level must exceed dip for positivity, got {self.level} <= {self.dip}"
            )

    def __call__(self, interval: float) -> float:
        return self.scale * (self.level - self.dip * math.exp(-interval))

    @property
    def is_constant(self) -> bool:
        return self.dip == 0.0


@dataclass(frozen=True)
class RepairModel:
    """Per-cycle arrival and degradation growth factors."""

    a1_form: ConstantFactor | ScaledExpSaturation
    a2_form: ConstantFactor | ScaledExpSaturation

    def a1(self, interval: float) -> float:
        return _checked_factor(self.a1_form, interval)

    def a2(self, interval: float) -> float:
        return _checked_factor(self.a2_form, interval)

    @property
    def is_constant(self) -> bool:
        return self.a1_form.is_constant and self.a2_form.is_constant


def _checked_factor(form, interval: float) -> float:
    if not interval > 0.0:
        raise DomainError(f"interval must be positive, got {interval}")
    value = form(interval)
    if not value > 0.0:
        raise DomainError(f"repair factor evaluated non-positive: {value}")
    return value


def repair_factor(model: RepairModel, which: str, interval: float) -> float:
    """Evaluate the selected repair factor at the inspection interval."""
    if which == "a1":
        return model.a1(interval)
    if which == "a2":
        return model.a2(interval)
    raise DomainError(f"which must be 'a1' or 'a2', got {which!r}")


@dataclass(frozen=True)
class PolicySpec:
    """One candidate maintenance policy."""

    inspection_interval: float
    replacement_count: int
    threshold: float

    def __post_init__(self):
        if not self.inspection_interval > 0.0:
            raise DomainError(
                f"inspection interval must be positive, got {self.inspection_interval}"
            )
        if self.replacement_count < 1:
            raise DomainError(
                f"replacement count must be at least 1, got {self.replacement_count}"
            )
        if not self.threshold > 0.0:
            raise DomainError(f"threshold must be positive, got {self.threshold}")


@dataclass(frozen=True)
class GridSpec:
    """Search grid for the optimizer."""

    t_lo: float
    t_hi: float
    t_count: int
    n_max: int

    def __post_init__(self):
        if not 0.0 < self.t_lo <= self.t_hi:
            raise DomainError(
                f"need 0 < t_lo <= t_hi, got ({self.t_lo}, {self.t_hi})"
            )
        if self.t_count < 1:
            raise DomainError(f"t_count must be at least 1, got {self.t_count}")
        if self.n_max < 1:
            raise DomainError(f"n_max must be at least 1, got {self.n_max}")

    @property
    def t_values(self) -> np.ndarray:
        if self.t_count == 1:
            return np.array([self.t_lo])
        return np.linspace(self.t_lo, self.t_hi, self.t_count)


@dataclass(frozen=True)
class FeasibleSet:
    """Budget-feasible policies: CV(N, T) at or below the budget.

    For N below ``n1`` every interval is feasible; for N from ``n1`` up to
    (excluding) ``n2`` only intervals up to ``boundary[N]`` are; from
    ``n2`` on nothing is.  T-limits are proxied at ``t_floor`` and
    ``t_ceiling``.  ``unconstrained`` marks a budget above the largest
    attainable CV, i.e. the full policy space.
    """

    n1: int
    n2: int
    boundary: dict[int, float]
    budget: float
    unconstrained: bool = False
    t_floor: float = 1e-4
    t_ceiling: float = 1e3

    def t_bound(self, n: int) -> float | None:
        """Largest feasible interval for the given N; None when unbounded."""
        if self.unconstrained or n < self.n1:
            return None
        if n in self.boundary:
            return self.boundary[n]
        return 0.0

    def feasible(self, n: int, t: float, slack: float = 1e-9) -> bool:
        bound = self.t_bound(n)
        return bound is None or t <= bound * (1.0 + slack)


@dataclass(frozen=True)
class PolicyOptimum:
    """Result of the grid-plus-refinement search."""

    n_opt: int
    t_opt: float
    q0: float
    cv: float
    constrained: bool


def geometric_sum(ratio: float, count: int) -> float:
    """``sum_{j=0}^{count-1} ratio^j`` with the exact unit-ratio fallback."""
    if count < 1:
        raise DomainError(f"count must be at least 1, got {count}")
    if abs(ratio - 1.0) <= _RATIO_UNIT_TOL:
        return float(count)
    return (ratio**count - 1.0) / (ratio - 1.0)


def maintained_hitting_cdf(
    combo: LinearCombination,
    model: RepairModel,
    threshold: float,
    j: int,
    interval: float,
    at: float | None = None,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> float:
    """Hitting CDF of the combined level in the j-th cycle.

    Each repair multiplies every scale by ``a2(interval)``, so cycle j uses
    scales inflated by ``a2^(j-1)``.  ``at`` is the within-cycle evaluation
    time and defaults to the full interval.
    """
    if j < 1:
        raise DomainError(f"cycle index must be at least 1, got {j}")
    factor = model.a2(interval) ** (j - 1)
    when = interval if at is None else at
    scaled = combo if factor == 1.0 else combo.scaled(factor)
    return hitting_cdf(scaled, threshold, when, tail_tol=tail_tol)


def _variable_cost_cycle(
    combo: LinearCombination,
    costs: CostStructure,
    a2_power: float,
    interval: float,
) -> float:
    """Expected variable repair cost across defect types in one cycle."""
    return sum(
        expected_variable_cost(
            proc, rate, costs.variable_kind, interval, scale_factor=a2_power
        )
        for proc, rate in zip(combo.processes, costs.variable_rates)
    )


def q0(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> float:
    """Expected total cost per unit time over one replacement cycle.

    Cycle j contributes the inspection cost, the expected defect count
    ``a1^(j-1)/rate`` times fixed-plus-variable repair costs, and the
    threshold penalty weighted by the cycle's hitting probability; the
    replacement cost closes the cycle.
    """
    n = policy.replacement_count
    interval = policy.inspection_interval
    a1 = model.a1(interval)
    a2 = model.a2(interval)
    lam = arrivals.rate
    fixed_total = sum(costs.fixed)
    total = 0.0
    for j in range(1, n + 1):
        count = a1 ** (j - 1) / lam
        variable = _variable_cost_cycle(combo, costs, a2 ** (j - 1), interval)
        hit = maintained_hitting_cdf(
            combo, model, policy.threshold, j, interval, tail_tol=tail_tol
        )
        total += (
            costs.inspection
            + count * (fixed_total + variable)
            + costs.threshold_penalty * count * hit
        )
    return (total + costs.replacement) / (n * interval)


def _cv_ratio_and_base(
    combo: LinearCombination,
    costs: CostStructure,
    a1: float,
    a2: float,
    interval: float,
) -> tuple[float, float]:
    """Per-cycle geometric ratio and the j-independent cost factor."""
    kind = costs.variable_kind
    if kind is CostKind.CONSTANT:
        return a1, float(sum(costs.variable_rates))
    if kind is CostKind.LINEAR:
        base = sum(
            rate * proc.shape_at(interval) * proc.scale
            for proc, rate in zip(combo.processes, costs.variable_rates)
        )
        return a1 * a2, float(base)
    if kind is CostKind.QUADRATIC:
        base = sum(
            rate * proc.scale**2 * (proc.shape_at(interval) + proc.shape_at(interval) ** 2)
            for proc, rate in zip(combo.processes, costs.variable_rates)
        )
        return a1 * a2**2, float(base)
    raise DomainError(f"unknown cost kind {kind!r}")


def cv(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    method: str = "closed",
) -> float:
    """Expected variable cost per unit time over one replacement cycle.

    ``closed`` sums the per-cycle geometric progression in one step (exact
    unit-ratio fallback included); ``direct`` accumulates the double sum
    over cycles and defect types.
    """
    n = policy.replacement_count
    interval = policy.inspection_interval
    a1 = model.a1(interval)
    a2 = model.a2(interval)
    lam = arrivals.rate
    if method == "direct":
        total = 0.0
        for j in range(1, n + 1):
            count = a1 ** (j - 1) / lam
            total += count * _variable_cost_cycle(combo, costs, a2 ** (j - 1), interval)
        return total / (n * interval)
    if method == "closed":
        ratio, base = _cv_ratio_and_base(combo, costs, a1, a2, interval)
        return geometric_sum(ratio, n) * base / (lam * n * interval)
    raise DomainError(f"method must be 'closed' or 'direct', got {method!r}")


def _require_reduced(
    combo: LinearCombination, model: RepairModel, costs: CostStructure
) -> None:
    if not model.is_constant:
        raise UnsupportedModelError(
            "reduced form requires constant repair factors"
        )
    if any(proc.shape_power != 1.0 for proc in combo.processes):
        raise UnsupportedModelError(
            "reduced form requires shapes linear in time (shape_power == 1)"
        )
    if costs.variable_kind is not CostKind.LINEAR:
        raise UnsupportedModelError(
            "reduced form requires the linear variable-cost kind"
        )


def q0_reduced(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> float:
    """Closed-form objective under constant factors, linear shapes and costs."""
    _require_reduced(combo, model, costs)
    n = policy.replacement_count
    interval = policy.inspection_interval
    a1 = model.a1(interval)
    lam = arrivals.rate
    ratio = a1 * model.a2(interval)
    fixed_term = geometric_sum(a1, n) * sum(costs.fixed) / (lam * n * interval)
    slope = sum(
        rate * proc.shape_coeff * proc.scale
        for proc, rate in zip(combo.processes, costs.variable_rates)
    )
    variable_term = geometric_sum(ratio, n) * slope / (lam * n)
    hit_term = (
        costs.threshold_penalty
        / (lam * n * interval)
        * sum(
            a1 ** (j - 1)
            * maintained_hitting_cdf(
                combo, model, policy.threshold, j, interval, tail_tol=tail_tol
            )
            for j in range(1, n + 1)
        )
    )
    return (
        costs.inspection / interval
        + costs.replacement / (n * interval)
        + fixed_term
        + variable_term
        + hit_term
    )


def stationarity_residual(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    policy: PolicySpec,
    step_scale: float = 1e-4,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> float:
    """First-order condition residual for an interior optimal interval.

    Left side: hitting-density terms of the reduced objective's derivative
    (density by central differencing with step ``step_scale * T``); right
    side: the cost constants it must balance.  A root in T marks a
    stationary point of the reduced objective at fixed N.
    """
    _require_reduced(combo, model, costs)
    if not costs.threshold_penalty > 0.0:
        raise DomainError(
            "stationarity residual is undefined without a threshold penalty"
        )
    n = policy.replacement_count
    interval = policy.inspection_interval
    a1 = model.a1(interval)
    lam = arrivals.rate
    h = step_scale * interval
    lhs = 0.0
    for j in range(1, n + 1):
        cdf = maintained_hitting_cdf(
            combo, model, policy.threshold, j, interval, tail_tol=tail_tol
        )
        upper = maintained_hitting_cdf(
            combo, model, policy.threshold, j, interval, at=interval + h,
            tail_tol=tail_tol,
        )
        lower = maintained_hitting_cdf(
            combo, model, policy.threshold, j, interval, at=interval - h,
            tail_tol=tail_tol,
        )
        density = (upper - lower) / (2.0 * h)
        lhs += a1 ** (j - 1) * (density * interval - cdf)
    rhs = (lam / costs.threshold_penalty) * (
        n * costs.inspection
        + geometric_sum(a1, n) * sum(costs.fixed) / lam
        + costs.replacement
    )
    return lhs - rhs


def replacement_bound(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    threshold: float,
    n: int,
    interval: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> float:
    """Replacement-cost level below which the objective rises from N to N+1.

    When the replacement cost is under this bound, stopping later (N+1
    inspections instead of N) cannot pay off; non-decreasing in N whenever
    the arrival factor exceeds 2.
    """
    _require_reduced(combo, model, costs)
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    a1 = model.a1(interval)
    ratio = a1 * model.a2(interval)
    lam = arrivals.rate
    fixed_part = sum(costs.fixed) / lam * (n * a1**n - geometric_sum(a1, n))
    slope = sum(
        rate * proc.shape_coeff * proc.scale
        for proc, rate in zip(combo.processes, costs.variable_rates)
    )
    variable_part = (
        interval * slope / lam * (n * ratio**n - geometric_sum(ratio, n))
    )
    hit_next = maintained_hitting_cdf(
        combo, model, threshold, n + 1, interval, tail_tol=tail_tol
    )
    hit_sum = sum(
        a1 ** (j - 1)
        * maintained_hitting_cdf(combo, model, threshold, j, interval, tail_tol=tail_tol)
        for j in range(1, n + 1)
    )
    hit_part = costs.threshold_penalty / lam * (n * a1**n * hit_next - hit_sum)
    return fixed_part + variable_part + hit_part


def replacement_bound_satisfied(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    threshold: float,
    interval: float,
) -> bool:
    """Whether the replacement cost sits below the N=1 bound."""
    return costs.replacement < replacement_bound(
        combo, model, costs, arrivals, threshold, 1, interval
    )


def feasible_set(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    budget: float,
    n_max: int,
    t_floor: float = 1e-4,
    t_ceiling: float = 1e3,
    root_tol: float = 1e-8,
) -> FeasibleSet:
    """Solve for the budget boundary over N = 1..n_max.

    Relies on CV growing in the interval (convex shapes, growing factors):
    the boundary interval for each N is the bisection root of
    ``CV(N, T) = budget`` in ``[t_floor, t_ceiling]``, which also proxy the
    T-limit checks.  Raises InfeasibleError when even (1, t_floor) exceeds
    the budget; flags the set unconstrained when the budget clears the
    largest scanned CV.
    """
    if not budget > 0.0:
        raise DomainError(f"budget must be positive, got {budget}")
    if n_max < 1:
        raise DomainError(f"n_max must be at least 1, got {n_max}")

    def cv_at(n: int, t: float) -> float:
        probe = PolicySpec(inspection_interval=t, replacement_count=n, threshold=1.0)
        return cv(combo, model, costs, arrivals, probe)

    if cv_at(1, t_floor) > budget:
        raise InfeasibleError(
            f"variable-cost rate exceeds the budget {budget} even at "
            f"(N=1, T={t_floor}); the feasible set is empty"
        )
    if cv_at(n_max, t_ceiling) <= budget:
        return FeasibleSet(
            n1=n_max + 1,
            n2=n_max + 1,
            boundary={},
            budget=budget,
            unconstrained=True,
            t_floor=t_floor,
            t_ceiling=t_ceiling,
        )

    n1 = n_max + 1
    n2 = n_max + 1
    boundary: dict[int, float] = {}
    for n in range(1, n_max + 1):
        if cv_at(n, t_floor) > budget:
            n2 = min(n2, n)
            break
        if cv_at(n, t_ceiling) <= budget:
            continue
        n1 = min(n1, n)
        lo, hi = t_floor, t_ceiling
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if cv_at(n, mid) <= budget:
                lo = mid
            else:
                hi = mid
            if hi - lo <= root_tol * hi:
                break
        boundary[n] = 0.5 * (lo + hi)
    return FeasibleSet(
        n1=n1,
        n2=n2,
        boundary=boundary,
        budget=budget,
        t_floor=t_floor,
        t_ceiling=t_ceiling,
    )


def _golden_minimize(objective, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section minimum of a unimodal scalar function on [lo, hi]."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = objective(x1), objective(x2)
    best_t, best_f = (x1, f1) if f1 <= f2 else (x2, f2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = objective(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = objective(x2)
        if f1 < best_f:
            best_t, best_f = x1, f1
        if f2 < best_f:
            best_t, best_f = x2, f2
    return best_t, best_f


def optimize(
    combo: LinearCombination,
    model: RepairModel,
    costs: CostStructure,
    arrivals: ArrivalModel,
    threshold: float,
    grid: GridSpec,
    budget: float | None = None,
    refine_tol: float = 1e-4,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> PolicyOptimum:
    """Minimize the cost rate over the grid, then refine the interval.

    With a budget, each N's candidate intervals are clipped at the
    feasibility boundary and the boundary interval itself is appended (the
    constrained minimum often sits exactly there).  The winning N is taken
    from the grid; only T is refined, by golden-section bracketing around
    the winner within one grid step and the feasibility bound.
    """
    fs = None
    if budget is not None:
        fs = feasible_set(combo, model, costs, arrivals, budget, grid.n_max)

    t_values = grid.t_values

    def objective(n: int, t: float) -> float:
        probe = PolicySpec(inspection_interval=t, replacement_count=n, threshold=threshold)
        return q0(combo, model, costs, arrivals, probe, tail_tol=tail_tol)

    best: tuple[float, int, float] | None = None
    bounds: dict[int, float | None] = {}
    for n in range(1, grid.n_max + 1):
        bound = fs.t_bound(n) if fs is not None else None
        bounds[n] = bound
        if bound is None:
            candidates = list(t_values)
        else:
            candidates = [float(t) for t in t_values if t <= bound * (1.0 + 1e-9)]
            if grid.t_lo <= bound <= grid.t_hi:
                candidates.append(float(bound))
        for t in candidates:
            value = objective(n, t)
            if best is None or value < best[0]:
                best = (value, n, t)
    if best is None:
        raise InfeasibleError(
            "no grid point satisfies the budget; the feasible grid is empty"
        )

    best_value, n_opt, t_opt = best
    step = (grid.t_hi - grid.t_lo) / max(grid.t_count - 1, 1)
    t_cap = grid.t_hi
    bound = bounds.get(n_opt)
    if bound is not None:
        t_cap = min(t_cap, bound)
    lo = max(grid.t_lo, t_opt - step)
    hi = min(t_cap, t_opt + step)
    if hi > lo and step > 0.0:
        refined_t, refined_value = _golden_minimize(
            lambda t: objective(n_opt, t), lo, hi, refine_tol
        )
        if refined_value < best_value:
            best_value, t_opt = refined_value, refined_t

    final = PolicySpec(
        inspection_interval=t_opt, replacement_count=n_opt, threshold=threshold
    )
    return PolicyOptimum(
        n_opt=n_opt,
        t_opt=float(t_opt),
        q0=float(best_value),
        cv=float(cv(combo, model, costs, arrivals, final)),
        constrained=budget is not None,
    )

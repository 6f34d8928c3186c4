"""Scenario files: one YAML document drives every CLI subcommand.

A scenario aggregates the degradation combination, repair model, cost
structure, arrival model, optional random effect, threshold, search grid,
simulation settings, and an optional budget and reference policy point.
Loading validates every field and reports errors with their YAML path;
dumping is deterministic so a resolved scenario re-runs byte-identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from .cost import CostKind, CostStructure, QuadratureSpec
from .degradation import GammaProcessSpec, LinearCombination
from .errors import ConfigError, DomainError
from .heterogeneity import ArrivalModel, RandomEffectModel
from .policy import (
    ConstantFactor,
    GridSpec,
    RepairModel,
    ScaledExpSaturation,
)
from .simulate import EstimatorKind

BUNDLED_SCENARIO = "reference.yaml"


@dataclass(frozen=True)
class SimSettings:
    """Replication count, seed, and estimator for the simulation paths."""

    replications: int = 3000
    seed: int = 20260815
    estimator: EstimatorKind = EstimatorKind.HYBRID_COUNTS

    def __post_init__(self):
        if self.replications < 1:
            raise DomainError(
                f"replications must be at least 1, got {self.replications}"
            )
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must fit in 64 bits")


@dataclass(frozen=True)
class PolicyPoint:
    """Reference (N, T) pair used by the simulate and validate subcommands."""

    n: int
    t: float

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"n must be at least 1, got {self.n}")
        if not self.t > 0.0:
            raise DomainError(f"t must be positive, got {self.t}")


@dataclass(frozen=True)
class Scenario:
    """Full parameterization of one maintenance-analysis run."""

    combo: LinearCombination
    repair: RepairModel
    costs: CostStructure
    arrivals: ArrivalModel
    threshold: float
    grid: GridSpec
    sim: SimSettings
    random_effect: RandomEffectModel | None = None
    budget: float | None = None
    policy_point: PolicyPoint | None = None
    quadrature: QuadratureSpec | None = None

    def __post_init__(self):
        if not self.threshold > 0.0:
            raise DomainError(f"threshold must be positive, got {self.threshold}")
        n = self.combo.size
        if len(self.costs.fixed) != n:
            raise DomainError(
                f"{len(self.costs.fixed)} cost entries for {n} processes"
            )
        if self.budget is not None and not self.budget > 0.0:
            raise DomainError(f"budget must be positive, got {self.budget}")


def _get(mapping, key, path, expected=None, required=True, default=None):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path or 'document'}: expected a mapping")
    if key not in mapping:
        if required:
            raise ConfigError(f"{_join(path, key)}: missing required field")
        return default
    value = mapping[key]
    if expected is not None and not isinstance(value, expected):
        names = (
            expected.__name__
            if isinstance(expected, type)
            else "/".join(t.__name__ for t in expected)
        )
        raise ConfigError(
            f"{_join(path, key)}: expected {names}, got {type(value).__name__}"
        )
    return value


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _number(mapping, key, path, required=True, default=None) -> float | None:
    value = _get(mapping, key, path, expected=(int, float), required=required,
                 default=default)
    if isinstance(value, bool):
        raise ConfigError(f"{_join(path, key)}: expected a number, got a boolean")
    return float(value) if value is not None else None


def _integer(mapping, key, path, required=True, default=None) -> int | None:
    value = _get(mapping, key, path, expected=int, required=required, default=default)
    if isinstance(value, bool):
        raise ConfigError(f"{_join(path, key)}: expected an integer, got a boolean")
    return value


def _number_list(mapping, key, path, required=True) -> tuple[float, ...]:
    value = _get(mapping, key, path, expected=list, required=required, default=[])
    out = []
    for i, item in enumerate(value):
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(f"{_join(path, key)}[{i}]: expected a number")
        out.append(float(item))
    return tuple(out)


def _wrap_domain(path: str, builder):
    try:
        return builder()
    except DomainError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_repair_form(node, path):
    form = _get(node, "form", path, expected=str)
    if form == "constant":
        value = _number(node, "value", path)
        return _wrap_domain(path, lambda: ConstantFactor(value))
    if form == "scaled_exp_saturation":
        scale = _number(node, "scale", path)
        level = _number(node, "level", path)
        dip = _number(node, "dip", path)
        return _wrap_domain(path, lambda: ScaledExpSaturation(scale, level, dip))
    raise ConfigError(
        f"{_join(path, 'form')}: must be 'constant' or 'scaled_exp_saturation', "
        f"got {form!r}"
    )


def scenario_from_dict(doc: dict) -> Scenario:
    """Build and validate a scenario from a parsed YAML document."""
    if not isinstance(doc, dict):
        raise ConfigError("document: expected a mapping at the top level")

    processes_node = _get(doc, "processes", "", expected=list)
    if not processes_node:
        raise ConfigError("processes: need at least one process")
    weights, specs = [], []
    for i, node in enumerate(processes_node):
        path = f"processes[{i}]"
        weights.append(_number(node, "weight", path))
        coeff = _number(node, "shape_coeff", path)
        power = _number(node, "shape_power", path, required=False, default=1.0)
        scale = _number(node, "scale", path)
        specs.append(
            _wrap_domain(path, lambda c=coeff, p=power, s=scale: GammaProcessSpec(c, p, s))
        )
    combo = _wrap_domain(
        "processes",
        lambda: LinearCombination(weights=tuple(weights), processes=tuple(specs)),
    )

    repair_node = _get(doc, "repair", "", expected=dict)
    repair = RepairModel(
        a1_form=_parse_repair_form(_get(repair_node, "a1", "repair", expected=dict), "repair.a1"),
        a2_form=_parse_repair_form(_get(repair_node, "a2", "repair", expected=dict), "repair.a2"),
    )

    costs_node = _get(doc, "costs", "", expected=dict)
    kind_name = _get(costs_node, "variable_kind", "costs", expected=str)
    try:
        kind = CostKind(kind_name)
    except ValueError:
        raise ConfigError(
            f"costs.variable_kind: must be one of "
            f"{[k.value for k in CostKind]}, got {kind_name!r}"
        ) from None
    costs = _wrap_domain(
        "costs",
        lambda: CostStructure(
            inspection=_number(costs_node, "inspection", "costs"),
            fixed=_number_list(costs_node, "fixed", "costs"),
            variable_kind=kind,
            variable_rates=_number_list(costs_node, "variable_rates", "costs"),
            threshold_penalty=_number(costs_node, "threshold_penalty", "costs"),
            replacement=_number(costs_node, "replacement", "costs"),
        ),
    )

    arrivals_node = _get(doc, "arrivals", "", expected=dict)
    arrivals = _wrap_domain(
        "arrivals",
        lambda: ArrivalModel(
            rate=_number(arrivals_node, "rate", "arrivals"),
            mix_mu=_number(arrivals_node, "mix_mu", "arrivals", required=False, default=1.0),
            mix_nu=_number(arrivals_node, "mix_nu", "arrivals", required=False, default=1.0),
            mixing_exponent=_get(
                arrivals_node, "mixing_exponent", "arrivals", expected=str,
                required=False, default="nu",
            ),
        ),
    )

    grid_node = _get(doc, "grid", "", expected=dict)
    grid = _wrap_domain(
        "grid",
        lambda: GridSpec(
            t_lo=_number(grid_node, "t_lo", "grid"),
            t_hi=_number(grid_node, "t_hi", "grid"),
            t_count=_integer(grid_node, "t_count", "grid"),
            n_max=_integer(grid_node, "n_max", "grid"),
        ),
    )

    sim_node = _get(doc, "simulation", "", expected=dict, required=False, default={})
    estimator_name = _get(
        sim_node, "estimator", "simulation", expected=str, required=False,
        default="hybrid",
    )
    try:
        estimator = EstimatorKind(estimator_name)
    except ValueError:
        raise ConfigError(
            f"simulation.estimator: must be one of "
            f"{[k.value for k in EstimatorKind]}, got {estimator_name!r}"
        ) from None
    sim = _wrap_domain(
        "simulation",
        lambda: SimSettings(
            replications=_integer(
                sim_node, "replications", "simulation", required=False, default=3000
            ),
            seed=_integer(sim_node, "seed", "simulation", required=False,
                          default=20260815),
            estimator=estimator,
        ),
    )

    effect_node = _get(doc, "random_effect", "", expected=dict, required=False)
    random_effect = None
    if effect_node is not None:
        random_effect = _wrap_domain(
            "random_effect",
            lambda: RandomEffectModel(
                gamma_param=_number(effect_node, "gamma_param", "random_effect"),
                delta_param=_number(effect_node, "delta_param", "random_effect"),
                covariate_coeffs=_number_list(
                    effect_node, "covariate_coeffs", "random_effect", required=False
                ),
                covariates=_number_list(
                    effect_node, "covariates", "random_effect", required=False
                ),
            ),
        )

    point_node = _get(doc, "policy_point", "", expected=dict, required=False)
    policy_point = None
    if point_node is not None:
        policy_point = _wrap_domain(
            "policy_point",
            lambda: PolicyPoint(
                n=_integer(point_node, "n", "policy_point"),
                t=_number(point_node, "t", "policy_point"),
            ),
        )

    quad_node = _get(doc, "quadrature", "", expected=dict, required=False)
    quadrature = None
    if quad_node is not None:
        radius_value = quad_node.get("radius")
        radius = None
        if radius_value is not None:
            radius_list = _number_list(quad_node, "radius", "quadrature")
            if len(radius_list) != 2:
                raise ConfigError("quadrature.radius: expected two numbers")
            radius = (radius_list[0], radius_list[1])
        quadrature = _wrap_domain(
            "quadrature",
            lambda: QuadratureSpec(
                radius=radius,
                initial_nodes=_integer(
                    quad_node, "initial_nodes", "quadrature", required=False, default=128
                ),
                max_doublings=_integer(
                    quad_node, "max_doublings", "quadrature", required=False, default=6
                ),
                rel_tol=_number(
                    quad_node, "rel_tol", "quadrature", required=False, default=1e-4
                ),
            ),
        )

    budget = _number(doc, "budget", "", required=False)
    threshold = _number(doc, "threshold", "")
    return _wrap_domain(
        "scenario",
        lambda: Scenario(
            combo=combo,
            repair=repair,
            costs=costs,
            arrivals=arrivals,
            threshold=threshold,
            grid=grid,
            sim=sim,
            random_effect=random_effect,
            budget=budget,
            policy_point=policy_point,
            quadrature=quadrature,
        ),
    )


def _repair_form_to_dict(form) -> dict:
    if isinstance(form, ConstantFactor):
        return {"form": "constant", "value": form.value}
    return {
        "form": "scaled_exp_saturation",
        "scale": form.scale,
        "level": form.level,
        "dip": form.dip,
    }


def scenario_to_dict(scenario: Scenario) -> dict:
    """Canonical dictionary form of a scenario (inverse of scenario_from_dict)."""
    doc: dict = {
        "processes": [
            {
                "weight": w,
                "shape_coeff": p.shape_coeff,
                "shape_power": p.shape_power,
                "scale": p.scale,
            }
            for w, p in zip(scenario.combo.weights, scenario.combo.processes)
        ],
        "threshold": scenario.threshold,
        "repair": {
            "a1": _repair_form_to_dict(scenario.repair.a1_form),
            "a2": _repair_form_to_dict(scenario.repair.a2_form),
        },
        "costs": {
            "inspection": scenario.costs.inspection,
            "fixed": list(scenario.costs.fixed),
            "variable_kind": scenario.costs.variable_kind.value,
            "variable_rates": list(scenario.costs.variable_rates),
            "threshold_penalty": scenario.costs.threshold_penalty,
            "replacement": scenario.costs.replacement,
        },
        "arrivals": {
            "rate": scenario.arrivals.rate,
            "mix_mu": scenario.arrivals.mix_mu,
            "mix_nu": scenario.arrivals.mix_nu,
            "mixing_exponent": scenario.arrivals.mixing_exponent,
        },
        "grid": {
            "t_lo": scenario.grid.t_lo,
            "t_hi": scenario.grid.t_hi,
            "t_count": scenario.grid.t_count,
            "n_max": scenario.grid.n_max,
        },
        "simulation": {
            "replications": scenario.sim.replications,
            "seed": scenario.sim.seed,
            "estimator": scenario.sim.estimator.value,
        },
    }
    if scenario.random_effect is not None:
        effect = {
            "gamma_param": scenario.random_effect.gamma_param,
            "delta_param": scenario.random_effect.delta_param,
        }
        if scenario.random_effect.covariate_coeffs:
            effect["covariate_coeffs"] = list(scenario.random_effect.covariate_coeffs)
            effect["covariates"] = list(scenario.random_effect.covariates)
        doc["random_effect"] = effect
    if scenario.budget is not None:
        doc["budget"] = scenario.budget
    if scenario.policy_point is not None:
        doc["policy_point"] = {
            "n": scenario.policy_point.n,
            "t": scenario.policy_point.t,
        }
    if scenario.quadrature is not None:
        quad = {
            "initial_nodes": scenario.quadrature.initial_nodes,
            "max_doublings": scenario.quadrature.max_doublings,
            "rel_tol": scenario.quadrature.rel_tol,
        }
        if scenario.quadrature.radius is not None:
            quad["radius"] = list(scenario.quadrature.radius)
        doc["quadrature"] = quad
    return doc


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario YAML file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    return scenario_from_dict(doc)


def dump_scenario(scenario: Scenario, path: str | Path) -> None:
    """Write the scenario in canonical form (stable ordering, plain style)."""
    Path(path).write_text(scenario_to_yaml(scenario))


def scenario_to_yaml(scenario: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False,
                          default_flow_style=False)


def bundled_scenario_text() -> str:
    """The packaged reference scenario document."""
    return (
        resources.files("gammacbm").joinpath("scenarios", BUNDLED_SCENARIO).read_text()
    )


def load_bundled_scenario() -> Scenario:
    """Parse the packaged reference scenario."""
    return scenario_from_dict(yaml.safe_load(bundled_scenario_text()))

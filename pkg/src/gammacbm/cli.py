"""Command-line front end: scenario in, tables + figures + summary out.

Every subcommand loads one scenario (a flag-supplied YAML file or the
bundled reference), applies flag overrides, writes the resolved scenario
next to its outputs, and emits CSV tables, PNG figures, and a summary.json.
Exit codes: 0 success, 1 validation error, 2 numerical failure, 3
infeasible constraint set.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import (
    PolicyPoint,
    Scenario,
    dump_scenario,
    load_bundled_scenario,
    load_scenario,
)
from .cost import conditional_cost_pdf, cost_combination
from .degradation import (
    combo_moments,
    hitting_cdf,
    moschopoulos_expand,
    overall_pdf,
    overall_survival,
    sample_overall_many,
)
from .errors import ConfigError, DomainError, InfeasibleError, NumericalError
from .heterogeneity import (
    mixed_hitting_report,
    sample_mixed_overall,
)
from .orderstat import OrderStatMonitor, order_stat_cdf, r_out_of_n_hitting_cdf
from .policy import (
    GridSpec,
    PolicySpec,
    cv,
    feasible_set,
    maintained_hitting_cdf,
    optimize,
    q0,
)
from .report import (
    render_curves,
    render_error_bars,
    render_paths,
    render_surface,
    write_summary,
    write_table,
)
from .rng import RngStream
from .simulate import (
    EstimatorKind,
    estimate_cv,
    estimate_hitting,
    estimate_q0,
)

RESOLVED_NAME = "resolved_scenario.yaml"
SUMMARY_NAME = "summary.json"


class _Parser(argparse.ArgumentParser):
    """Argument errors surface as validation errors (exit code 1)."""

    def error(self, message):
        raise ConfigError(message)


def _parse_range(text: str, flag: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{flag}: expected lo:hi:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"{flag}: {exc}") from exc
    if not (lo <= hi and count >= 1):
        raise ConfigError(f"{flag}: need lo <= hi and count >= 1, got {text!r}")
    return lo, hi, count


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", metavar="PATH",
        help="scenario YAML file (default: the bundled reference scenario)",
    )
    common.add_argument(
        "--out", metavar="DIR", default="gammacbm-out",
        help="output directory for tables, figures and the summary",
    )
    common.add_argument("--seed", type=int, metavar="U64",
                        help="override the scenario's simulation seed")
    common.add_argument("--budget", type=float, metavar="K",
                        help="variable-cost budget; enables the constrained problem")
    common.add_argument(
        "--grid-t", metavar="LO:HI:COUNT",
        help="time/interval grid override, e.g. 1:7:10",
    )
    common.add_argument("--n-max", type=int, metavar="INT",
                        help="largest inspection count to scan")
    common.add_argument("--reps", type=int, metavar="INT",
                        help="override the scenario's replication count")
    common.add_argument(
        "--estimator", choices=["hybrid", "event"],
        help="replacement-cycle estimator for simulation subcommands",
    )

    parser = _Parser(
        prog="gammacbm",
        description=(
            "Condition-based maintenance analysis for weighted sums of gamma "
            "degradation processes: densities, hitting times, cost surfaces, "
            "constrained policy optimization, and seeded Monte Carlo checks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser(
        "density", parents=[common],
        help="combined-level pdf and CDF on a level grid",
        description="Tabulate the combined degradation level's pdf and CDF "
                    "at one time point. CSV columns: y, pdf, cdf.",
    )
    p.add_argument("--at-time", type=float, default=1.0, metavar="T",
                   help="evaluation time (default 1.0)")
    p.add_argument("--grid-y", metavar="LO:HI:COUNT",
                   help="level grid (default: mean +/- 8 standard deviations)")

    p = sub.add_parser(
        "hitting", parents=[common],
        help="threshold-hitting CDF over a time grid",
        description="Tabulate the first-hitting-time CDF of the combined level "
                    "at the scenario threshold. CSV columns: t, hitting_cdf, "
                    "optional cycle_j and random-effect columns.",
    )
    p.add_argument("--cycle", type=int, default=1, metavar="J",
                   help="repair cycle index (scales inflated by a2^(J-1))")
    p.add_argument("--random-effect", action="store_true",
                   help="add effect-averaged columns (quadrature and series routes)")

    p = sub.add_parser(
        "cost-surface", parents=[common],
        help="objective and variable-cost rates over the (N, T) grid",
        description="Evaluate the expected total cost rate Q0 and variable "
                    "cost rate CV on the scenario grid. CSV columns: N, T, Q0, "
                    "CV, feasible (plus per-cycle hitting columns with "
                    "--hitting-columns).",
    )
    p.add_argument("--hitting-columns", action="store_true",
                   help="append per-cycle hitting CDFs F_hit_j1..jN")

    sub.add_parser(
        "optimize", parents=[common],
        help="grid search plus golden-section refinement of the cost rate",
        description="Minimize the expected total cost rate over the grid, "
                    "optionally under a variable-cost budget; reports the "
                    "optimum, the feasibility boundary, and (when budgeted) "
                    "the unconstrained reference point.",
    )

    p = sub.add_parser(
        "orderstat", parents=[common],
        help="r-out-of-n monitoring curves for identical components",
        description="Hitting and order-statistic curves for a fleet of "
                    "identical weighted components. CSV columns: t, "
                    "marginal_exceed, hitting_cdf.",
    )
    p.add_argument("--monitor-count", type=int, default=3, metavar="N",
                   help="number of identical components (default 3)")
    p.add_argument("--monitor-required", type=int, default=2, metavar="R",
                   help="exceedances required to trip the monitor (default 2)")
    p.add_argument("--component", type=int, default=0, metavar="K",
                   help="scenario process index supplying the common law (default 0)")
    p.add_argument("--threshold2", type=float, metavar="L2",
                   help="per-component threshold (default: scenario threshold)")

    p = sub.add_parser(
        "simulate", parents=[common],
        help="Monte Carlo estimates with standard errors at the reference policy",
        description="Estimate the total and variable cost rates and the "
                    "hitting probability at the scenario's policy point. CSV "
                    "columns: quantity, estimate, std_error, analytic, z.",
    )
    p.add_argument("--at-n", type=int, metavar="N",
                   help="override the reference policy's inspection count")
    p.add_argument("--at-t", type=float, metavar="T",
                   help="override the reference policy's inspection interval")

    sub.add_parser(
        "validate", parents=[common],
        help="analytic-vs-Monte-Carlo agreement suite with a pass/fail table",
        description="Re-derive each analytic surface by simulation and check "
                    "3-standard-error agreement (plus the two-route "
                    "random-effect identity). Exit code 2 when any row fails.",
    )

    p = sub.add_parser(
        "paths", parents=[common],
        help="sampled degradation trajectories on a time grid",
        description="Sample gamma-increment trajectories of every component "
                    "and their weighted combination. CSV columns: path, t, "
                    "x_1..x_n, y.",
    )
    p.add_argument("--steps", type=int, default=200, metavar="INT",
                   help="time steps per trajectory (default 200)")

    p = sub.add_parser(
        "cost-density", parents=[common],
        help="conditional repair-cost density given an observed level",
        description="Invert the joint level/cost characteristic function to "
                    "tabulate the conditional cost density at one (time, "
                    "level) point. CSV columns: u, conditional_pdf.",
    )
    p.add_argument("--at-time", type=float, default=1.0, metavar="T",
                   help="evaluation time (default 1.0)")
    p.add_argument("--at-level", type=float, metavar="Y",
                   help="conditioning level (default: mean level at the time)")
    p.add_argument("--grid-u", metavar="LO:HI:COUNT",
                   help="cost grid (default: mean cost +/- 8 standard deviations)")
    return parser


def resolve_scenario(args) -> Scenario:
    scenario = (
        load_scenario(args.config) if args.config else load_bundled_scenario()
    )
    if args.seed is not None:
        scenario = replace(scenario, sim=replace(scenario.sim, seed=args.seed))
    if args.reps is not None:
        scenario = replace(
            scenario, sim=replace(scenario.sim, replications=args.reps)
        )
    if args.estimator is not None:
        scenario = replace(
            scenario,
            sim=replace(scenario.sim, estimator=EstimatorKind(args.estimator)),
        )
    if args.budget is not None:
        scenario = replace(scenario, budget=args.budget)
    if args.grid_t is not None:
        lo, hi, count = _parse_range(args.grid_t, "--grid-t")
        try:
            grid = GridSpec(lo, hi, count, scenario.grid.n_max)
        except DomainError as exc:
            raise ConfigError(f"--grid-t: {exc}") from exc
        scenario = replace(scenario, grid=grid)
    if args.n_max is not None:
        try:
            grid = replace(scenario.grid, n_max=args.n_max)
        except DomainError as exc:
            raise ConfigError(f"--n-max: {exc}") from exc
        scenario = replace(scenario, grid=grid)
    at_n = getattr(args, "at_n", None)
    at_t = getattr(args, "at_t", None)
    if at_n is not None or at_t is not None:
        base = scenario.policy_point
        n = at_n if at_n is not None else (base.n if base else None)
        t = at_t if at_t is not None else (base.t if base else None)
        if n is None or t is None:
            raise ConfigError(
                "reference policy incomplete: supply both --at-n and --at-t "
                "or a policy_point in the scenario"
            )
        scenario = replace(scenario, policy_point=PolicyPoint(n=n, t=t))
    return scenario


def _scenario_echo(scenario: Scenario) -> list[str]:
    parts = [
        f"processes={scenario.combo.size}",
        "weights=" + "/".join(f"{w:g}" for w in scenario.combo.weights),
        "scales=" + "/".join(f"{p.scale:g}" for p in scenario.combo.processes),
        f"threshold={scenario.threshold:g}",
        f"arrival_rate={scenario.arrivals.rate:g}",
        f"seed={scenario.sim.seed}",
    ]
    if scenario.budget is not None:
        parts.append(f"budget={scenario.budget:g}")
    return ["resolved scenario: " + " ".join(parts)]


def _policy_point(scenario: Scenario) -> PolicyPoint:
    if scenario.policy_point is None:
        raise ConfigError(
            "this subcommand needs a reference policy: set policy_point in "
            "the scenario or pass --at-n/--at-t"
        )
    return scenario.policy_point


def _run_density(scenario: Scenario, args, out: Path) -> dict:
    t = args.at_time
    if not t > 0.0:
        raise ConfigError(f"--at-time must be positive, got {t}")
    mean, var = combo_moments(scenario.combo, t)
    sd = var**0.5
    if args.grid_y:
        lo, hi, count = _parse_range(args.grid_y, "--grid-y")
        if lo <= 0.0:
            raise ConfigError("--grid-y: levels must be positive")
    else:
        lo, hi, count = max(mean - 8.0 * sd, (mean + 8.0 * sd) * 1e-6), mean + 8.0 * sd, 400
    ys = np.linspace(lo, hi, count)
    expansion = moschopoulos_expand(scenario.combo, t)
    pdf = overall_pdf(expansion, ys)
    cdf = np.array([1.0 - overall_survival(expansion, y) for y in ys])
    write_table(
        out / "density.csv",
        {"y": ys, "pdf": pdf, "cdf": cdf},
        comments=_scenario_echo(scenario)
        + [f"time={t:g} mean={mean:.12g} std={sd:.12g}",
           f"expansion_terms={expansion.truncation_order} retained_mass={expansion.mass:.12g}"],
    )
    render_curves(
        out / "density.png", ys, {"pdf": pdf, "cdf": cdf},
        xlabel="combined level y", ylabel="density / probability",
        title=f"Combined degradation level at t={t:g}",
    )
    return {
        "time": t,
        "mean": mean,
        "variance": var,
        "expansion_terms": expansion.truncation_order,
        "retained_mass": expansion.mass,
    }


def _time_grid(scenario: Scenario, args) -> np.ndarray:
    if args.grid_t is not None:
        lo, hi, count = _parse_range(args.grid_t, "--grid-t")
        if lo <= 0.0:
            raise ConfigError("--grid-t: times must be positive")
        return np.linspace(lo, hi, count)
    grid = scenario.grid
    return np.linspace(grid.t_lo, grid.t_hi, grid.t_count)


def _run_hitting(scenario: Scenario, args, out: Path) -> dict:
    ts = _time_grid(scenario, args)
    threshold = scenario.threshold
    columns: dict[str, np.ndarray] = {"t": ts}
    columns["hitting_cdf"] = np.array(
        [hitting_cdf(scenario.combo, threshold, t) for t in ts]
    )
    if args.cycle < 1:
        raise ConfigError(f"--cycle must be at least 1, got {args.cycle}")
    if args.cycle > 1:
        columns[f"hitting_cdf_cycle{args.cycle}"] = np.array(
            [
                maintained_hitting_cdf(
                    scenario.combo, scenario.repair, threshold, args.cycle, t
                )
                for t in ts
            ]
        )
    if args.random_effect:
        if scenario.random_effect is None:
            raise ConfigError(
                "--random-effect requires a random_effect section in the scenario"
            )
        reports = [
            mixed_hitting_report(scenario.random_effect, scenario.combo, threshold, t)
            for t in ts
        ]
        columns["mixed_quadrature"] = np.array([r.quadrature for r in reports])
        columns["mixed_series"] = np.array([r.series for r in reports])
    write_table(
        out / "hitting.csv", columns,
        comments=_scenario_echo(scenario) + [f"threshold={threshold:g}"],
    )
    curves = {k: v for k, v in columns.items() if k != "t"}
    render_curves(
        out / "hitting.png", ts, curves,
        xlabel="time t", ylabel="P(first hit <= t)",
        title=f"Threshold-hitting CDF at L={threshold:g}",
    )
    return {"threshold": threshold, "points": len(ts)}


def _run_cost_surface(scenario: Scenario, args, out: Path) -> dict:
    grid = scenario.grid
    ts = _time_grid(scenario, args)
    ns = np.arange(1, grid.n_max + 1)
    budget = scenario.budget
    rows_n, rows_t, rows_q0, rows_cv, rows_feasible = [], [], [], [], []
    hit_cols: dict[str, list[float]] = (
        {f"F_hit_j{j}": [] for j in range(1, grid.n_max + 1)}
        if args.hitting_columns
        else {}
    )
    failures = []
    q_matrix = np.full((len(ns), len(ts)), np.nan)
    for i, n in enumerate(ns):
        for j_t, t in enumerate(ts):
            policy = PolicySpec(float(t), int(n), scenario.threshold)
            try:
                q_val = q0(scenario.combo, scenario.repair, scenario.costs,
                           scenario.arrivals, policy)
                cv_val = cv(scenario.combo, scenario.repair, scenario.costs,
                            scenario.arrivals, policy)
            except NumericalError as exc:
                failures.append(f"N={n} T={t:g}: {exc}")
                q_val, cv_val = float("nan"), float("nan")
            rows_n.append(int(n))
            rows_t.append(float(t))
            rows_q0.append(q_val)
            rows_cv.append(cv_val)
            rows_feasible.append(
                1 if (budget is None or cv_val <= budget) else 0
            )
            q_matrix[i, j_t] = q_val
            if args.hitting_columns:
                for j in range(1, grid.n_max + 1):
                    hit_cols[f"F_hit_j{j}"].append(
                        maintained_hitting_cdf(
                            scenario.combo, scenario.repair, scenario.threshold,
                            j, float(t),
                        )
                        if j <= n
                        else float("nan")
                    )
    columns = {
        "N": rows_n,
        "T": rows_t,
        "Q0": rows_q0,
        "CV": rows_cv,
        "feasible": rows_feasible,
    }
    columns.update(hit_cols)
    write_table(
        out / "cost_surface.csv", columns,
        comments=_scenario_echo(scenario)
        + [f"budget={'none' if budget is None else budget}"],
    )
    render_surface(
        out / "cost_surface.png", ts, ns, q_matrix,
        zlabel="expected total cost rate Q0",
        title="Cost rate over the policy grid",
    )
    return {
        "cells": len(rows_n),
        "cell_failures": failures,
        "budget": budget,
    }


def _run_optimize(scenario: Scenario, args, out: Path) -> dict:
    grid = scenario.grid
    if args.grid_t is not None:
        lo, hi, count = _parse_range(args.grid_t, "--grid-t")
        grid = GridSpec(lo, hi, count, grid.n_max)
    optimum = optimize(
        scenario.combo, scenario.repair, scenario.costs, scenario.arrivals,
        scenario.threshold, grid, budget=scenario.budget,
    )
    summary: dict = {
        "n_opt": optimum.n_opt,
        "t_opt": optimum.t_opt,
        "q0": optimum.q0,
        "cv": optimum.cv,
        "constrained": optimum.constrained,
        "t_limit_proxies": {"t_floor": 1e-4, "t_ceiling": 1e3},
    }
    tables = {
        "N_opt": [optimum.n_opt],
        "T_opt": [optimum.t_opt],
        "Q0": [optimum.q0],
        "CV": [optimum.cv],
        "constrained": [optimum.constrained],
    }
    if scenario.budget is not None:
        fs = feasible_set(
            scenario.combo, scenario.repair, scenario.costs, scenario.arrivals,
            scenario.budget, grid.n_max,
        )
        boundary_rows = sorted(fs.boundary.items())
        if boundary_rows:
            write_table(
                out / "feasible_boundary.csv",
                {
                    "N": [n for n, _ in boundary_rows],
                    "T_star": [t for _, t in boundary_rows],
                    "CV_at_boundary": [
                        cv(
                            scenario.combo, scenario.repair, scenario.costs,
                            scenario.arrivals,
                            PolicySpec(t, n, scenario.threshold),
                        )
                        for n, t in boundary_rows
                    ],
                },
                comments=_scenario_echo(scenario)
                + [
                    f"budget={scenario.budget:g}",
                    "T limits proxied at t_floor=0.0001 and t_ceiling=1000",
                ],
            )
        reference = optimize(
            scenario.combo, scenario.repair, scenario.costs, scenario.arrivals,
            scenario.threshold, grid, budget=None,
        )
        summary["unconstrained_reference"] = {
            "n_opt": reference.n_opt,
            "t_opt": reference.t_opt,
            "q0": reference.q0,
            "cv": reference.cv,
            "feasible": bool(reference.cv <= scenario.budget),
        }
        summary["feasible_set"] = {
            "n1": fs.n1,
            "n2": fs.n2,
            "unconstrained": fs.unconstrained,
            "boundary": {str(n): t for n, t in sorted(fs.boundary.items())},
        }
    write_table(
        out / "optimum.csv", tables,
        comments=_scenario_echo(scenario)
        + [f"grid T in [{grid.t_lo:g}, {grid.t_hi:g}] x{grid.t_count}, N <= {grid.n_max}"],
    )
    ts = grid.t_values
    bound = None
    if scenario.budget is not None:
        bound = summary["feasible_set"]["boundary"].get(str(optimum.n_opt))
    t_plot = [t for t in ts if bound is None or t <= bound]
    if t_plot:
        q_curve = [
            q0(
                scenario.combo, scenario.repair, scenario.costs, scenario.arrivals,
                PolicySpec(float(t), optimum.n_opt, scenario.threshold),
            )
            for t in t_plot
        ]
        render_curves(
            out / "optimize.png", t_plot,
            {f"Q0 at N={optimum.n_opt}": q_curve},
            xlabel="inspection interval T", ylabel="expected total cost rate",
            title=f"Optimum N={optimum.n_opt}, T={optimum.t_opt:.4f}, "
                  f"Q0={optimum.q0:.4f}",
        )
    return summary


def _run_orderstat(scenario: Scenario, args, out: Path) -> dict:
    if not 0 <= args.component < scenario.combo.size:
        raise ConfigError(
            f"--component must index a scenario process "
            f"(0..{scenario.combo.size - 1}), got {args.component}"
        )
    threshold2 = (
        args.threshold2 if args.threshold2 is not None else scenario.threshold
    )
    try:
        monitor = OrderStatMonitor(
            count=args.monitor_count,
            required=args.monitor_required,
            spec=scenario.combo.processes[args.component],
            weight=scenario.combo.weights[args.component],
            threshold=threshold2,
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    ts = _time_grid(scenario, args)
    marginal = np.array([1.0 - monitor.marginal_cdf(threshold2, t) for t in ts])
    hitting = np.array([r_out_of_n_hitting_cdf(monitor, t) for t in ts])
    write_table(
        out / "orderstat.csv",
        {"t": ts, "marginal_exceed": marginal, "hitting_cdf": hitting},
        comments=_scenario_echo(scenario)
        + [
            f"monitor: {args.monitor_required}-out-of-{args.monitor_count} "
            f"component={args.component} threshold2={threshold2:g}"
        ],
    )
    render_curves(
        out / "orderstat.png", ts,
        {
            "single component exceeds": marginal,
            f"at least {args.monitor_required} of {args.monitor_count} exceed": hitting,
        },
        xlabel="time t", ylabel="probability",
        title=f"{args.monitor_required}-out-of-{args.monitor_count} monitor",
    )
    return {
        "monitor_count": args.monitor_count,
        "monitor_required": args.monitor_required,
        "threshold2": threshold2,
    }


def _run_simulate(scenario: Scenario, args, out: Path) -> dict:
    point = _policy_point(scenario)
    policy = PolicySpec(point.t, point.n, scenario.threshold)
    sim = scenario.sim
    est_q0 = estimate_q0(
        scenario.combo, scenario.repair, scenario.costs, scenario.arrivals,
        policy, sim.replications, sim.seed, kind=sim.estimator,
    )
    est_cv = estimate_cv(
        scenario.combo, scenario.repair, scenario.costs, scenario.arrivals,
        policy, sim.replications, sim.seed, kind=sim.estimator,
    )
    est_hit = estimate_hitting(
        scenario.combo, scenario.threshold, point.t, sim.replications, sim.seed
    )
    analytic = {
        "q0": q0(scenario.combo, scenario.repair, scenario.costs,
                 scenario.arrivals, policy),
        "cv": cv(scenario.combo, scenario.repair, scenario.costs,
                 scenario.arrivals, policy),
        "hitting": hitting_cdf(scenario.combo, scenario.threshold, point.t),
    }
    rows = []
    for name, est in (("q0", est_q0), ("cv", est_cv), ("hitting", est_hit)):
        z = (
            (est.mean - analytic[name]) / est.std_error
            if est.std_error > 0.0
            else 0.0
        )
        rows.append((name, est.mean, est.std_error, analytic[name], z))
    write_table(
        out / "simulate.csv",
        {
            "quantity": [r[0] for r in rows],
            "estimate": [r[1] for r in rows],
            "std_error": [r[2] for r in rows],
            "analytic": [r[3] for r in rows],
            "z": [r[4] for r in rows],
        },
        comments=_scenario_echo(scenario)
        + [
            f"policy N={point.n} T={point.t:g} estimator={sim.estimator.value} "
            f"replications={sim.replications}"
        ],
    )
    render_error_bars(
        out / "simulate.png",
        [r[0] for r in rows],
        [r[1] for r in rows],
        [r[2] for r in rows],
        ylabel="estimate (3 standard-error bars)",
        title=f"Monte Carlo vs analytic at N={point.n}, T={point.t:g}",
    )
    return {
        "policy": {"n": point.n, "t": point.t},
        "estimator": sim.estimator.value,
        "replications": sim.replications,
        "estimates": {
            r[0]: {"mean": r[1], "std_error": r[2], "analytic": r[3], "z": r[4]}
            for r in rows
        },
    }


def _run_validate(scenario: Scenario, args, out: Path) -> dict:
    point = _policy_point(scenario)
    policy = PolicySpec(point.t, point.n, scenario.threshold)
    sim = scenario.sim
    reps = sim.replications
    rows: list[tuple[str, float, float, float, float, bool]] = []

    def add_mc_row(name: str, analytic_value: float, est) -> None:
        se = est.std_error
        z = (est.mean - analytic_value) / se if se > 0.0 else 0.0
        rows.append((name, analytic_value, est.mean, se, z, abs(z) <= 3.0))

    # The hybrid estimator is the Monte Carlo twin of the analytic cost
    # rates (the event-driven one deliberately models per-occurrence
    # accounting and is compared in the `simulate` subcommand instead).
    add_mc_row(
        "q0_rate",
        q0(scenario.combo, scenario.repair, scenario.costs, scenario.arrivals,
           policy),
        estimate_q0(scenario.combo, scenario.repair, scenario.costs,
                    scenario.arrivals, policy, reps, sim.seed,
                    kind=EstimatorKind.HYBRID_COUNTS),
    )
    add_mc_row(
        "cv_rate",
        cv(scenario.combo, scenario.repair, scenario.costs, scenario.arrivals,
           policy),
        estimate_cv(scenario.combo, scenario.repair, scenario.costs,
                    scenario.arrivals, policy, reps, sim.seed,
                    kind=EstimatorKind.HYBRID_COUNTS),
    )
    hit_reps = max(reps, 100_000)
    add_mc_row(
        "hitting_prob",
        hitting_cdf(scenario.combo, scenario.threshold, point.t),
        estimate_hitting(scenario.combo, scenario.threshold, point.t, hit_reps,
                         sim.seed),
    )

    # Trip level at the component's marginal mean keeps the monitored
    # probability interior, so the binomial check has actual power.
    spec0 = scenario.combo.processes[0]
    weight0 = scenario.combo.weights[0]
    trip_level = weight0 * spec0.shape_at(point.t) * spec0.scale
    monitor = OrderStatMonitor(
        count=3, required=2, spec=spec0, weight=weight0, threshold=trip_level,
    )
    analytic_os = r_out_of_n_hitting_cdf(monitor, point.t)
    draws = RngStream(sim.seed).substream(9001).gamma(
        monitor.spec.shape_at(point.t),
        monitor.weight * monitor.spec.scale,
        size=(hit_reps, monitor.count),
    )
    exceed_counts = (draws >= monitor.threshold).sum(axis=1)
    p_hat = float(np.mean(exceed_counts >= monitor.required))
    se = float(np.sqrt(max(p_hat * (1.0 - p_hat), 1e-300) / hit_reps))
    z = (p_hat - analytic_os) / se if se > 0.0 else 0.0
    rows.append(("orderstat_2_of_3", analytic_os, p_hat, se, z, abs(z) <= 3.0))

    if scenario.random_effect is not None:
        report = mixed_hitting_report(
            scenario.random_effect, scenario.combo, scenario.threshold, point.t
        )
        diff = abs(report.quadrature - report.series)
        rows.append(
            ("mixed_two_routes", report.quadrature, report.series, 0.0, 0.0,
             diff <= 1e-4)
        )
        mixed_draws = sample_mixed_overall(
            scenario.random_effect, scenario.combo, point.t,
            RngStream(sim.seed).substream(9002), hit_reps,
        )
        p_hat = float(np.mean(mixed_draws >= scenario.threshold))
        se = float(np.sqrt(max(p_hat * (1.0 - p_hat), 1e-300) / hit_reps))
        z = (p_hat - report.quadrature) / se if se > 0.0 else 0.0
        rows.append(
            ("mixed_hitting_mc", report.quadrature, p_hat, se, z, abs(z) <= 3.0)
        )

    write_table(
        out / "validate.csv",
        {
            "check": [r[0] for r in rows],
            "analytic": [r[1] for r in rows],
            "estimate": [r[2] for r in rows],
            "std_error": [r[3] for r in rows],
            "z": [r[4] for r in rows],
            "passed": [r[5] for r in rows],
        },
        comments=_scenario_echo(scenario)
        + [
            f"policy N={point.n} T={point.t:g} replications={reps} "
            "estimator=hybrid (the analytic twin)"
        ],
    )
    mc_rows = [r for r in rows if r[3] > 0.0]
    if mc_rows:
        render_error_bars(
            out / "validate.png",
            [r[0] for r in mc_rows],
            [r[2] for r in mc_rows],
            [r[3] for r in mc_rows],
            ylabel="Monte Carlo estimate (3 SE bars)",
            title="Analytic-vs-simulation agreement",
        )
    all_passed = all(r[5] for r in rows)
    if not all_passed:
        failed = [r[0] for r in rows if not r[5]]
        raise NumericalError(
            f"validation checks failed: {', '.join(failed)} (see validate.csv)"
        )
    return {
        "checks": len(rows),
        "all_passed": all_passed,
        "results": {r[0]: {"analytic": r[1], "estimate": r[2], "passed": r[5]}
                    for r in rows},
    }


def _run_paths(scenario: Scenario, args, out: Path) -> dict:
    if args.steps < 2:
        raise ConfigError(f"--steps must be at least 2, got {args.steps}")
    n_paths = scenario.sim.replications if args.reps is not None else 3
    n_paths = min(n_paths, 50)
    grid = scenario.grid
    if args.grid_t is not None:
        lo, hi, _ = _parse_range(args.grid_t, "--grid-t")
        t_max = hi
    else:
        t_max = grid.t_hi
    times = np.linspace(0.0, t_max, args.steps)
    root = RngStream(scenario.sim.seed)
    columns: dict[str, list[float]] = {"path": [], "t": []}
    for k in range(scenario.combo.size):
        columns[f"x_{k + 1}"] = []
    columns["y"] = []
    first_components: dict[str, np.ndarray] = {}
    first_combined: np.ndarray | None = None
    for path_id in range(n_paths):
        levels = []
        for k, proc in enumerate(scenario.combo.processes):
            shapes = np.array([proc.shape_at(t) if t > 0 else 0.0 for t in times])
            increments = np.diff(shapes)
            draws = root.substream(path_id, k).gamma(
                increments, proc.scale, size=len(increments)
            )
            levels.append(np.concatenate([[0.0], np.cumsum(draws)]))
        combined = np.zeros_like(times)
        for w, lv in zip(scenario.combo.weights, levels):
            combined += w * lv
        columns["path"].extend([path_id] * len(times))
        columns["t"].extend(times.tolist())
        for k, lv in enumerate(levels):
            columns[f"x_{k + 1}"].extend(lv.tolist())
        columns["y"].extend(combined.tolist())
        if path_id == 0:
            first_components = {
                f"x_{k + 1}": lv for k, lv in enumerate(levels)
            }
            first_combined = combined
    write_table(
        out / "paths.csv", columns,
        comments=_scenario_echo(scenario)
        + [f"paths={n_paths} steps={args.steps} t_max={t_max:g}"],
    )
    render_paths(
        out / "paths.png", times, first_components, first_combined,
        title="Sampled degradation trajectories (first path)",
    )
    return {"paths": n_paths, "steps": args.steps, "t_max": t_max}


def _run_cost_density(scenario: Scenario, args, out: Path) -> dict:
    t = args.at_time
    if not t > 0.0:
        raise ConfigError(f"--at-time must be positive, got {t}")
    mean_y, _ = combo_moments(scenario.combo, t)
    y = args.at_level if args.at_level is not None else mean_y
    if not y > 0.0:
        raise ConfigError(f"--at-level must be positive, got {y}")
    cost_proc = cost_combination(scenario.combo, scenario.costs)
    mean_u, var_u = combo_moments(cost_proc, t)
    sd_u = var_u**0.5
    if args.grid_u:
        lo, hi, count = _parse_range(args.grid_u, "--grid-u")
        if lo <= 0.0:
            raise ConfigError("--grid-u: costs must be positive")
    else:
        lo, hi, count = max(mean_u - 8.0 * sd_u, (mean_u + 8.0 * sd_u) * 1e-6), \
            mean_u + 8.0 * sd_u, 400
    us = np.linspace(lo, hi, count)
    values = conditional_cost_pdf(
        scenario.combo, scenario.costs, t, y, us, quad=scenario.quadrature
    )
    integral = float(np.trapezoid(values, us))
    write_table(
        out / "cost_density.csv",
        {"u": us, "conditional_pdf": values},
        comments=_scenario_echo(scenario)
        + [f"time={t:g} level={y:g} grid_integral={integral:.12g}"],
    )
    render_curves(
        out / "cost_density.png", us, {"conditional pdf": values},
        xlabel="cumulative variable cost u", ylabel="density",
        title=f"Cost density given level {y:g} at t={t:g}",
    )
    return {"time": t, "level": y, "grid_integral": integral}


_HANDLERS = {
    "density": _run_density,
    "hitting": _run_hitting,
    "cost-surface": _run_cost_surface,
    "optimize": _run_optimize,
    "orderstat": _run_orderstat,
    "simulate": _run_simulate,
    "validate": _run_validate,
    "paths": _run_paths,
    "cost-density": _run_cost_density,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        scenario = resolve_scenario(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        dump_scenario(scenario, out / RESOLVED_NAME)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            payload = _HANDLERS[args.command](scenario, args, out)
        summary = {
            "subcommand": args.command,
            "seed": scenario.sim.seed,
            "resolved_scenario": RESOLVED_NAME,
            "warnings": sorted(str(w.message) for w in caught),
            "result": payload,
        }
        write_summary(out / SUMMARY_NAME, summary)
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: plan, sweep, bench, and validate.

Exit codes: 0 success, 2 scenario/trace parse error, 3 solver failure,
4 validation failure.  Solver tolerances can be overridden through the
environment variables PERCHPLAN_MAX_ITERATIONS,
PERCHPLAN_GRADIENT_TOLERANCE, and PERCHPLAN_COST_TOLERANCE.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import optimizer
from .flatness import E3
from .scenario import ScenarioConfig, ScenarioParseError, surface_normal_from_slope
from .validator import check, tangential_speed

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4

SWEEP_PARAMS = ("landing_height", "slope", "v_n_bar")

TRACE_FIELDS = [
    "t",
    "px", "py", "pz",
    "vx", "vy", "vz",
    "ax", "ay", "az",
    "jx", "jy", "jz",
    "tau", "omega",
    "zbx", "zby", "zbz",
    "F1", "dist",
]

_ENV_OVERRIDES = {
    "PERCHPLAN_MAX_ITERATIONS": ("max_iterations", int),
    "PERCHPLAN_GRADIENT_TOLERANCE": ("gradient_tolerance", float),
    "PERCHPLAN_COST_TOLERANCE": ("cost_tolerance", float),
}


def load_scenario(path) -> ScenarioConfig:
    """Load a scenario file and apply environment solver overrides."""
    scenario = ScenarioConfig.load(path)
    updates = {}
    for var, (field, cast) in _ENV_OVERRIDES.items():
        raw = os.environ.get(var)
        if raw:
            try:
                updates[field] = cast(raw)
            except ValueError as exc:
                raise ScenarioParseError(f"bad {var}={raw!r}: {exc}") from exc
    if updates:
        scenario.solver = replace(scenario.solver, **updates)
    return scenario


def apply_parameter(scenario: ScenarioConfig, name, value) -> ScenarioConfig:
    """Scenario with one sweep parameter replaced."""
    data = scenario.to_dict()
    if name == "landing_height":
        data["platform"]["position"][2] = float(value)
    elif name == "slope":
        data["perch"]["z_d"] = [float(c) for c in surface_normal_from_slope(value)]
    elif name == "v_n_bar":
        data["perch"]["v_n_bar"] = float(value)
    else:
        raise ScenarioParseError(f"unknown sweep parameter {name!r}")
    return ScenarioConfig.from_dict(data)


def write_trace(path, plan, scenario, samples=400):
    """Sampled trajectory trace as CSV; returns the sampled times."""
    spline = plan.spline
    times = np.linspace(0.0, spline.T_total, samples + 1)
    S = spline.sample(times, max_order=3)
    geom = scenario.geometry
    spec = scenario.perch
    tau = S[:, 2] + geom.g_bar * E3
    tau_n = np.linalg.norm(tau, axis=1)
    safe = np.maximum(tau_n, 1e-12)
    zb = tau / safe[:, None]
    jj = np.einsum("ij,ij->i", S[:, 3], S[:, 3])
    tj = np.einsum("ij,ij->i", tau, S[:, 3])
    omega = np.sqrt(np.maximum(jj / safe**2 - tj**2 / safe**4, 0.0))
    rho = scenario.platform.rho0[None, :] + scenario.platform.vel[None, :] * times[:, None]
    dist = np.linalg.norm(S[:, 0] - rho, axis=1)
    a_hs = -spec.z_d
    s = 1.0 / np.maximum(1.0 + zb[:, 2], 1e-12)
    w1 = (1.0 - zb[:, 0] ** 2 * s) * a_hs[0] - zb[:, 0] * zb[:, 1] * s * a_hs[1] - zb[:, 0] * a_hs[2]
    w2 = -zb[:, 0] * zb[:, 1] * s * a_hs[0] + (1.0 - zb[:, 1] ** 2 * s) * a_hs[1] - zb[:, 1] * a_hs[2]
    center = S[:, 0] - geom.l_bar * zb
    F1 = geom.r_bar * np.hypot(w1, w2) + (center - rho) @ a_hs

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_FIELDS)
        for i, t in enumerate(times):
            writer.writerow(
                [f"{t:.6f}"]
                + [f"{x:.9f}" for x in S[i, 0]]
                + [f"{x:.9f}" for x in S[i, 1]]
                + [f"{x:.9f}" for x in S[i, 2]]
                + [f"{x:.9f}" for x in S[i, 3]]
                + [f"{tau_n[i]:.9f}", f"{omega[i]:.9f}"]
                + [f"{x:.9f}" for x in zb[i]]
                + [f"{F1[i]:.9f}", f"{dist[i]:.9f}"]
            )
    return times


def cmd_plan(args):
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    plan = optimizer.solve(scenario)
    report = check(plan, scenario)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(out / "trace.csv", plan, scenario, samples=args.samples)
    summary = {
        "status": plan.status,
        "duration": plan.duration,
        "cost": plan.cost,
        "iterations": plan.iterations,
        "wall_time": plan.wall_time,
        "v_t": [float(v) for v in plan.terminal.v_t],
        "tau_f": float(plan.terminal.tau_f),
        "tangential_speed": tangential_speed(plan, scenario),
        "penalties": {k: float(v) for k, v in plan.penalty_costs.items()},
        "report": report.to_dict(),
        "scenario": scenario.to_dict(),
    }
    (out / "plan.json").write_text(json.dumps(summary, indent=2))

    if not plan.converged:
        print(f"solver did not converge: {plan.status}", file=sys.stderr)
        return EXIT_SOLVER
    if not report.passed(args.slack):
        name, value = report.worst()
        print(f"validation failed: {name} violated by {value:.4f}", file=sys.stderr)
        return EXIT_VALIDATION
    print(
        f"converged in {plan.iterations} iterations, {plan.wall_time * 1e3:.1f} ms; "
        f"T = {plan.duration:.3f} s, wrote {out / 'plan.json'}"
    )
    return EXIT_OK


def cmd_sweep(args):
    try:
        scenario = load_scenario(args.scenario)
        values = [float(v) for v in args.values.split(",") if v.strip()]
        if not values:
            raise ScenarioParseError("empty --values list")
    except (ScenarioParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    rows = []
    all_ok = True
    for value in values:
        try:
            variant = apply_parameter(scenario, args.param, value)
            plan = optimizer.solve(variant)
            report = check(plan, variant)
            ok = plan.converged and report.passed(args.slack)
            rows.append(
                [
                    value,
                    tangential_speed(plan, variant),
                    plan.duration,
                    report.min_altitude,
                    plan.cost,
                    plan.wall_time,
                    plan.status if plan.converged else f"failed:{plan.status}",
                ]
            )
        except (ScenarioParseError, ValueError) as exc:
            ok = False
            rows.append([value, "", "", "", "", "", f"error:{exc}"])
        all_ok = all_ok and ok

    target = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(target)
        writer.writerow(["value", "v_t", "duration", "min_altitude", "cost", "wall_time", "status"])
        for row in rows:
            writer.writerow(
                [f"{x:.6f}" if isinstance(x, float) else x for x in row]
            )
    finally:
        if args.output:
            target.close()
    return EXIT_OK if all_ok else EXIT_SOLVER


def _timing_stats(samples):
    arr = np.asarray(samples)
    stats = {"n": len(samples), "mean": float(arr.mean()), "min": float(arr.min())}
    if len(samples) > 1:
        stats["median"] = float(np.median(arr))
        stats["p95"] = float(np.percentile(arr, 95))
    return stats


def cmd_bench(args):
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    cold_times, warm_times = [], []
    cold_iters = warm_iters = 0
    plan = None
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        plan = optimizer.solve(scenario)
        cold_times.append(time.perf_counter() - t0)
        cold_iters = plan.iterations
    if not plan.converged:
        print(f"solver did not converge: {plan.status}", file=sys.stderr)
        return EXIT_SOLVER

    advanced, warm_start = optimizer.advance(scenario, plan, args.advance)
    warm_plan = None
    for _ in range(args.repeats):
        t0 = time.perf_counter()
        warm_plan = optimizer.solve(advanced, start=warm_start)
        warm_times.append(time.perf_counter() - t0)
        warm_iters = warm_plan.iterations

    summary = {
        "cold": _timing_stats(cold_times),
        "warm": _timing_stats(warm_times),
        "iterations": {"cold": cold_iters, "warm": warm_iters},
        "converged": {"cold": plan.converged, "warm": warm_plan.converged},
    }
    print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_validate(args):
    try:
        scenario = load_scenario(args.scenario)
        with open(args.trace, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(TRACE_FIELDS) - set(reader.fieldnames or [])
            if missing:
                raise ScenarioParseError(f"trace missing columns: {sorted(missing)}")
            rows = [{k: float(r[k]) for k in TRACE_FIELDS} for r in reader]
        if not rows:
            raise ScenarioParseError("empty trace")
    except (OSError, ScenarioParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE

    limits = scenario.limits
    slack = args.slack
    worst = {"velocity": -np.inf, "thrust_high": -np.inf, "thrust_low": -np.inf,
             "body_rate": -np.inf, "ground": -np.inf, "collision": -np.inf}
    for r in rows:
        speed = float(np.hypot(np.hypot(r["vx"], r["vy"]), r["vz"]))
        worst["velocity"] = max(worst["velocity"], speed - limits.v_max)
        worst["thrust_high"] = max(worst["thrust_high"], r["tau"] - limits.tau_max)
        worst["thrust_low"] = max(worst["thrust_low"], limits.tau_min - r["tau"])
        worst["body_rate"] = max(worst["body_rate"], r["omega"] - limits.omega_max)
        worst["ground"] = max(worst["ground"], limits.z_min - r["pz"])
        if r["dist"] <= scenario.perch.d_bar:
            worst["collision"] = max(worst["collision"], r["F1"])

    failures = {k: v for k, v in worst.items() if v > slack}
    print(json.dumps({k: (None if not np.isfinite(v) else v) for k, v in worst.items()}, indent=2))
    if failures:
        print(f"validation failed: {failures}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="perchplan",
        description="Trajectory planning for quadrotor perching on inclined surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="solve one scenario and write trace + summary")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", default="out", help="output directory")
    p.add_argument("--samples", type=int, default=400, help="trace sample count")
    p.add_argument("--slack", type=float, default=0.05, help="validation slack")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("sweep", help="re-solve while varying one parameter")
    p.add_argument("scenario")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("-o", "--output", default=None, help="CSV output path (default stdout)")
    p.add_argument("--slack", type=float, default=0.05)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="cold/warm solve timing statistics")
    p.add_argument("scenario")
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--advance", type=float, default=0.1, help="replan time shift (s)")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="re-check an exported trace against limits")
    p.add_argument("trace")
    p.add_argument("scenario")
    p.add_argument("--slack", type=float, default=0.05)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

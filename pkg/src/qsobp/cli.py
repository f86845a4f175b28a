"""Command-line surface: construct, iterate, analyze, verify, sweep.

Machine-readable outputs: trajectories and sweeps go to CSV, summaries and
reports to JSON with sorted keys, so identical invocations produce
byte-identical files.  Exit codes: 0 = ran (including non-convergence),
2 = input error, 3 = I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from typing import Sequence

import numpy as np

from . import construction, dynamics, four_types, two_types
from .errors import QsobpError, SchemaError
from .simplex import PopulationState, Tolerance, make_state

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3

# Report-level agreement threshold between iterated and predicted limits.
DEFAULT_MATCH_EPS = 1e-6


# ---------------------------------------------------------------------------
# Small helpers.
# ---------------------------------------------------------------------------


def _tolerance(args) -> Tolerance:
    return Tolerance(abs_eps=args.abs_eps, iter_eps=args.iter_eps, max_iters=args.max_iters)


def _tolerance_doc(tol: Tolerance) -> dict:
    return {"abs_eps": tol.abs_eps, "iter_eps": tol.iter_eps, "max_iters": tol.max_iters}


def _parse_numbers(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise SchemaError("state", f"cannot parse {text!r} as comma-separated numbers") from None


def _parse_full_state(text: str) -> PopulationState:
    """Parse 'x1,..,xn;y1,..,ynu' into a population state."""
    parts = text.split(";")
    if len(parts) != 2:
        raise SchemaError("state", "expected 'females;males' with a single ';'")
    return make_state(_parse_numbers(parts[0]), _parse_numbers(parts[1]))


def _parse_point(text: str) -> tuple[float, float]:
    values = _parse_numbers(text)
    if len(values) != 2:
        raise SchemaError("state", f"expected two coordinates, got {len(values)}")
    return (values[0], values[1])


def _parse_range(text: str) -> list[float]:
    """A single value, or an inclusive range 'lo:hi:count'."""
    if ":" not in text:
        return [float(text)]
    pieces = text.split(":")
    if len(pieces) != 3:
        raise SchemaError("range", f"expected 'lo:hi:count', got {text!r}")
    lo, hi, count = float(pieces[0]), float(pieces[1]), int(pieces[2])
    if count < 0:
        raise SchemaError("range", "count must be >= 0")
    return [float(v) for v in np.linspace(lo, hi, count)]


def _write_json(doc: dict, path: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _state_doc(state: PopulationState) -> dict:
    return {"female": list(state.female.probs), "male": list(state.male.probs)}


# ---------------------------------------------------------------------------
# construct
# ---------------------------------------------------------------------------


def cmd_construct(args) -> int:
    try:
        doc = construction.load_json(args.input)
    except json.JSONDecodeError as exc:
        raise SchemaError("input", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    space, weights = construction.construction_from_json(doc)
    op = construction.build_operator(space, weights)
    connected = len(space.components) == 1
    identity = construction.is_identity(
        op, trials=20, tol=_tolerance(args), rng=np.random.default_rng(args.seed)
    )
    construction.dump_json(construction.operator_to_json(op), args.output)
    print(f"n={op.n} nu={op.nu}")
    print(f"connected: {str(connected).lower()}")
    print(f"identity: {str(identity).lower()}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# iterate
# ---------------------------------------------------------------------------


def _operator_from_args(args) -> tuple[construction.BisexualOperator, dict]:
    sources = [
        args.operator is not None,
        args.construction is not None,
        args.two_type,
        args.four_type,
    ]
    if sum(sources) != 1:
        raise SchemaError(
            "operator", "exactly one of --operator, --construction, --two-type, --four-type"
        )
    if args.operator is not None:
        doc = construction.load_json(args.operator)
        return construction.operator_from_json(doc), {"kind": "operator-json", "path": args.operator}
    if args.construction is not None:
        doc = construction.load_json(args.construction)
        space, weights = construction.construction_from_json(doc)
        return construction.build_operator(space, weights), {
            "kind": "construction-json",
            "path": args.construction,
        }
    if args.two_type:
        p = two_types.TwoTypeParams(a=args.a, b=args.b)
        return two_types.lift_operator(p), {"kind": "two-type", "a": p.a, "b": p.b}
    p4 = four_types.FourTypeParams(
        a=args.a, b=args.b, c=args.c, d=args.d, a0=args.a0, c0=args.c0
    )
    return four_types.lift_operator(p4), {
        "kind": "four-type",
        "a": p4.a,
        "b": p4.b,
        "c": p4.c,
        "d": p4.d,
    }


def _write_trajectory_csv(path: str, trajectory: dynamics.Trajectory, n: int, nu: int) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        header = ["step"] + [f"x_{i+1}" for i in range(n)] + [f"y_{k+1}" for k in range(nu)]
        writer.writerow(header)
        for step_index, state in zip(trajectory.state_steps, trajectory.states):
            writer.writerow([step_index, *state.coords()])


def cmd_iterate(args) -> int:
    op, meta = _operator_from_args(args)
    state = _parse_full_state(args.state)
    tol = _tolerance(args)
    trajectory = dynamics.iterate(op, state, tol)
    if args.trajectory is not None:
        _write_trajectory_csv(args.trajectory, trajectory, op.n, op.nu)
    drifts = {
        "female_total": dynamics.conserved_quantity_drift(
            trajectory, lambda s: sum(s.female.probs)
        ),
        "male_total": dynamics.conserved_quantity_drift(trajectory, lambda s: sum(s.male.probs)),
    }
    summary = {
        "source": meta,
        "initial": _state_doc(state),
        "converged": trajectory.converged,
        "steps": trajectory.steps_taken,
        "limit": _state_doc(trajectory.limit) if trajectory.limit is not None else None,
        "drifts": drifts,
        "seed": args.seed,
        "tolerance": _tolerance_doc(tol),
    }
    _write_json(summary, args.summary)
    return EXIT_OK


# ---------------------------------------------------------------------------
# fixed-points / classify / predict
# ---------------------------------------------------------------------------


def _two_type_params(args) -> two_types.TwoTypeParams:
    return two_types.TwoTypeParams(a=args.a, b=args.b)


def _four_type_params(args) -> four_types.FourTypeParams:
    return four_types.FourTypeParams(
        a=args.a, b=args.b, c=args.c, d=args.d, a0=args.a0, c0=args.c0
    )


def cmd_fixed_points(args) -> int:
    tol = _tolerance(args)
    if args.case == "two-type":
        p = _two_type_params(args)
        doc = {"case": "two-type", "segments": two_types.fixed_segments(p).describe()}
        if args.grid:
            points = dynamics.find_fixed_points_grid(
                two_types.step_fn(p), ((0.0, 1.0), (0.0, 1.0)), args.grid, tol
            )
            doc["grid_points"] = [list(pt) for pt in points]
    elif args.case == "four-type":
        p4 = _four_type_params(args)
        fixed = four_types.sub12_fixed_points(p4)
        step = four_types.sub12_step_fn(p4)
        residuals = [
            max(abs(n - o) for n, o in zip(step(pt), pt)) for pt in fixed.points
        ]
        doc = {
            "case": "four-type",
            "critical": fixed.critical,
            "points": [list(pt) for pt in fixed.points],
            "residuals": residuals,
        }
        if args.grid:
            found = dynamics.find_fixed_points_grid(
                step, ((0.0, p4.a0), (0.0, p4.c0)), args.grid, tol
            )
            doc["grid_points"] = [list(pt) for pt in found]
    else:
        cp = four_types.CriticalMapParams(a=args.a, a0=args.a0, c0=args.c0)
        fixed = four_types.critical_fixed_points(cp)
        doc = {
            "case": "critical-line",
            "point": fixed.point,
            "spurious": fixed.spurious,
            "discriminant": fixed.discriminant,
            "slope": four_types.critical_slope(cp),
        }
    _write_json(doc, args.output)
    return EXIT_OK


def cmd_classify(args) -> int:
    tol = _tolerance(args)
    if args.case == "two-type":
        p = _two_type_params(args)
        point = _parse_point(args.state)
        verdict = dynamics.classify_fixed_point_2d(two_types.jacobian_matrix(p, point), tol)
        doc = {
            "case": "two-type",
            "state": list(point),
            "kind": verdict.kind.value,
            "eigen_moduli": list(verdict.eigen_moduli),
        }
    else:
        p4 = _four_type_params(args)
        verdicts = four_types.classify_sub12_fixed_points(p4, tol)
        doc = {
            "case": "four-type",
            "points": [
                {
                    "point": list(pt),
                    "kind": v.kind.value,
                    "eigen_moduli": list(v.eigen_moduli),
                }
                for pt, v in sorted(verdicts.items())
            ],
        }
    _write_json(doc, args.output)
    return EXIT_OK


def cmd_predict(args) -> int:
    if args.case in ("two-type", "four-type") and args.state is None:
        raise SchemaError("state", f"--state is required for --case {args.case}")
    if args.case == "critical-line" and args.x0 is None:
        raise SchemaError("x0", "--x0 is required for --case critical-line")
    if args.case == "two-type":
        p = _two_type_params(args)
        if ";" in args.state:
            state = _parse_full_state(args.state)
            reduced = two_types.reduce_state(state)
        else:
            reduced = _parse_point(args.state)
        limit = two_types.predict_limit(p, reduced)
        doc = {
            "case": "two-type",
            "start": list(reduced),
            "limit": list(limit),
            "limit_full": _state_doc(two_types.lift_point(limit)),
            "class": "m1-extinct" if limit[1] == 0.0 and limit[0] < 1.0 else "f2-extinct",
        }
    elif args.case == "four-type":
        state = _parse_full_state(args.state)
        sums = four_types.slice_sums(state)
        p4 = four_types.FourTypeParams(
            a=args.a, b=args.b, c=args.c, d=args.d, a0=sums[0], c0=sums[2]
        )
        limit = four_types.predict_limit(p4, state)
        doc = {
            "case": "four-type",
            "start": _state_doc(state),
            "limit": _state_doc(limit),
            "class": four_types.survivor_label(p4),
        }
    else:
        cp = four_types.CriticalMapParams(a=args.a, a0=args.a0, c0=args.c0)
        doc = {
            "case": "critical-line",
            "x0": args.x0,
            "limit": four_types.predict_limit_critical(cp, args.x0),
            "class": "affine" if cp.is_affine else "quadratic",
        }
    _write_json(doc, args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def _verify_two_type_cell(a: float, b: float, starts, tol: Tolerance) -> float:
    p = two_types.TwoTypeParams(a=a, b=b)
    worst = 0.0
    for s0 in starts:
        predicted = two_types.predict_limit(p, s0)
        run = dynamics.iterate_map(two_types.step_fn(p), s0, tol)
        end = run.states[-1]
        worst = max(worst, max(abs(u - v) for u, v in zip(end, predicted)))
    return worst


def _verify_four_type_cell(p: four_types.FourTypeParams, starts, tol: Tolerance) -> float:
    worst = 0.0
    for s0 in starts:
        state = make_state(s0[:4], s0[4:])
        predicted = four_types.predict_limit(p, state)
        run = dynamics.iterate_map(four_types.full_step_fn(p), s0, tol)
        end = run.states[-1]
        worst = max(
            worst, max(abs(u - v) for u, v in zip(end, predicted.coords()))
        )
    return worst


def _verify_critical_cell(cp: four_types.CriticalMapParams, xs, tol: Tolerance) -> float:
    worst = 0.0
    step = four_types.critical_orbit_fn(cp)
    for x0 in xs:
        predicted = four_types.predict_limit_critical(cp, x0)
        run = dynamics.iterate_map(step, (x0,), tol)
        worst = max(worst, abs(run.states[-1][0] - predicted))
    return worst


def _portrait_rows(args, tol: Tolerance) -> list[tuple]:
    """Trajectory point streams behind the three phase-portrait regimes."""
    rows: list[tuple] = []
    short_tol = Tolerance(abs_eps=tol.abs_eps, iter_eps=tol.iter_eps, max_iters=20_000)
    fan = [(0.05, 0.9), (0.3, 0.9), (0.6, 0.9), (0.9, 0.85), (0.9, 0.1), (0.6, 0.05), (0.3, 0.08), (0.08, 0.3)]
    if args.case == "two-type":
        regimes = [("two-type", two_types.step_fn(two_types.TwoTypeParams(a=args.a, b=args.b)), 1.0, 1.0)]
    else:
        a0, c0 = args.a0, args.c0
        regimes = []
        for name, (ra, rc) in (("below", (0.3, 0.3)), ("above", (0.7, 0.7)), ("critical", (0.4, 0.6))):
            p = four_types.FourTypeParams(a=ra, b=args.b, c=rc, d=args.d, a0=a0, c0=c0)
            regimes.append((name, four_types.sub12_step_fn(p), a0, c0))
    for regime, step, w, h in regimes:
        for t, (u, v) in enumerate(fan):
            run = dynamics.iterate_map(step, (u * w, v * h), short_tol, store_cap=400)
            for step_index, (x, y) in zip(run.state_steps, run.states):
                rows.append((regime, t, step_index, x, y))
    return rows


def cmd_verify(args) -> int:
    tol = _tolerance(args)
    rng = np.random.default_rng(args.seed)
    grid_values = np.linspace(0.05, 0.95, args.grid)
    cells = []
    if args.case == "two-type":
        for a in grid_values:
            for b in grid_values:
                starts = [
                    (rng.uniform(0.02, 0.98), rng.uniform(0.02, 0.98))
                    for _ in range(args.starts)
                ]
                mismatch = _verify_two_type_cell(float(a), float(b), starts, tol)
                cells.append(
                    {
                        "a": float(a),
                        "b": float(b),
                        "kind": "closed-form",
                        "max_mismatch": mismatch,
                        "pass": mismatch <= args.match_eps,
                    }
                )
    else:
        if abs(args.b + args.d - 1.0) <= four_types.CRITICAL_EPS:
            raise SchemaError("b,d", "b+d sits on the critical line; pick another pair")
        a0, c0 = args.a0, args.c0
        for a in grid_values:
            for c in grid_values:
                if abs(a + c - 1.0) <= four_types.CRITICAL_EPS:
                    cp = four_types.CriticalMapParams(a=float(a), a0=a0, c0=c0)
                    xs = [rng.uniform(0.02, 0.98) for _ in range(args.starts)]
                    mismatch = _verify_critical_cell(cp, xs, tol)
                    kind = "critical-line"
                else:
                    p = four_types.FourTypeParams(
                        a=float(a), b=args.b, c=float(c), d=args.d, a0=a0, c0=c0
                    )
                    starts = []
                    for _ in range(args.starts):
                        x1 = a0 * rng.uniform(0.05, 0.95)
                        x3 = (1.0 - a0) * rng.uniform(0.05, 0.95)
                        y1 = c0 * rng.uniform(0.05, 0.95)
                        y3 = (1.0 - c0) * rng.uniform(0.05, 0.95)
                        starts.append(
                            (x1, a0 - x1, x3, 1.0 - a0 - x3, y1, c0 - y1, y3, 1.0 - c0 - y3)
                        )
                    mismatch = _verify_four_type_cell(p, starts, tol)
                    kind = "closed-form"
                cells.append(
                    {
                        "a": float(a),
                        "c": float(c),
                        "kind": kind,
                        "max_mismatch": mismatch,
                        "pass": mismatch <= args.match_eps,
                    }
                )
    n_pass = sum(1 for cell in cells if cell["pass"])
    report = {
        "case": args.case,
        "grid": args.grid,
        "starts": args.starts,
        "seed": args.seed,
        "match_eps": args.match_eps,
        "tolerance": _tolerance_doc(tol),
        "cells": cells,
        "n_cells": len(cells),
        "n_pass": n_pass,
        "max_mismatch": max((cell["max_mismatch"] for cell in cells), default=0.0),
        "pass": n_pass == len(cells),
    }
    _write_json(report, args.report)
    if args.portrait is not None:
        with open(args.portrait, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["regime", "traj", "step", "x", "y"])
            for row in _portrait_rows(args, tol):
                writer.writerow(row)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _sweep_states_two_type(args) -> list[tuple[float, float]]:
    if args.state.startswith("grid:"):
        count = int(args.state.split(":", 1)[1])
        values = np.linspace(0.1, 0.9, count)
        return [(float(u), float(v)) for u in values for v in values]
    return [_parse_point(args.state)]


def _sweep_rows_two_type(args, tol: Tolerance):
    header = ["a", "b", "x0", "y0", "status", "limit_x", "limit_y", "class"]
    rows = []
    for a in _parse_range(args.a):
        for b in _parse_range(args.b):
            for s0 in _sweep_states_two_type(args):
                try:
                    p = two_types.TwoTypeParams(a=a, b=b)
                    limit = two_types.predict_limit(p, s0)
                    label = "m1-extinct" if limit[1] == 0.0 and limit[0] < 1.0 else "f2-extinct"
                    rows.append([a, b, s0[0], s0[1], "ok", limit[0], limit[1], label])
                except QsobpError as exc:
                    rows.append([a, b, s0[0], s0[1], type(exc).__name__, "", "", ""])
    return header, rows


def _sweep_rows_four_type(args, tol: Tolerance):
    state = _parse_full_state(args.state)
    sums = four_types.slice_sums(state)
    coord_names = [f"x{i+1}" for i in range(4)] + [f"y{k+1}" for k in range(4)]
    header = (
        ["a", "b", "c", "d", "a0", "c0"]
        + [f"s0_{name}" for name in coord_names]
        + ["status"]
        + [f"limit_{name}" for name in coord_names]
        + ["class"]
    )
    rows = []
    for a in _parse_range(args.a):
        for b in _parse_range(args.b):
            for c in _parse_range(args.c):
                for d in _parse_range(args.d):
                    prefix = [a, b, c, d, sums[0], sums[2], *state.coords()]
                    try:
                        p = four_types.FourTypeParams(
                            a=a, b=b, c=c, d=d, a0=sums[0], c0=sums[2]
                        )
                    except ValueError as exc:
                        rows.append(prefix + ["ValueError", *[""] * 8, ""])
                        continue
                    try:
                        limit = four_types.predict_limit(p, state)
                        rows.append(
                            prefix
                            + ["ok", *limit.coords(), four_types.survivor_label(p)]
                        )
                    except QsobpError as exc:
                        run = dynamics.iterate_map(
                            four_types.full_step_fn(p), state.coords(), tol
                        )
                        status = (
                            "critical-line"
                            if isinstance(exc, four_types.CriticalLineError)
                            else "fixed-start"
                        )
                        rows.append(prefix + [status, *run.states[-1], ""])
    return header, rows


def _sweep_rows_critical(args, tol: Tolerance):
    header = ["a", "a0", "c0", "x0", "status", "limit", "class"]
    if args.x0.startswith("grid:"):
        xs = [float(v) for v in np.linspace(0.05, 0.95, int(args.x0.split(":", 1)[1]))]
    else:
        xs = [float(args.x0)]
    rows = []
    for a in _parse_range(args.a):
        for a0 in _parse_range(args.a0):
            for c0 in _parse_range(args.c0):
                for x0 in xs:
                    try:
                        cp = four_types.CriticalMapParams(a=a, a0=a0, c0=c0)
                        limit = four_types.predict_limit_critical(cp, x0)
                        label = "affine" if cp.is_affine else "quadratic"
                        rows.append([a, a0, c0, x0, "ok", limit, label])
                    except QsobpError as exc:
                        rows.append([a, a0, c0, x0, type(exc).__name__, "", ""])
    return header, rows


def cmd_sweep(args) -> int:
    tol = _tolerance(args)
    if args.case == "two-type":
        header, rows = _sweep_rows_two_type(args, tol)
    elif args.case == "four-type":
        header, rows = _sweep_rows_four_type(args, tol)
    else:
        header, rows = _sweep_rows_critical(args, tol)
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser assembly.
# ---------------------------------------------------------------------------


def _add_tolerance_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--abs-eps", type=float, default=1e-9, help="comparison epsilon")
    parser.add_argument("--iter-eps", type=float, default=1e-12, help="iteration stop threshold")
    parser.add_argument("--max-iters", type=int, default=10**6, help="iteration budget")
    parser.add_argument("--seed", type=int, default=42, help="seed for any random draws")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qsobp",
        description="Bisexual-population quadratic stochastic operators: "
        "construction, simulation, fixed-point analysis and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_construct = sub.add_parser("construct", help="build an operator from a construction JSON")
    p_construct.add_argument("--input", required=True, help="construction JSON path")
    p_construct.add_argument("--output", required=True, help="operator JSON path")
    _add_tolerance_flags(p_construct)
    p_construct.set_defaults(func=cmd_construct)

    p_iterate = sub.add_parser("iterate", help="iterate an operator from a state")
    p_iterate.add_argument("--operator", default=None, help="operator JSON path")
    p_iterate.add_argument("--construction", default=None, help="construction JSON path")
    p_iterate.add_argument("--two-type", action="store_true", help="inline two-type params")
    p_iterate.add_argument("--four-type", action="store_true", help="inline four-type params")
    for name, default in (("a", 0.5), ("b", 0.5), ("c", 0.5), ("d", 0.5), ("a0", 0.5), ("c0", 0.5)):
        p_iterate.add_argument(f"--{name}", type=float, default=default)
    p_iterate.add_argument("--state", required=True, help="'x1,..;y1,..'")
    p_iterate.add_argument("--trajectory", default=None, help="trajectory CSV path")
    p_iterate.add_argument("--summary", default=None, help="summary JSON path (default stdout)")
    _add_tolerance_flags(p_iterate)
    p_iterate.set_defaults(func=cmd_iterate)

    case_choices = ["two-type", "four-type", "critical-line"]

    p_fixed = sub.add_parser("fixed-points", help="fixed points of a case map")
    p_fixed.add_argument("--case", choices=case_choices, required=True)
    for name, default in (("a", 0.3), ("b", 0.3), ("c", 0.3), ("d", 0.3), ("a0", 0.5), ("c0", 0.5)):
        p_fixed.add_argument(f"--{name}", type=float, default=default)
    p_fixed.add_argument("--grid", type=int, default=0, help="grid cross-check resolution")
    p_fixed.add_argument("--output", default=None)
    _add_tolerance_flags(p_fixed)
    p_fixed.set_defaults(func=cmd_fixed_points)

    p_classify = sub.add_parser("classify", help="stability classes of fixed points")
    p_classify.add_argument("--case", choices=["two-type", "four-type"], required=True)
    for name, default in (("a", 0.3), ("b", 0.3), ("c", 0.3), ("d", 0.3), ("a0", 0.5), ("c0", 0.5)):
        p_classify.add_argument(f"--{name}", type=float, default=default)
    p_classify.add_argument("--state", default="0,0", help="two-type: point to classify at")
    p_classify.add_argument("--output", default=None)
    _add_tolerance_flags(p_classify)
    p_classify.set_defaults(func=cmd_classify)

    p_predict = sub.add_parser("predict", help="closed-form trajectory limit")
    p_predict.add_argument("--case", choices=case_choices, required=True)
    for name, default in (("a", 0.3), ("b", 0.3), ("c", 0.3), ("d", 0.3), ("a0", 0.5), ("c0", 0.5)):
        p_predict.add_argument(f"--{name}", type=float, default=default)
    p_predict.add_argument("--state", default=None, help="initial state")
    p_predict.add_argument("--x0", type=float, default=None, help="critical-line start")
    p_predict.add_argument("--output", default=None)
    _add_tolerance_flags(p_predict)
    p_predict.set_defaults(func=cmd_predict)

    p_verify = sub.add_parser("verify", help="pair closed-form limits with brute-force iteration")
    p_verify.add_argument("--case", choices=["two-type", "four-type"], required=True)
    p_verify.add_argument("--grid", type=int, default=10)
    p_verify.add_argument("--starts", type=int, default=3, help="random starts per cell")
    p_verify.add_argument("--b", type=float, default=0.3)
    p_verify.add_argument("--d", type=float, default=0.4)
    p_verify.add_argument("--a0", type=float, default=0.5)
    p_verify.add_argument("--c0", type=float, default=0.5)
    p_verify.add_argument("--a", type=float, default=0.3, help="portrait params for two-type")
    p_verify.add_argument("--match-eps", type=float, default=DEFAULT_MATCH_EPS)
    p_verify.add_argument("--report", required=True, help="report JSON path")
    p_verify.add_argument("--portrait", default=None, help="phase-portrait CSV path")
    _add_tolerance_flags(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="batch closed-form predictions over parameter grids")
    p_sweep.add_argument("--case", choices=case_choices, required=True)
    for name in ("a", "b", "c", "d", "a0", "c0"):
        p_sweep.add_argument(f"--{name}", type=str, default="0.3", help="value or lo:hi:count")
    p_sweep.add_argument("--state", default="0.2,0.3", help="start state or grid:N (two-type)")
    p_sweep.add_argument("--x0", default="0.2", help="critical-line start or grid:N")
    p_sweep.add_argument("--output", required=True, help="sweep CSV path")
    _add_tolerance_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QsobpError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success, 1 a verification failed, 2 bad configuration,
3 domain, convexity or numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import circuit as circ
from . import dynamics as dyn
from . import lattice as lat
from .convex import QuadraticForm, potential_from_spec, separable
from .errors import (
    ConvergenceError,
    ConvexityError,
    DomainError,
    GridError,
    HypothesisError,
    ParameterError,
    QuadratureError,
)
from .geometry import geometry_report
from .scenario import Scenario, load_scenario
from .serialize import (
    read_trajectory,
    series_columns,
    trajectory_columns,
    trajectory_table,
    write_csv,
    write_json,
    write_trajectory,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN = 0, 1, 2, 3

log = logging.getLogger("htoda")


class ConfigError(Exception):
    """Bad command-line input that argparse cannot catch."""


# ---------------------------------------------------------------------------
# shared helpers


def _load(args) -> Scenario:
    if not args.scenario:
        raise ConfigError("--scenario is required")
    sc = load_scenario(args.scenario)
    if args.dt_override is not None:
        sc = sc.with_dt(args.dt_override)
    if args.tolerance_override is not None:
        sc = sc.with_tolerance(args.tolerance_override)
    return sc


def _out(args, name: str) -> Path:
    return Path(args.out) / name


def run_checks(sc: Scenario, traj: dyn.Trajectory, h: dyn.SeparableHamiltonian) -> list[dyn.VerificationReport]:
    hK = sc.overrides.get("hK")
    reports = []
    for check in sc.verifications:
        tol = sc.tolerances.get(check)
        if check == "dual_first_order":
            r = dyn.verify_dual_first_order(traj, h, tol)
        elif check == "thm_2_1":
            r = dyn.verify_thm_2_1(traj, h, hK, tol)
        elif check == "thm_2_2":
            r = dyn.verify_thm_2_2(traj, h, hK, tol)
        elif check in ("prop_2_3", "prop_2_4"):
            r = dyn.verify_alpha_forms(traj, h, hK, tol, theorem_id=check)
        elif check == "prop_2_5":
            r = dyn.verify_vanishing_potential(traj, h, tol)
        elif check == "j_function":
            r = dyn.verify_j_function(traj, h, tolerance=tol)
        elif check == "toda_dual":
            r = lat.verify_dual_lattice(traj, sc.lattice(), tol)
        elif check == "tau":
            r = lat.tau_diagnostic(traj, sc.lattice(), tol)
        elif check == "lc_3_1":
            r = circ.verify_lc_thm_3_1(traj, sc.circuit(), tol)
        elif check == "lc_3_2":
            r = circ.verify_lc_thm_3_2(traj, sc.circuit(), tol)
        else:  # pragma: no cover - rejected by Scenario validation
            raise ParameterError(f"unknown check {check!r}")
        reports.append(r)
    return reports


def simulate(sc: Scenario) -> tuple[dyn.SeparableHamiltonian, dyn.Trajectory]:
    h = sc.hamiltonian()
    return h, dyn.integrate(h, sc.q0, sc.p0, sc.dt, sc.steps)


def _parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _potential_arg(args) -> dict:
    if args.potential:
        text = args.potential
        if os.path.exists(text):
            text = Path(text).read_text(encoding="utf-8")
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--potential is not valid JSON: {exc.msg}") from None
    elif args.scenario:
        sc = load_scenario(args.scenario)
        spec = sc.system.get("potential") if sc.kind == "lattice" else None
        if spec is None:
            raise ConfigError("scenario has no system.potential; pass --potential")
    else:
        raise ConfigError("--potential or --scenario is required")
    if not isinstance(spec, dict):
        raise ConfigError("potential spec must be a JSON object")
    return spec


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    sc = _load(args)
    h, traj = simulate(sc)
    name = sc.outputs.get("trajectory", f"{sc.name}_trajectory.{args.format}")
    path = _out(args, name)
    if args.format == "json":
        cols = trajectory_columns(traj.n)
        write_json(path, {"columns": cols, "dt": sc.dt, "data": trajectory_table(traj).tolist()})
    else:
        write_trajectory(path, traj)
    if sc.kind == "circuit":
        cpath = _out(args, sc.outputs.get("circuit", f"{sc.name}_circuit.csv"))
        write_csv(cpath, ["t", "Q", "Phi", "V", "I", "energy"], circ.circuit_table(traj, sc.circuit()))
    print(f"wrote {path} ({traj.steps + 1} rows, energy drift {dyn.energy_drift(traj):.3e})")
    return EXIT_OK


def cmd_verify(args) -> int:
    sc = _load(args)
    if not sc.verifications:
        raise ConfigError("scenario lists no verifications")
    if args.trajectory:
        h = sc.hamiltonian()
        traj = read_trajectory(args.trajectory, h, sc.dt)
    else:
        h, traj = simulate(sc)
    reports = run_checks(sc, traj, h)
    path = _out(args, sc.outputs.get("reports", f"{sc.name}_reports.json"))
    write_json(path, [r.to_dict() for r in reports])
    if args.format == "csv":
        for r in reports:
            write_csv(
                _out(args, f"{sc.name}_{r.theorem_id}_residuals.csv"),
                series_columns(r.series.shape[1]),
                np.column_stack([r.t, r.series]),
            )
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.theorem_id}: max residual {r.max_residual:.3e} (tolerance {r.tolerance:.3e})")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_conjugate(args) -> int:
    pair = potential_from_spec(_potential_arg(args))
    grid = _parse_floats(args.grid, "--grid")
    if len(grid) != 3 or int(grid[2]) < 1:
        raise ConfigError("--grid must be lo,hi,count")
    x = np.linspace(grid[0], grid[1], int(grid[2]))
    f, g = pair.primal, pair.dual
    fx, dfx = f(x), f.d1(x)
    y = dfx
    gy, dgy = g(y), g.d1(y)
    cols = ["x", "f", "df", "y", "fstar", "dfstar", "fenchel_gap"]
    data = np.column_stack([x, fx, dfx, y, gy, dgy, fx + gy - x * y])
    path = _out(args, f"conjugate_{pair.kind}.{args.format}")
    if args.format == "json":
        write_json(path, {"columns": cols, "data": data.tolist()})
    else:
        write_csv(path, cols, data)
    print(f"wrote {path} ({x.size} rows, max |fenchel_gap| {np.max(np.abs(data[:, -1])):.3e})")
    return EXIT_OK


def cmd_geometry(args) -> int:
    spec = _potential_arg(args)
    alphas = _parse_floats(args.alphas, "--alphas")
    if spec.get("kind") == "chain":
        p = spec.get("params", {})
        M = lat.chain_matrix(int(p.get("N", 3)), float(p.get("m", 1.0)), str(p.get("boundary", "fixed")))
        energy = QuadraticForm(M, label="chain K")
        point = _parse_floats(args.point, "--point") if args.point else [0.0] * M.shape[0]
    else:
        pair = potential_from_spec(spec)
        if args.energy == "dual":
            pair = pair.swapped()
        point = _parse_floats(args.point or "0", "--point")
        energy = separable(pair, len(point))
    report = geometry_report(energy, point, alphas, "dual" if args.energy == "dual" else "primal")
    path = _out(args, f"geometry_{spec.get('kind')}.json")
    write_json(path, report.to_json())
    print(json.dumps(report.to_json()))
    return EXIT_OK


def cmd_spectrum(args) -> int:
    ch = lat.chain_hessian(args.N, args.m, args.boundary)
    out = {"N": ch.N, "m": ch.m, "boundary": ch.boundary, "eigenvalues": ch.eigenvalues.tolist(),
           "positive_definite": ch.positive_definite}
    path = _out(args, f"spectrum_{args.boundary}_N{args.N}.{args.format}")
    if args.format == "json":
        write_json(path, out)
    else:
        write_csv(path, ["k", "eigenvalue"], np.column_stack([np.arange(1, ch.N + 1), ch.eigenvalues]))
    print(json.dumps(out))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario JSON file")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--dt-override", type=float, help="replace dt, keeping the duration fixed")
    common.add_argument("--tolerance-override", type=float, help="use this tolerance for every check")

    parser = argparse.ArgumentParser(prog="htoda", description="Hessian-geometric natural Hamiltonian toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="integrate a scenario and write the trajectory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common], help="run the scenario's residual checks")
    p.add_argument("--trajectory", help="verify a previously written trajectory CSV instead of integrating")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("conjugate", parents=[common], help="tabulate a potential and its conjugate")
    p.add_argument("--potential", help='JSON like {"kind": "toda", "params": {"A": 1, "B": 1}} or a path')
    p.add_argument("--grid", default="-1,1,21", help="lo,hi,count of primal points")
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("geometry", parents=[common], help="metric, cubic form and alpha-connections at a point")
    p.add_argument("--potential", help='potential JSON, or {"kind": "chain", "params": {"N", "m", "boundary"}}')
    p.add_argument("--point", help="comma-separated coordinates")
    p.add_argument("--alphas", default="-1,0,1")
    p.add_argument("--energy", choices=("primal", "dual"), default="primal")
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues of the chain kinetic Hessian")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--boundary", choices=lat.BOUNDARIES, default="fixed")
    p.set_defaults(func=cmd_spectrum)
    return parser


def _configure_logging():
    level = os.environ.get("HTODA_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, ParameterError, HypothesisError, GridError) as exc:
        print(f"config error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ConvexityError, ConvergenceError, QuadratureError) as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())

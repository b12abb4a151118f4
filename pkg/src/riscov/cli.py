"""``riscov`` command line.

Exit codes: 0 ok, 2 scenario/usage error, 3 RIS distance violates the
direct-link condition, 4 solver failure, 5 Monte Carlo disagrees with the
analytic area.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import sys
import warnings
from importlib.metadata import PackageNotFoundError, version as _pkg_version
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .config import Scenario, ScenarioError, load_scenario
from .coverage import CellModel, CoverageError, InfeasibleError, feasibility_limit
from .montecarlo import RNG_ALGORITHM, mc_coverage_area
from .placement import (
    PlacementError,
    area_at,
    baseline_bss,
    baseline_random,
    clip_bounds,
    cma,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INFEASIBLE = 3
EXIT_SOLVER = 4
EXIT_MISMATCH = 5

MODE_NAMES = {"common": "common_pathloss", "exact": "exact_elementwise"}
SWEEP_AXES = ("orientation", "distance", "elements", "power")


def tool_version() -> str:
    try:
        return _pkg_version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


def _angle_out(x: float, degrees: bool) -> float:
    return math.degrees(x) if degrees else x


def _header(command: str, scenario: Scenario, args: argparse.Namespace) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "riscov",
        "tool_version": tool_version(),
        "command": command,
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "angle_unit": "deg" if args.degrees else "rad",
        "config": scenario.echo(),
    }


def _write_json(payload: dict[str, Any], path: Path | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=False, allow_nan=False) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def _write_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], path: Path | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else (repr(float(v)) if isinstance(v, float) else v) for v in row])
    if path is None:
        sys.stdout.write(buf.getvalue())
    else:
        path.write_text(buf.getvalue(), encoding="utf-8")


def _summary_path(out: Path | None) -> Path | None:
    return None if out is None else out.with_suffix(".json")


def cmd_coverage(scenario: Scenario, args: argparse.Namespace) -> int:
    boundary = CellModel(scenario.radio, scenario.panel, scenario.site, scenario.solver).profile()
    deg = args.degrees
    rows = [
        (_angle_out(float(p), deg), float(c), b) for p, c, b in zip(boundary.phi, boundary.c, boundary.branch)
    ]
    _write_csv(("phi_deg" if deg else "phi_rad", "c_m", "branch"), rows, args.out)
    summary = _header("coverage", scenario, args)
    summary.update(
        phi_l=_angle_out(boundary.phi_l, deg),
        phi_u=_angle_out(boundary.phi_u, deg),
        area_m2=boundary.area,
        n_phi=len(rows),
        diagnostics=list(boundary.diagnostics),
    )
    if args.out is None:
        sys.stderr.write(json.dumps(summary, indent=2) + "\n")
    else:
        _write_json(summary, _summary_path(args.out))
    return EXIT_OK


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` for explicit nodes or ``start:stop:num`` for a linspace."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return np.linspace(float(start), float(stop), int(num)).tolist()
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ScenarioError(f"bad grid {text!r}: {exc}") from exc


def _sweep_node(scenario: Scenario, axis: str, x: float) -> Scenario:
    if axis == "orientation":
        return scenario.with_values(site__psi=x)
    if axis == "distance":
        return scenario.with_values(site__D_h=x)
    if axis == "elements":
        if int(x) != x:
            raise ScenarioError(f"element count {x!r} is not an integer")
        return scenario.with_values(panel__M=int(x), panel__N=int(x))
    return scenario.with_values(radio__power_w=x)


def cmd_sweep(scenario: Scenario, args: argparse.Namespace) -> int:
    axis = args.axis
    grid = parse_grid(args.grid)
    if not grid:
        raise ScenarioError("empty sweep grid")
    if axis == "orientation" and args.degrees:
        grid = [math.radians(x) for x in grid]
    nodes = [_sweep_node(scenario, axis, x) for x in grid]

    def evaluate(node: Scenario) -> float | None:
        try:
            return CellModel(node.radio, node.panel, node.site, node.solver).area()
        except InfeasibleError:
            return None

    if args.threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            areas = list(pool.map(evaluate, nodes))
    else:
        areas = [evaluate(n) for n in nodes]

    xs_out = [_angle_out(x, args.degrees) if axis == "orientation" else x for x in grid]
    _write_csv(("x", "area_m2"), list(zip(xs_out, areas)), args.out)
    feasible = [(x, a) for x, a in zip(xs_out, areas) if a is not None]
    n_bad = len(areas) - len(feasible)
    if n_bad:
        warnings.warn(f"{n_bad} sweep node(s) violate the direct-link condition", stacklevel=1)
    summary = _header("sweep", scenario, args)
    summary.update(
        axis=axis,
        n_nodes=len(grid),
        n_infeasible=n_bad,
        argmax_x=max(feasible, key=lambda t: t[1])[0] if feasible else None,
        max_area_m2=max(a for _, a in feasible) if feasible else None,
    )
    if args.out is None:
        sys.stderr.write(json.dumps(summary, indent=2) + "\n")
    else:
        _write_json(summary, _summary_path(args.out))
    return EXIT_OK


def cmd_optimize(scenario: Scenario, args: argparse.Namespace) -> int:
    radio, panel, site, solver = scenario.radio, scenario.panel, scenario.site, scenario.solver
    bounds = clip_bounds(radio, site, tuple(args.bounds) if args.bounds else None)
    sol = cma(radio, panel, site, solver, bounds, threads=args.threads)

    rand_D, rand_psi = baseline_random(bounds, seed=args.seed)
    bss_D, bss_psi = baseline_bss(radio, panel)
    try:
        bss_area: float | None = area_at(radio, panel, site, bss_D, bss_psi, solver)
    except InfeasibleError:
        bss_area = None
    deg = args.degrees
    payload = _header("optimize", scenario, args)
    payload.update(
        D_h_star=sol.D_h_star,
        psi_star=_angle_out(sol.psi_star, deg),
        area_star=sol.area_star,
        evaluations=sol.evaluations,
        bracket=list(sol.bracket),
        bounds=list(bounds),
        feasibility_limit_m=feasibility_limit(radio, site),
        baselines={
            "random": {
                "seed": args.seed,
                "rng": RNG_ALGORITHM,
                "D_h": rand_D,
                "psi": _angle_out(rand_psi, deg),
                "area_m2": area_at(radio, panel, site, rand_D, rand_psi, solver),
            },
            "bss": {"D_h": bss_D, "psi": _angle_out(bss_psi, deg), "area_m2": bss_area},
        },
    )
    _write_json(payload, args.out)
    return EXIT_OK


def cmd_verify(scenario: Scenario, args: argparse.Namespace) -> int:
    radio, panel, site, solver = scenario.radio, scenario.panel, scenario.site, scenario.solver
    analytic = CellModel(radio, panel, site, solver).area()
    est = mc_coverage_area(
        radio,
        panel,
        site,
        solver,
        n_samples=args.n_samples,
        seed=args.seed,
        mode=MODE_NAMES[args.mode],
        threads=args.threads,
    )
    gap = (est.area - analytic) / analytic
    tolerance = max(0.02, 3.0 * est.stderr / analytic)
    passed = abs(gap) <= tolerance
    payload = _header("verify", scenario, args)
    payload.update(
        analytic_area_m2=analytic,
        mc_area_m2=est.area,
        stderr_m2=est.stderr,
        relative_gap=gap,
        tolerance=tolerance,
        passed=passed,
        n_samples=est.n_samples,
        n_inside=est.n_inside,
        seed=est.seed,
        rng=est.rng,
        mode=est.mode,
        sampling_radius_m=est.radius,
        sampling_region_m2=est.region_area,
    )
    _write_json(payload, args.out)
    return EXIT_OK if passed else EXIT_MISMATCH


COMMANDS = {
    "coverage": cmd_coverage,
    "sweep": cmd_sweep,
    "optimize": cmd_optimize,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, help="TOML scenario file (dotted radio./panel./site./solver. keys)")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one scenario key, e.g. radio.power_w=1.5 (repeatable)",
    )
    common.add_argument("--out", type=Path, help="output path; the summary JSON of CSV commands goes next to it")
    common.add_argument("--seed", type=int, default=0, help="seed for every randomized step (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads; results do not depend on it")
    common.add_argument("--degrees", action="store_true", help="angles in degrees on input and output")
    common.add_argument("--mode", choices=sorted(MODE_NAMES), default="exact", help="channel sum used by verify")

    parser = argparse.ArgumentParser(
        prog="riscov",
        description=(
            "Coverage area of an RIS-assisted cell and RIS placement optimization. "
            "UE positions at the BS foot are evaluated at a 0.1 m horizontal floor "
            "when the BS and UE heights coincide."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("coverage", parents=[common], help="boundary profile c(phi) and area")
    sweep = sub.add_parser("sweep", parents=[common], help="area along one parameter axis")
    sweep.add_argument("--axis", choices=SWEEP_AXES, required=True)
    sweep.add_argument("--grid", required=True, help="a,b,c or start:stop:num")
    opt = sub.add_parser("optimize", parents=[common], help="RIS placement (orientation + distance) with baselines")
    opt.add_argument("--bounds", type=float, nargs=2, metavar=("LO", "HI"), help="search interval for D_h in m")
    ver = sub.add_parser("verify", parents=[common], help="Monte Carlo check of the analytic area")
    ver.add_argument("--n-samples", type=int, default=100_000)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    if args.command == "verify" and args.n_samples < 1000:
        parser.error("--n-samples must be >= 1000")
    try:
        scenario = load_scenario(args.scenario, args.overrides, degrees=args.degrees)
        return COMMANDS[args.command](scenario, args)
    except ScenarioError as exc:
        print(f"riscov: scenario error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InfeasibleError, PlacementError) as exc:
        print(f"riscov: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (CoverageError, ValueError) as exc:
        print(f"riscov: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``hicontrast {run,mesh,expand,check} SCENARIO``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .basis import build_basis
from .checks import run_checks
from .errors import ConfigError, DegenerateGeometry, HiContrastError, InclusionOverlap, InvalidTopology, ParseError
from .expansion import save_expansion
from .experiments import build_expansion, build_mesh, emit_csv, emit_summary, load_scenario, run_study
from .fem import Subdomains
from .mesh import save as save_mesh
from .mixed import MixedScenario, mixed_basis

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_INVARIANT = 0, 1, 2, 3
_CONFIG_ERRORS = (ConfigError, InclusionOverlap, DegenerateGeometry, InvalidTopology, ParseError, NotImplementedError, ValueError, OSError)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", type=Path, help="scenario file (key = value)")
    common.add_argument("--out", type=Path, help="output directory (default: output.dir of the scenario)")
    common.add_argument("--order", type=int, help="highest expansion index I")
    common.add_argument("--h", type=float, help="target mesh size")
    common.add_argument("--threads", type=int, default=1, help="worker threads for direct solves")
    common.add_argument("--tol", type=float, help="solver tolerance")
    common.add_argument("--no-timing", action="store_true", help="write runtime_ms as 0 for byte-reproducible reports")
    parser = argparse.ArgumentParser(prog="hicontrast", description="Contrast-asymptotic expansions for binary high-contrast media.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="full study: expansion vs direct solves, CSV and summary")
    sub.add_parser("mesh", parents=[common], help="write the mesh only")
    sub.add_parser("expand", parents=[common], help="compute and serialize the expansion terms")
    sub.add_parser("check", parents=[common], help="run the invariant suite")
    return parser


def _run(args, scenario, out: Path) -> int:
    study = run_study(scenario, threads=args.threads, timing=not args.no_timing)
    csv_path = emit_csv(study.rows, out / "results.csv")
    emit_summary(study.summary, out / "summary.json")
    s = study.summary
    print(f"{len(study.rows)} rows -> {csv_path}; C_hat = {s['C_hat']:.6g}; floor = {s['floor']:.3e}")
    for failure in s["failures"]:
        print(f"direct solve failed at {scenario.contrast_name} = {failure['contrast']:g}: {failure['error']}", file=sys.stderr)
    return EXIT_SOLVER if s["failures"] else EXIT_OK


def _expand(scenario, out: Path) -> int:
    mesh = build_mesh(scenario)
    sub = Subdomains(mesh, method=scenario.method, tol=scenario.tol)
    expansion = build_expansion(scenario, mesh, sub)
    path = save_expansion(expansion, out / "expansion")
    if scenario.mode != "low":
        basis = build_basis(sub) if scenario.mode == "high" else mixed_basis(MixedScenario(mesh, scenario.roles, scenario.data, 0), sub)
        (out / "a_geom.csv").write_text(basis.to_csv())
    print(f"terms {expansion.first_index}..{expansion.order} -> {path}")
    return EXIT_OK


def _check(scenario) -> int:
    mesh = build_mesh(scenario)
    sub = Subdomains(mesh, method=scenario.method, tol=scenario.tol)
    expansion = build_expansion(scenario, mesh, sub)
    basis = build_basis(sub) if scenario.mode == "high" else None
    results = run_checks(expansion, sub, basis, scenario.roles)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads", "must be >= 1")
        scenario = load_scenario(args.scenario).with_overrides(order=args.order, h=args.h, tol=args.tol)
        out = args.out if args.out is not None else Path(scenario.output_dir)
        if args.command == "mesh":
            path = out / "mesh.txt"
            out.mkdir(parents=True, exist_ok=True)
            mesh = build_mesh(scenario)
            path.write_text(save_mesh(mesh))
            print(f"{mesh.n_vertices} vertices, {len(mesh.triangles)} triangles -> {path}")
            return EXIT_OK
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            return _run(args, scenario, out)
        if args.command == "expand":
            return _expand(scenario, out)
        return _check(scenario)
    except ConfigError as exc:
        for field, message in exc.errors:
            print(f"config error: {field}: {message}", file=sys.stderr)
        return EXIT_CONFIG
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HiContrastError as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

"""Command line driver.

    ellg-sim run --preset mumag1 [--config FILE] [overrides...]
    ellg-sim audit-mesh --preset mumag1 [--vtk FILE]
    ellg-sim check --suite invariants

Exit codes: 0 success, 1 invariant breach, 2 configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from .backends import backend_name
from .config import SimConfig, load_preset, parse_config, serialize_config
from .errors import ConfigError, InvariantViolation, MeshError, SolverError
from . import checks
from .output import write_energy_csv, write_vtk_mesh, write_vtk_snapshot
from .simulator import build_mesh, build_setup, omega_mesh_size, run, theta_guard
from .mesh import audit_angle_condition

log = logging.getLogger("ellgsim")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", help="named preset configuration (e.g. mumag1)")
    p.add_argument("--config", help="INI configuration file")


def _load_config(args) -> SimConfig:
    if not args.preset and not args.config:
        raise ConfigError("need --preset and/or --config")
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        cfg = parse_config(path.read_text())
        if args.preset:
            raise ConfigError("--preset and --config are mutually exclusive")
        return cfg
    return load_preset(args.preset)


def _apply_overrides(cfg: SimConfig, args) -> SimConfig:
    llg = cfg.llg
    dt = cfg.dt
    t_end = cfg.t_end
    if args.theta is not None:
        llg = dataclasses.replace(llg, theta=args.theta)
    if args.dt is not None:
        dt = args.dt
        llg = dataclasses.replace(llg, k=dt)
    if args.tend is not None:
        t_end = args.tend
    eddy = dataclasses.replace(cfg.eddy, k=dt)
    solver = cfg.solver
    if args.tol is not None:
        solver = dataclasses.replace(solver, tol=args.tol)
    output = cfg.output
    if args.out_dir is not None:
        output = dataclasses.replace(output, out_dir=args.out_dir)
    if args.vtk_every is not None:
        output = dataclasses.replace(output, vtk_every=args.vtk_every)
    return dataclasses.replace(
        cfg, llg=llg, eddy=eddy, dt=dt, t_end=t_end, solver=solver, output=output
    )


def cmd_run(args) -> int:
    cfg = _apply_overrides(_load_config(args), args)
    out_dir = Path(cfg.output.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    setup = build_setup(cfg)
    for w in setup.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(
        f"mesh: {setup.mesh.omega_node_count} magnetic nodes, "
        f"{setup.mesh.node_count} total nodes, {setup.mesh.tet_count} tets, "
        f"{setup.mesh.edge_count} edges"
    )
    print(
        f"systems: tangent update {2 * setup.mesh.omega_node_count} unknowns, "
        f"eddy field {setup.a_eddy.nrows} unknowns; kernels: {backend_name()}"
    )
    series = run(cfg, setup=setup)

    csv_path = out_dir / "energy.csv"
    write_energy_csv(series, csv_path)
    (out_dir / "config.ini").write_text(serialize_config(cfg))
    for step, m, h in series.snapshots:
        write_vtk_snapshot(setup.mesh, m, h, out_dir / f"state_{step:06d}.vtk")
    if series.snapshots:
        print(f"wrote {len(series.snapshots)} VTK snapshots to {out_dir}")

    last = series.records[-1]
    print(
        f"done: {cfg.n_steps} steps in {series.meta['runtime_seconds']:.2f}s, "
        f"energy log {csv_path}"
    )
    print(
        f"final: exch={last.exch:.6g} h_l2={last.h_l2:.6g} "
        f"unit_violation={last.unit_violation_max:.2e} tangency={last.tangency_max:.2e}"
    )
    return 0


def cmd_audit_mesh(args) -> int:
    cfg = _load_config(args)
    mesh = build_mesh(cfg.mesh)
    report = audit_angle_condition(mesh)
    print(
        f"mesh: {mesh.omega_node_count} magnetic nodes, {mesh.node_count} total nodes, "
        f"{mesh.tet_count} tets, {mesh.edge_count} edges, h = {mesh.h:.6g} "
        f"(magnetic region h = {omega_mesh_size(mesh):.6g})"
    )
    print(report.summary())
    for w in theta_guard(cfg.llg, mesh):
        print(f"warning: {w}")
    if args.vtk:
        write_vtk_mesh(mesh, args.vtk)
        print(f"wrote mesh dump to {args.vtk}")
    return 0


def cmd_check(args) -> int:
    if args.suite != "invariants":
        raise ConfigError(f"unknown check suite {args.suite!r}")
    failures = checks.run_invariant_suite(verbose=True)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellg-sim",
        description="Decoupled FEM time integrator for the coupled "
        "eddy-current / Landau-Lifshitz-Gilbert system",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate a configured system")
    _add_config_args(p)
    p.add_argument("--theta", type=float, help="override the theta weight")
    p.add_argument("--dt", type=float, help="override the time-step")
    p.add_argument("--tend", type=float, help="override the final time")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--vtk-every", type=int, help="snapshot interval in steps (0 = off)")
    p.add_argument("--tol", type=float, help="linear solver tolerance")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("audit-mesh", help="report mesh quality (angle condition)")
    _add_config_args(p)
    p.add_argument("--vtk", help="write a mesh dump to this file")
    p.set_defaults(func=cmd_audit_mesh)

    p = sub.add_parser("check", help="run the built-in property checks")
    p.add_argument("--suite", default="invariants", help="check suite name")
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ConfigError, MeshError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (InvariantViolation, SolverError) as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Exit codes: 0 success/feasible, 1 model-level failure (infeasible, detached,
incomplete course, failed finding), 2 usage or config error. Diagnostics go
to stderr; data goes to files only.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import config as cfgio
from .design import CatalogError, default_catalog, design_report, parse_catalog
from .experiments import ConfigError, Scenario, ScenarioConfig, run_scenario
from .physics import EARTH, DomainError, feasibility_report
from .presets import reference_robot
from .sim import (
    DEFAULT_CALIBRATION,
    DEFAULT_DT,
    Command,
    CourseIncomplete,
    DetachmentError,
    RobotState,
    Trajectory,
    drive,
    follow_path,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _manifest_path(out: Path) -> Path:
    return out.with_name(out.name + ".manifest.json")


def _emit(command, inputs, resolved, files: List[Tuple[Path, str]], manifest_at: Path) -> None:
    outputs = [(str(p), cfgio.write_text(p, text)) for p, text in files]
    cfgio.write_text(manifest_at, cfgio.dumps_json(cfgio.manifest(command, inputs, resolved, outputs)))


def _positive_dt(dt: float) -> float:
    if not (math.isfinite(dt) and dt > 0):
        raise UsageError(f"--dt must be a positive number, got {dt}")
    return dt


def _calibration(path: Optional[str]):
    if path is None:
        return DEFAULT_CALIBRATION
    return cfgio.calibration_from_doc(cfgio.load_document(path, "calibration"))


def cmd_feasibility(args) -> int:
    robot = cfgio.robot_from_doc(cfgio.load_document(args.robot, "robot"))
    surface, corner = cfgio.surface_from_doc(cfgio.load_document(args.surface, "surface"))
    report = feasibility_report(robot, surface, corner, EARTH)
    out = Path(args.out)
    resolved = {"robot": robot, "surface": surface, "corner_loads": corner}
    _emit("feasibility", {"robot": args.robot, "surface": args.surface}, resolved,
          [(out, cfgio.dumps_json(report))], _manifest_path(out))
    return EXIT_OK if report.feasible else EXIT_FAIL


def cmd_experiment(args) -> int:
    try:
        scenario = Scenario(args.scenario)
    except ValueError:
        raise UsageError(
            f"unknown scenario {args.scenario!r}; choose from {', '.join(s.value for s in Scenario)}"
        ) from None
    robot = cfgio.robot_from_doc(cfgio.load_document(args.robot, "robot")) if args.robot else None
    cal = _calibration(args.calibration)
    sc = ScenarioConfig(scenario, robot=robot, calibration=cal, seed=args.seed, dt=_positive_dt(args.dt))
    result = run_scenario(sc)
    outdir = Path(args.out)
    table = outdir / f"{scenario.value}_table.csv"
    findings = outdir / f"{scenario.value}_findings.json"
    doc = {"scenario": scenario.value, "passed": result.passed, "findings": result.findings}
    resolved = {
        "scenario": scenario.value,
        "robot": robot if robot is not None else "scenario default",
        "calibration": cal,
        "seed": args.seed,
        "dt": sc.dt,
    }
    _emit("experiment", {"robot": args.robot, "calibration": args.calibration}, resolved,
          [(table, cfgio.dumps_table(result.columns, result.rows)), (findings, cfgio.dumps_json(doc))],
          outdir / f"{scenario.value}_manifest.json")
    for f in result.findings:
        if not f.passed:
            print(f"finding failed: {f.name}: {f.message}", file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_FAIL


def _trajectory_doc(traj: Trajectory) -> Dict:
    return {
        "summary": traj.summary,
        "samples": [
            {
                "time": s.time,
                "surface_id": s.state.surface_id,
                "x": s.state.x,
                "y": s.state.y,
                "heading": s.state.heading,
                "speed": s.state.speed,
                "battery_soc": s.state.battery_soc,
                "payload": s.state.payload,
                "status": s.status,
                "adhesion_margin": s.adhesion_margin,
            }
            for s in traj.samples
        ],
    }


def cmd_simulate(args) -> int:
    dt = _positive_dt(args.dt)
    robot = cfgio.robot_from_doc(cfgio.load_document(args.robot, "robot"))
    world = cfgio.world_from_doc(cfgio.load_document(args.world, "world"))
    path_doc = cfgio.load_document(args.path, "path")
    cal = _calibration(args.calibration)
    patch_id = path_doc.get("patch", world.patches[0].id)
    patch = world.patch(patch_id)
    ctrl = cfgio.controller_from_doc(path_doc)

    st = path_doc.get("start", {})
    wps = [tuple(p) for p in path_doc.get("waypoints", [])]
    if wps:
        (x0, y0), (x1, y1) = wps[0], wps[1]
        default_heading = math.degrees(math.atan2(y1 - y0, x1 - x0))
    else:
        x0 = y0 = 0.0
        default_heading = 0.0
    start = RobotState(
        surface_id=patch.id,
        x=st.get("x_m", x0),
        y=st.get("y_m", y0),
        heading=math.radians(st.get("heading_deg", default_heading)),
        battery_soc=st.get("soc", 1.0),
        payload=st.get("payload_kg", 0.0),
    )

    ok = True
    try:
        if wps:
            traj = follow_path(robot, start, wps, ctrl, dt, patch.surface, cal, EARTH)
        else:
            c = path_doc["command"]
            traj = drive(robot, start, world, Command(c["linear_mps"], c.get("angular_radps", 0.0)),
                         c["duration_s"], dt, cal, EARTH, path_doc.get("capture_m", ctrl.lookahead))
            ok = traj.summary.completed
    except (DetachmentError, CourseIncomplete) as exc:
        traj, ok = exc.trajectory, False
        print(f"simulation ended early: {exc}", file=sys.stderr)

    out = Path(args.out)
    resolved = {"robot": robot, "world": world, "path": path_doc, "controller": ctrl,
                "calibration": cal, "dt": dt, "start": start}
    _emit("simulate", {"robot": args.robot, "world": args.world, "path": args.path,
                       "calibration": args.calibration},
          resolved, [(out, cfgio.dumps_json(_trajectory_doc(traj)))], _manifest_path(out))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_design(args) -> int:
    req = cfgio.requirements_from_doc(cfgio.load_document(args.requirements, "requirements"))
    if args.catalog:
        try:
            text = Path(args.catalog).read_text()
        except OSError as exc:
            raise UsageError(f"{args.catalog}: cannot read: {exc.strerror}") from None
        catalog = parse_catalog(text)
    else:
        catalog = default_catalog()
    report = design_report(req, catalog, EARTH)
    out = Path(args.out)
    _emit("design", {"requirements": args.requirements, "catalog": args.catalog},
          {"requirements": req, "catalog": catalog}, [(out, cfgio.dumps_json(report))], _manifest_path(out))
    for note in report.notes:
        print(note, file=sys.stderr)
    return EXIT_OK if report.feasible else EXIT_FAIL


def cmd_defaults(args) -> int:
    """Write the reference robot as a robot file, a convenient starting point."""
    cfgio.write_text(Path(args.out), cfgio.dumps_json(cfgio.robot_to_doc(reference_robot())))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magclimb",
        description="Feasibility, simulation and sizing for magnetic-adhesion climbing robots.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feasibility", help="adhesion/torque checks for a robot on a surface")
    p.add_argument("--robot", required=True)
    p.add_argument("--surface", required=True)
    p.add_argument("--out", required=True, help="report file (JSON)")
    p.set_defaults(func=cmd_feasibility)

    p = sub.add_parser("experiment", help="run one of the built-in scenarios")
    p.add_argument("scenario", help="|".join(s.value for s in Scenario))
    p.add_argument("--robot", help="robot file; omitted uses the scenario's reference robot")
    p.add_argument("--calibration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("simulate", help="follow a path or hold a command across a world")
    p.add_argument("--robot", required=True)
    p.add_argument("--world", required=True)
    p.add_argument("--path", required=True)
    p.add_argument("--calibration")
    p.add_argument("--out", required=True, help="trajectory file (JSON)")
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("design", help="size magnets and motors from requirements")
    p.add_argument("--requirements", required=True)
    p.add_argument("--catalog", help="CSV catalog; omitted uses the bundled one")
    p.add_argument("--out", required=True, help="report file (JSON)")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("defaults", help="write the reference robot file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_defaults)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, cfgio.ConfigFileError, ConfigError, CatalogError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

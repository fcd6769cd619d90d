"""Desk-scale reruns of the six locomotion experiments.

Each runner returns a :class:`ScenarioResult`: one row per sweep point in
canonical order, plus named findings that are recomputed from the rows alone
by :func:`compute_findings`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .physics import EARTH, EnvironmentConstants, RobotSpec, SurfacePatch, Terrain, thickness_factor
from .presets import reference_robot, rated_robot
from .sim import (
    DEFAULT_CALIBRATION,
    DEFAULT_DT,
    ContactStatus,
    CourseIncomplete,
    DetachmentError,
    PathController,
    RobotState,
    SpeedCalibration,
    adhesion_margin,
    contact_status,
    follow_path,
    incline_speed_factor,
    speed_limit,
)


class Scenario(str, enum.Enum):
    LOAD_SWEEP = "load"
    THICKNESS_SWEEP = "thickness"
    INCLINE_SWEEP = "incline"
    MANEUVER_COURSE = "maneuver"
    SPEED_MATRIX = "speed"
    TERRAIN_SUITE = "terrain"


DEFAULT_SWEEPS: Dict[Scenario, Tuple] = {
    Scenario.LOAD_SWEEP: (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 27.5, 30.0),
    Scenario.THICKNESS_SWEEP: (3.0, 5.0, 7.0, 10.0),
    Scenario.INCLINE_SWEEP: (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0),
    Scenario.MANEUVER_COURSE: ("s_curve", "square"),
    Scenario.SPEED_MATRIX: (0.0, 10.0, 20.0, 27.5),
    Scenario.TERRAIN_SUITE: ("Smooth", "Rusted", "Debris"),
}
DEFAULT_SOC_LEVELS = (1.0, 0.75, 0.5, 0.25)

WALL = SurfacePatch(orientation_deg=90.0, thickness_mm=10.0, friction_mu=0.6)
FLOOR = SurfacePatch(orientation_deg=0.0, thickness_mm=10.0, friction_mu=0.6)
CROSS_TRACK_BOUND = 0.05  # m, frozen from scripts/freeze_cross_track.py at dt=1e-3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: Scenario
    robot: Optional[RobotSpec] = None  # None picks the scenario's reference robot
    calibration: SpeedCalibration = DEFAULT_CALIBRATION
    sweep: Optional[Tuple] = None
    soc_levels: Optional[Tuple[float, ...]] = None  # speed matrix only
    seed: int = 0
    dt: float = DEFAULT_DT
    env: EnvironmentConstants = EARTH

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.sweep is not None:
            if len(self.sweep) == 0:
                raise ConfigError("sweep list must not be empty")
            object.__setattr__(self, "sweep", tuple(self.sweep))
        if self.soc_levels is not None:
            if len(self.soc_levels) == 0:
                raise ConfigError("soc_levels must not be empty")
            if any(not 0 <= s <= 1 for s in self.soc_levels):
                raise ConfigError("soc_levels must lie in [0, 1]")
            object.__setattr__(self, "soc_levels", tuple(self.soc_levels))

    def sweep_points(self) -> Tuple:
        return self.sweep if self.sweep is not None else DEFAULT_SWEEPS[self.scenario]


@dataclass(frozen=True)
class Finding:
    name: str
    passed: bool
    message: str


@dataclass
class ScenarioResult:
    scenario: Scenario
    columns: Tuple[str, ...]
    rows: List[Dict[str, Any]]
    findings: List[Finding] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(f.passed for f in self.findings)

    def finding(self, name: str) -> Finding:
        for f in self.findings:
            if f.name == name:
                return f
        raise KeyError(name)


# -- courses -------------------------------------------------------------------


def square_course(side: float = 1.0) -> List[Tuple[float, float]]:
    return [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side), (0.0, 0.0)]


def s_curve_course(length: float = 2.0, points_per_arc: int = 100) -> List[Tuple[float, float]]:
    """Two opposite half circles joined at an inflection, ``length`` of arc in total."""
    r = length / (2.0 * math.pi)
    first = [(r - r * math.cos(a), r * math.sin(a)) for a in _angles(points_per_arc)]
    second = [(3 * r - r * math.cos(a), -r * math.sin(a)) for a in _angles(points_per_arc)[1:]]
    return first + second


def _angles(n: int) -> List[float]:
    return [math.pi * i / n for i in range(n + 1)]


COURSES: Dict[str, Callable[[], List[Tuple[float, float]]]] = {
    "square": square_course,
    "s_curve": s_curve_course,
}


def _start_on(waypoints) -> RobotState:
    (x0, y0), (x1, y1) = waypoints[0], waypoints[1]
    return RobotState(x=x0, y=y0, heading=math.atan2(y1 - y0, x1 - x0))


def _polyline_length(waypoints) -> float:
    return sum(math.dist(a, b) for a, b in zip(waypoints, waypoints[1:]))


def _run_course(robot, waypoints, ctrl, dt, surface, cal, env) -> Dict[str, Any]:
    ref_len = _polyline_length(waypoints)
    try:
        traj = follow_path(robot, _start_on(waypoints), waypoints, ctrl, dt, surface, cal, env)
    except (DetachmentError, CourseIncomplete) as exc:
        traj = exc.trajectory
    summ = traj.summary
    mean_speed = summ.path_length / summ.total_time if summ.total_time > 0 else 0.0
    worst = ContactStatus.STABLE
    for smp in traj.samples:
        if smp.status is ContactStatus.PULL_OFF:
            worst = smp.status
            break
        if smp.status is ContactStatus.SLIP:
            worst = smp.status
    return {
        "completed": summ.completed,
        "total_time_s": summ.total_time,
        "reference_length_m": ref_len,
        "time_per_m_s": summ.total_time / ref_len,
        "speed_mps": mean_speed,
        "max_cross_track_m": summ.max_cross_track,
        "adhesion_margin": summ.min_adhesion_margin,
        "contact": worst.value,
    }


# -- runners -------------------------------------------------------------------


def _check_numeric(points, name, lo=0.0, strict=False):
    out = []
    for p in points:
        try:
            v = float(p)
        except (TypeError, ValueError):
            raise ConfigError(f"{name} sweep point {p!r} is not a number") from None
        if v < lo or (strict and v <= lo) or not math.isfinite(v):
            raise ConfigError(f"{name} sweep point {p!r} is out of range")
        out.append(v)
    return sorted(out)


def _static_row(robot, state, surface, cal, env) -> Dict[str, Any]:
    return {
        "speed_mps": speed_limit(state.payload, state.battery_soc, surface, cal),
        "adhesion_margin": adhesion_margin(robot, state, surface, env),
        "contact": contact_status(robot, state, surface, env).value,
    }


def run_load_sweep(cfg: ScenarioConfig) -> ScenarioResult:
    """Payload sweep on a vertical wall with magnets rated for a 27.5 kg payload."""
    robot = cfg.robot or rated_robot(env=cfg.env)
    rows = []
    for payload in _check_numeric(cfg.sweep_points(), "payload"):
        row = {"payload_kg": payload}
        row.update(_static_row(robot, RobotState(payload=payload), WALL, cfg.calibration, cfg.env))
        row["stable"] = row["adhesion_margin"] >= 1.0 and row["contact"] == ContactStatus.STABLE.value
        rows.append(row)
    cols = ("payload_kg", "speed_mps", "adhesion_margin", "contact", "stable")
    return _result(Scenario.LOAD_SWEEP, cols, rows)


def run_thickness_sweep(cfg: ScenarioConfig) -> ScenarioResult:
    robot = cfg.robot or reference_robot(cfg.env)
    rows = []
    for t in _check_numeric(cfg.sweep_points(), "thickness", strict=True):
        surface = SurfacePatch(90.0, t, WALL.friction_mu, Terrain.SMOOTH)
        row = {"thickness_mm": t, "thickness_factor": thickness_factor(t)}
        row.update(_static_row(robot, RobotState(), surface, cfg.calibration, cfg.env))
        rows.append(row)
    cols = ("thickness_mm", "thickness_factor", "speed_mps", "adhesion_margin", "contact")
    return _result(Scenario.THICKNESS_SWEEP, cols, rows)


def run_incline_sweep(cfg: ScenarioConfig) -> ScenarioResult:
    robot = cfg.robot or reference_robot(cfg.env)
    rows = []
    for angle in _check_numeric(cfg.sweep_points(), "angle"):
        if angle > 180:
            raise ConfigError(f"angle {angle} exceeds 180 degrees")
        surface = SurfacePatch(angle, 10.0, WALL.friction_mu, Terrain.SMOOTH)
        row = {"angle_deg": angle, "incline_factor": incline_speed_factor(angle, cfg.calibration)}
        row.update(_static_row(robot, RobotState(), surface, cfg.calibration, cfg.env))
        rows.append(row)
    cols = ("angle_deg", "incline_factor", "speed_mps", "adhesion_margin", "contact")
    return _result(Scenario.INCLINE_SWEEP, cols, rows)


def run_maneuver_course(cfg: ScenarioConfig) -> ScenarioResult:
    robot = cfg.robot or reference_robot(cfg.env)
    names = sorted(cfg.sweep_points())
    for n in names:
        if n not in COURSES:
            raise ConfigError(f"unknown course {n!r}; choose from {sorted(COURSES)}")
    rows = []
    for name in names:
        row = {"course": name}
        row.update(_run_course(robot, COURSES[name](), PathController(), cfg.dt, WALL, cfg.calibration, cfg.env))
        rows.append(row)
    cols = (
        "course", "completed", "total_time_s", "reference_length_m", "time_per_m_s",
        "speed_mps", "max_cross_track_m", "adhesion_margin", "contact",
    )
    return _result(Scenario.MANEUVER_COURSE, cols, rows)


def run_speed_matrix(cfg: ScenarioConfig) -> ScenarioResult:
    robot = cfg.robot or reference_robot(cfg.env)
    socs = cfg.soc_levels if cfg.soc_levels is not None else DEFAULT_SOC_LEVELS
    rows = []
    for payload in _check_numeric(cfg.sweep_points(), "payload"):
        for soc in sorted(socs):
            row = {"payload_kg": payload, "soc": soc}
            state = RobotState(payload=payload, battery_soc=soc)
            row.update(_static_row(robot, state, FLOOR, cfg.calibration, cfg.env))
            rows.append(row)
    cols = ("payload_kg", "soc", "speed_mps", "adhesion_margin", "contact")
    return _result(Scenario.SPEED_MATRIX, cols, rows)


def run_terrain_suite(cfg: ScenarioConfig) -> ScenarioResult:
    """Square course on a wall per terrain, driven at full commanded speed."""
    robot = cfg.robot or reference_robot(cfg.env)
    order = list(Terrain)
    try:
        terrains = sorted({Terrain(t) for t in cfg.sweep_points()}, key=order.index)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if len(terrains) != len(cfg.sweep_points()):
        raise ConfigError("terrain sweep has duplicates")
    ctrl = PathController(speed=cfg.calibration.v_max)
    rows = []
    for terrain in terrains:
        surface = SurfacePatch(90.0, 10.0, WALL.friction_mu, terrain)
        row = {"terrain": terrain.value}
        row["top_speed_mps"] = speed_limit(0.0, 1.0, surface, cfg.calibration)
        row.update(_run_course(robot, square_course(), ctrl, cfg.dt, surface, cfg.calibration, cfg.env))
        rows.append(row)
    cols = (
        "terrain", "completed", "top_speed_mps", "speed_mps", "total_time_s",
        "max_cross_track_m", "adhesion_margin", "contact",
    )
    return _result(Scenario.TERRAIN_SUITE, cols, rows)


RUNNERS: Dict[Scenario, Callable[[ScenarioConfig], ScenarioResult]] = {
    Scenario.LOAD_SWEEP: run_load_sweep,
    Scenario.THICKNESS_SWEEP: run_thickness_sweep,
    Scenario.INCLINE_SWEEP: run_incline_sweep,
    Scenario.MANEUVER_COURSE: run_maneuver_course,
    Scenario.SPEED_MATRIX: run_speed_matrix,
    Scenario.TERRAIN_SUITE: run_terrain_suite,
}


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    return RUNNERS[cfg.scenario](cfg)


# -- findings ------------------------------------------------------------------


def _result(scenario, cols, rows) -> ScenarioResult:
    return ScenarioResult(scenario, cols, rows, compute_findings(scenario, rows))


def _non_increasing(values) -> bool:
    return all(b <= a for a, b in zip(values, values[1:]))


def _row_at(rows, key, value):
    for r in rows:
        if r[key] == value:
            return r
    return None


def load_crossing(rows) -> Optional[float]:
    """Payload where the adhesion margin reaches 1, from the first stable/unstable pair.

    The inverse margin is affine in payload, so interpolating it is exact.
    """
    for a, b in zip(rows, rows[1:]):
        if a["stable"] and not b["stable"]:
            ia, ib = 1.0 / a["adhesion_margin"], 1.0 / b["adhesion_margin"]
            if ib == ia:
                return None
            return a["payload_kg"] + (1.0 - ia) * (b["payload_kg"] - a["payload_kg"]) / (ib - ia)
    return None


def _load_findings(rows):
    first_bad = next((r["payload_kg"] for r in rows if not r["stable"]), None)
    in_band = first_bad is not None and 25.0 < first_bad <= 30.0
    crossing = load_crossing(rows)
    near = crossing is not None and abs(crossing - 27.5) <= 0.1
    speeds = [r["speed_mps"] for r in rows]
    return [
        Finding("threshold_in_(25,30]", in_band, f"first unstable payload: {first_bad} kg"),
        Finding("crossing_at_27.5", near, f"margin crosses 1.0 at {crossing} kg"),
        Finding("speed_non_increasing", _non_increasing(speeds), f"speeds: {speeds}"),
    ]


def _thickness_findings(rows):
    ref = _row_at(rows, "thickness_mm", 7.0)
    thin = _row_at(rows, "thickness_mm", 3.0)
    if ref is None:
        missing = "sweep lacks the 7 mm point"
        return [Finding("saturates_at_7mm", False, missing), Finding("degraded_at_3mm", False, missing)]
    m7 = ref["adhesion_margin"]
    thick = [r["adhesion_margin"] for r in rows if r["thickness_mm"] >= 7.0]
    sat = all(abs(m - m7) <= 1e-9 * abs(m7) for m in thick)
    out = [Finding("saturates_at_7mm", sat, f"margins at >= 7 mm: {thick}")]
    if thin is None:
        out.append(Finding("degraded_at_3mm", False, "sweep lacks the 3 mm point"))
    else:
        m3 = thin["adhesion_margin"]
        out.append(Finding("degraded_at_3mm", m3 < m7, f"margin(3)/margin(7) = {m3 / m7:.6g}"))
    return out


def _incline_findings(rows):
    pulloff = [r["angle_deg"] for r in rows if r["contact"] == ContactStatus.PULL_OFF.value]
    speeds = [r["speed_mps"] for r in rows]
    r15 = _row_at(rows, "angle_deg", 15.0)
    r45 = _row_at(rows, "angle_deg", 45.0)
    knee = r15 is not None and r15["incline_factor"] == 1.0
    slower = r15 is not None and r45 is not None and r45["speed_mps"] < r15["speed_mps"]
    return [
        Finding("operational_to_45", not pulloff, f"pull-off at: {pulloff}"),
        Finding("monotone_speed", _non_increasing(speeds), f"speeds: {speeds}"),
        Finding("knee_at_15", knee, "speed at 15 deg equals flat speed" if knee else "15 deg row derated or missing"),
        Finding("slower_at_45", slower, "speed(45) < speed(15)" if slower else "no strict slowdown at 45 deg"),
    ]


def _maneuver_findings(rows):
    done = all(r["completed"] for r in rows)
    sq = _row_at(rows, "course", "square")
    sc = _row_at(rows, "course", "s_curve")
    if sq and sc:
        slower = sc["time_per_m_s"] > sq["time_per_m_s"]
        msg = f"s_curve {sc['time_per_m_s']:.6g} s/m vs square {sq['time_per_m_s']:.6g} s/m"
    else:
        slower, msg = False, "both built-in courses are needed"
    worst = max(r["max_cross_track_m"] for r in rows)
    return [
        Finding("both_complete", done, f"completed: {[r['course'] for r in rows if r['completed']]}"),
        Finding("s_curve_slower_per_meter", slower, msg),
        Finding("cross_track_bound", worst <= CROSS_TRACK_BOUND, f"max cross-track {worst:.6g} m"),
    ]


def _speed_findings(rows):
    best = max(rows, key=lambda r: r["speed_mps"])
    light = min(r["payload_kg"] for r in rows)
    full = max(r["soc"] for r in rows)
    top = best["payload_kg"] == light and best["soc"] == full
    payloads = sorted({r["payload_kg"] for r in rows})
    socs = sorted({r["soc"] for r in rows})
    cell = {(r["payload_kg"], r["soc"]): r["speed_mps"] for r in rows}
    mono = all(_non_increasing([cell[(p, s)] for p in payloads]) for s in socs) and all(
        _non_increasing([cell[(p, s)] for s in reversed(socs)]) for p in payloads
    )
    worst = min(rows, key=lambda r: r["speed_mps"])
    return [
        Finding("max_at_light_full", top, f"fastest cell: {best['payload_kg']} kg at SOC {best['soc']}"),
        Finding("monotone_rows_and_cols", mono, "speed falls with load and with discharge"),
        Finding(
            "min_at_heavy_low",
            worst["payload_kg"] == payloads[-1] and worst["soc"] == socs[0],
            f"slowest cell: {worst['payload_kg']} kg at SOC {worst['soc']}",
        ),
    ]


def _terrain_findings(rows):
    done = all(r["completed"] for r in rows)
    smooth = _row_at(rows, "terrain", Terrain.SMOOTH.value)
    others = [r for r in rows if r is not smooth]
    fastest = smooth is not None and all(smooth["speed_mps"] > r["speed_mps"] for r in others)
    return [
        Finding("all_complete", done, f"completed: {[r['terrain'] for r in rows if r['completed']]}"),
        Finding("smooth_fastest", fastest, f"speeds: {[(r['terrain'], r['speed_mps']) for r in rows]}"),
    ]


_FINDERS = {
    Scenario.LOAD_SWEEP: _load_findings,
    Scenario.THICKNESS_SWEEP: _thickness_findings,
    Scenario.INCLINE_SWEEP: _incline_findings,
    Scenario.MANEUVER_COURSE: _maneuver_findings,
    Scenario.SPEED_MATRIX: _speed_findings,
    Scenario.TERRAIN_SUITE: _terrain_findings,
}


def compute_findings(scenario: Scenario, rows: Sequence[Dict[str, Any]]) -> List[Finding]:
    return _FINDERS[Scenario(scenario)](list(rows))

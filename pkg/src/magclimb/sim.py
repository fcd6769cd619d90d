"""Time-stepped locomotion on ferromagnetic patches.

The robot is a unicycle integrated with explicit Euler. Speed is capped by a
calibrated derating model, contact is re-checked every step, and internal
corners between patches are crossed only when the drive torque suffices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .physics import (
    EARTH,
    CornerLoadCase,
    DomainError,
    EnvironmentConstants,
    RobotSpec,
    SurfacePatch,
    Terrain,
    decompose_gravity,
    effective_adhesion,
    friction_capacity,
    min_corner_torque,
)

DEFAULT_DT = 1e-3


class ContactStatus(str, enum.Enum):
    STABLE = "Stable"
    SLIP = "Slip"
    PULL_OFF = "PullOff"


class DetachmentError(RuntimeError):
    """The robot pulled off the surface. ``trajectory`` holds the run so far."""

    def __init__(self, message: str, trajectory: Optional["Trajectory"] = None):
        super().__init__(message)
        self.trajectory = trajectory


class CourseIncomplete(RuntimeError):
    def __init__(self, message: str, trajectory: Optional["Trajectory"] = None):
        super().__init__(message)
        self.trajectory = trajectory


def _default_terrain_speed() -> Dict[Terrain, float]:
    return {Terrain.SMOOTH: 1.0, Terrain.RUSTED: 0.9, Terrain.DEBRIS: 0.8}


@dataclass(frozen=True)
class SpeedCalibration:
    v_max: float = 0.55  # m/s, light load and full battery on a flat plate
    load_slope: float = 0.4 / 27.5  # fractional slowdown per kg of payload
    batt_floor: float = 0.5
    incline_knee_deg: float = 15.0
    incline_45_factor: float = 0.7
    terrain_speed: Mapping[Terrain, float] = field(default_factory=_default_terrain_speed)
    battery_full_time: float = 3600.0  # s of full-speed driving per charge
    slip_speed_factor: float = 0.5

    def __post_init__(self):
        if not self.v_max > 0:
            raise DomainError(f"v_max must be > 0, got {self.v_max}")
        if self.load_slope < 0:
            raise DomainError(f"load_slope must be >= 0, got {self.load_slope}")
        for name in ("batt_floor", "incline_45_factor", "slip_speed_factor"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise DomainError(f"{name} must lie in (0, 1], got {v}")
        if not 0 <= self.incline_knee_deg < 45:
            raise DomainError(f"incline_knee_deg must lie in [0, 45), got {self.incline_knee_deg}")
        if not self.battery_full_time > 0:
            raise DomainError("battery_full_time must be > 0")
        speeds = {Terrain(k): float(v) for k, v in self.terrain_speed.items()}
        missing = set(Terrain) - set(speeds)
        if missing:
            raise DomainError(f"terrain_speed lacks {sorted(t.value for t in missing)}")
        for t, v in speeds.items():
            if not 0 < v <= 1:
                raise DomainError(f"terrain_speed[{t.value}] must lie in (0, 1], got {v}")
        object.__setattr__(self, "terrain_speed", speeds)


DEFAULT_CALIBRATION = SpeedCalibration()


@dataclass(frozen=True)
class RobotState:
    surface_id: str = "main"
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0  # rad, surface-local frame
    speed: float = 0.0
    battery_soc: float = 1.0
    payload: float = 0.0  # kg

    def __post_init__(self):
        if not 0 <= self.battery_soc <= 1:
            raise DomainError(f"battery_soc must lie in [0, 1], got {self.battery_soc}")
        if self.speed < 0:
            raise DomainError(f"speed must be >= 0, got {self.speed}")
        if self.payload < 0:
            raise DomainError(f"payload must be >= 0, got {self.payload}")

    @property
    def pos_xy(self) -> Tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Command:
    linear: float  # m/s
    angular: float = 0.0  # rad/s

    def __post_init__(self):
        if not (math.isfinite(self.linear) and math.isfinite(self.angular)):
            raise DomainError("command values must be finite")


@dataclass(frozen=True)
class PathController:
    lookahead: float = 0.1  # m
    speed: float = 0.3  # m/s
    goal_tolerance: float = 0.01  # m
    max_time: Optional[float] = None  # s; None derives a cap from the path length

    def __post_init__(self):
        if not self.lookahead > 0:
            raise DomainError(f"lookahead must be > 0, got {self.lookahead}")
        if not self.speed > 0:
            raise DomainError(f"speed must be > 0, got {self.speed}")
        if not self.goal_tolerance > 0:
            raise DomainError(f"goal_tolerance must be > 0, got {self.goal_tolerance}")
        if self.max_time is not None and not self.max_time > 0:
            raise DomainError(f"max_time must be > 0, got {self.max_time}")


# -- surface world -----------------------------------------------------------

EDGES = ("bottom", "top", "left", "right")
# edge -> (tangent, outward normal)
_EDGE_FRAME = {
    "bottom": ((1.0, 0.0), (0.0, -1.0)),
    "top": ((1.0, 0.0), (0.0, 1.0)),
    "left": ((0.0, 1.0), (-1.0, 0.0)),
    "right": ((0.0, 1.0), (1.0, 0.0)),
}


def _det(a, b) -> float:
    return a[0] * b[1] - a[1] * b[0]


@dataclass(frozen=True)
class WorldPatch:
    id: str
    surface: SurfacePatch
    width: float  # m, local x extent
    height: float  # m, local y extent

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise DomainError(f"patch {self.id!r} needs positive extents")

    def edge_length(self, edge: str) -> float:
        return self.width if edge in ("bottom", "top") else self.height

    def signed_distance(self, edge: str, x: float, y: float) -> float:
        """Distance past ``edge``: negative inside the patch, positive outside."""
        if edge == "bottom":
            return -y
        if edge == "top":
            return y - self.height
        if edge == "left":
            return -x
        return x - self.width

    def edge_param(self, edge: str, x: float, y: float) -> float:
        return x if edge in ("bottom", "top") else y

    def edge_point(self, edge: str, u: float) -> Tuple[float, float]:
        return {
            "bottom": (u, 0.0),
            "top": (u, self.height),
            "left": (0.0, u),
            "right": (self.width, u),
        }[edge]


@dataclass(frozen=True)
class CornerJoint:
    """Internal corner from one patch edge onto another.

    A point at parameter ``u`` along the source edge lands at
    ``offset + orientation * u`` on the destination edge; the orientation sign
    keeps both patch frames consistently handed.
    """

    from_patch: str
    from_edge: str
    to_patch: str
    to_edge: str
    loads: CornerLoadCase
    offset: Optional[float] = None

    def __post_init__(self):
        for e in (self.from_edge, self.to_edge):
            if e not in EDGES:
                raise DomainError(f"unknown edge {e!r}; expected one of {EDGES}")

    @property
    def orientation(self) -> int:
        det_a = _det(*_EDGE_FRAME[self.from_edge])
        det_b = _det(*_EDGE_FRAME[self.to_edge])
        return 1 if det_a == -det_b else -1

    def reversed(self) -> "CornerJoint":
        s = self.orientation
        return CornerJoint(
            self.to_patch, self.to_edge, self.from_patch, self.from_edge,
            self.loads, -s * (self.offset or 0.0),
        )


@dataclass(frozen=True)
class SurfaceWorld:
    patches: Tuple[WorldPatch, ...]
    corners: Tuple[CornerJoint, ...] = ()

    def __post_init__(self):
        ids = [p.id for p in self.patches]
        if not ids:
            raise DomainError("world needs at least one patch")
        if len(set(ids)) != len(ids):
            raise DomainError("patch ids must be unique")
        by_id = {p.id: p for p in self.patches}
        resolved = []
        for j in self.corners:
            for pid in (j.from_patch, j.to_patch):
                if pid not in by_id:
                    raise DomainError(f"corner references unknown patch {pid!r}")
            if j.offset is None:
                default = 0.0 if j.orientation == 1 else by_id[j.to_patch].edge_length(j.to_edge)
                j = replace(j, offset=default)
            resolved.append(j)
        object.__setattr__(self, "patches", tuple(self.patches))
        object.__setattr__(self, "corners", tuple(resolved))

    def patch(self, patch_id: str) -> WorldPatch:
        for p in self.patches:
            if p.id == patch_id:
                return p
        raise DomainError(f"unknown patch {patch_id!r}")

    def joint_from(self, patch_id: str, edge: str) -> Optional[CornerJoint]:
        for j in self.corners:
            if j.from_patch == patch_id and j.from_edge == edge:
                return j
            if j.to_patch == patch_id and j.to_edge == edge:
                return j.reversed()
        return None


# -- trajectories --------------------------------------------------------------


@dataclass(frozen=True)
class Sample:
    time: float
    state: RobotState
    status: ContactStatus
    adhesion_margin: float


@dataclass(frozen=True)
class TrajectorySummary:
    total_time: float
    path_length: float
    max_cross_track: float
    min_adhesion_margin: float
    completed: bool
    reason: str


@dataclass
class Trajectory:
    samples: List[Sample]
    summary: TrajectorySummary


# -- models --------------------------------------------------------------------


def incline_speed_factor(orientation_deg: float, cal: SpeedCalibration = DEFAULT_CALIBRATION) -> float:
    if orientation_deg <= cal.incline_knee_deg:
        return 1.0
    if orientation_deg >= 45.0:
        return cal.incline_45_factor
    frac = (orientation_deg - cal.incline_knee_deg) / (45.0 - cal.incline_knee_deg)
    return 1.0 - (1.0 - cal.incline_45_factor) * frac


def speed_limit(
    payload: float,
    soc: float,
    surface: SurfacePatch,
    cal: SpeedCalibration = DEFAULT_CALIBRATION,
) -> float:
    """Top achievable speed as a product of load, battery, incline and terrain deratings."""
    if payload < 0:
        raise DomainError(f"payload must be >= 0, got {payload}")
    if not 0 <= soc <= 1:
        raise DomainError(f"state of charge must lie in [0, 1], got {soc}")
    f_load = max(0.0, 1.0 - cal.load_slope * payload)
    f_batt = cal.batt_floor + (1.0 - cal.batt_floor) * soc
    return (
        cal.v_max
        * f_load
        * f_batt
        * incline_speed_factor(surface.orientation_deg, cal)
        * cal.terrain_speed[surface.terrain]
    )


def contact_status(
    robot: RobotSpec,
    state: RobotState,
    surface: SurfacePatch,
    env: EnvironmentConstants = EARTH,
) -> ContactStatus:
    mass = robot.mass_total + state.payload
    parallel, normal = decompose_gravity(mass, surface.orientation_deg, env)
    net_normal = effective_adhesion(robot.wheels, surface, env) + normal
    if net_normal <= 0:
        return ContactStatus.PULL_OFF
    if friction_capacity(surface.friction_mu, net_normal) < parallel:
        return ContactStatus.SLIP
    return ContactStatus.STABLE


def adhesion_margin(
    robot: RobotSpec,
    state: RobotState,
    surface: SurfacePatch,
    env: EnvironmentConstants = EARTH,
) -> float:
    """Available holding force over the safety-factored weight, payload included."""
    required = robot.sf_adhesion * (robot.mass_total + state.payload) * env.g
    return effective_adhesion(robot.wheels, surface, env) / required


def step(
    robot: RobotSpec,
    state: RobotState,
    cmd: Command,
    dt: float,
    surface: SurfacePatch,
    cal: SpeedCalibration = DEFAULT_CALIBRATION,
    env: EnvironmentConstants = EARTH,
) -> RobotState:
    """Advance one explicit-Euler step. Raises DetachmentError on pull-off."""
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    status = contact_status(robot, state, surface, env)
    if status is ContactStatus.PULL_OFF:
        raise DetachmentError(f"robot detached from {state.surface_id!r}")

    v = min(abs(cmd.linear), speed_limit(state.payload, state.battery_soc, surface, cal))
    if status is ContactStatus.SLIP:
        v *= cal.slip_speed_factor
    soc = max(0.0, state.battery_soc - (v / cal.v_max) * dt / cal.battery_full_time)
    # re-clamp so the stored speed respects the limit at the stored charge
    v = min(v, speed_limit(state.payload, soc, surface, cal))

    signed_v = v if cmd.linear >= 0 else -v
    nxt = replace(
        state,
        x=state.x + signed_v * math.cos(state.heading) * dt,
        y=state.y + signed_v * math.sin(state.heading) * dt,
        heading=math.remainder(state.heading + cmd.angular * dt, 2.0 * math.pi),
        speed=v,
        battery_soc=soc,
    )
    if contact_status(robot, nxt, surface, env) is ContactStatus.PULL_OFF:
        raise DetachmentError(f"robot detached from {state.surface_id!r}")
    return nxt


@dataclass(frozen=True)
class CornerOutcome:
    success: bool
    state: Optional[RobotState]
    required_torque: float


def traverse_corner(
    robot: RobotSpec,
    state: RobotState,
    joint: CornerJoint,
    world: SurfaceWorld,
    env: EnvironmentConstants = EARTH,
    capture: float = 0.1,
) -> CornerOutcome:
    """Carry the robot over an internal corner if the motors can.

    On success the returned state sits on the fold line in the destination
    patch frame, with its heading rotated so the along-fold component is
    kept. A stall is a reported outcome, not an exception.
    """
    src = world.patch(joint.from_patch)
    dst = world.patch(joint.to_patch)
    if state.surface_id != src.id:
        raise DomainError(f"state is on {state.surface_id!r}, joint starts on {src.id!r}")
    dist = src.signed_distance(joint.from_edge, state.x, state.y)
    if dist < -capture:
        raise DomainError(f"robot is {-dist:.6g} m from the fold, capture distance is {capture}")
    t_a, n_a = _EDGE_FRAME[joint.from_edge]
    c, s = math.cos(state.heading), math.sin(state.heading)
    along, into = c * t_a[0] + s * t_a[1], c * n_a[0] + s * n_a[1]
    if into <= 0:
        raise DomainError("robot is not heading into the fold")

    required = min_corner_torque(robot.wheels.radius_r, joint.loads, robot.geometry.weight_dist_k)
    if not robot.motor_torque_available > required:
        return CornerOutcome(False, None, required)

    sign = joint.orientation
    u_dst = (joint.offset or 0.0) + sign * src.edge_param(joint.from_edge, state.x, state.y)
    if not -1e-9 <= u_dst <= dst.edge_length(joint.to_edge) + 1e-9:
        raise DomainError(f"fold point {u_dst:.6g} m falls outside edge {joint.to_edge!r} of {dst.id!r}")
    x, y = dst.edge_point(joint.to_edge, u_dst)
    t_b, n_b = _EDGE_FRAME[joint.to_edge]
    dx = sign * along * t_b[0] - into * n_b[0]
    dy = sign * along * t_b[1] - into * n_b[1]
    moved = replace(state, surface_id=dst.id, x=x, y=y, heading=math.atan2(dy, dx))
    return CornerOutcome(True, moved, required)


# -- path following ------------------------------------------------------------


class _Polyline:
    def __init__(self, waypoints: Sequence[Tuple[float, float]]):
        pts = np.asarray(waypoints, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 2:
            raise DomainError("a path needs at least two (x, y) waypoints")
        seg = np.diff(pts, axis=0)
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(lengths == 0):
            raise DomainError("consecutive waypoints must differ")
        self.points = pts
        self.starts = pts[:-1]
        self.vecs = seg
        self.lengths = lengths
        self.cum = np.concatenate(([0.0], np.cumsum(lengths)))
        self.length = float(self.cum[-1])

    def point_at(self, s: float) -> Tuple[float, float]:
        s = min(max(s, 0.0), self.length)
        i = int(np.searchsorted(self.cum, s, side="right")) - 1
        i = min(i, len(self.lengths) - 1)
        f = (s - self.cum[i]) / self.lengths[i]
        p = self.starts[i] + f * self.vecs[i]
        return float(p[0]), float(p[1])

    def project(self, x: float, y: float, seg: int, s: float, window: float) -> Tuple[int, float]:
        """Nearest point among segments from ``seg`` onward within ``window`` of arc length.

        Progress never moves backward, so a closed course does not snap back
        to its start.
        """
        best = (math.inf, seg, s)
        last = len(self.lengths)
        j = seg
        while j < last and self.cum[j] <= s + window:
            ax, ay = self.starts[j]
            vx, vy = self.vecs[j]
            f = ((x - ax) * vx + (y - ay) * vy) / (self.lengths[j] ** 2)
            f = min(max(f, 0.0), 1.0)
            d = math.hypot(ax + f * vx - x, ay + f * vy - y)
            if d < best[0]:
                best = (d, j, float(self.cum[j] + f * self.lengths[j]))
            j += 1
        _, j, s_new = best
        if s_new < s:
            return seg, s
        return j, s_new

    def cross_track(self, xy: np.ndarray) -> np.ndarray:
        """Distance from each row of ``xy`` to the whole polyline."""
        rel = xy[:, None, :] - self.starts[None, :, :]
        f = np.einsum("nsk,sk->ns", rel, self.vecs) / (self.lengths**2)
        f = np.clip(f, 0.0, 1.0)
        near = self.starts[None, :, :] + f[..., None] * self.vecs[None, :, :]
        d = np.hypot(near[..., 0] - xy[:, None, 0], near[..., 1] - xy[:, None, 1])
        return d.min(axis=1)


def _summarize(
    samples: List[Sample], completed: bool, reason: str, path: Optional[_Polyline] = None
) -> TrajectorySummary:
    xy = np.array([[s.state.x, s.state.y] for s in samples])
    same_patch = np.array(
        [a.state.surface_id == b.state.surface_id for a, b in zip(samples, samples[1:])], dtype=bool
    )
    if len(samples) > 1:
        hops = np.hypot(*np.diff(xy, axis=0).T)
        length = float(hops[same_patch].sum())
    else:
        length = 0.0
    if path is not None:
        cross = float(path.cross_track(xy).max())
    else:
        cross = 0.0
    return TrajectorySummary(
        total_time=samples[-1].time,
        path_length=length,
        max_cross_track=cross,
        min_adhesion_margin=min(s.adhesion_margin for s in samples),
        completed=completed,
        reason=reason,
    )


def follow_path(
    robot: RobotSpec,
    start: RobotState,
    waypoints: Sequence[Tuple[float, float]],
    ctrl: PathController = PathController(),
    dt: float = DEFAULT_DT,
    surface: SurfacePatch = SurfacePatch(),
    cal: SpeedCalibration = DEFAULT_CALIBRATION,
    env: EnvironmentConstants = EARTH,
) -> Trajectory:
    """Track a piecewise-linear path with pure pursuit.

    The run ends once the robot is within ``ctrl.goal_tolerance`` of the last
    waypoint (or has passed it). Pull-off raises DetachmentError and running
    out of time raises CourseIncomplete; both carry the partial trajectory.
    """
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    path = _Polyline(waypoints)
    goal = path.points[-1]
    max_time = ctrl.max_time if ctrl.max_time is not None else 3.0 * path.length / ctrl.speed + 10.0
    n_max = int(math.ceil(max_time / dt))
    window = 2.0 * ctrl.lookahead + ctrl.speed * dt

    def sample(t, st):
        return Sample(t, st, contact_status(robot, st, surface, env), adhesion_margin(robot, st, surface, env))

    state = start
    samples = [sample(0.0, state)]
    if samples[0].status is ContactStatus.PULL_OFF:
        traj = Trajectory(samples, _summarize(samples, False, "pulloff", path))
        raise DetachmentError("robot cannot hold on at the start of the path", traj)

    seg, s = 0, 0.0
    for i in range(1, n_max + 1):
        seg, s = path.project(state.x, state.y, seg, s, window)
        to_goal = math.hypot(goal[0] - state.x, goal[1] - state.y)
        if s >= path.length or (to_goal <= ctrl.goal_tolerance and s >= path.length - ctrl.lookahead):
            return Trajectory(samples, _summarize(samples, True, "complete", path))

        tx, ty = path.point_at(s + ctrl.lookahead)
        dx, dy = tx - state.x, ty - state.y
        dist = math.hypot(dx, dy)
        v = min(ctrl.speed, speed_limit(state.payload, state.battery_soc, surface, cal))
        if dist > 1e-12:
            alpha = math.atan2(dy, dx) - state.heading
            omega = 2.0 * v * math.sin(alpha) / dist
        else:
            omega = 0.0
        try:
            state = step(robot, state, Command(ctrl.speed, omega), dt, surface, cal, env)
        except DetachmentError as exc:
            samples.append(Sample(i * dt, state, ContactStatus.PULL_OFF, adhesion_margin(robot, state, surface, env)))
            raise DetachmentError(str(exc), Trajectory(samples, _summarize(samples, False, "pulloff", path))) from None
        samples.append(sample(i * dt, state))

    traj = Trajectory(samples, _summarize(samples, False, "timeout", path))
    raise CourseIncomplete(f"course not finished within {max_time:.6g} s", traj)


def drive(
    robot: RobotSpec,
    start: RobotState,
    world: SurfaceWorld,
    cmd: Command,
    duration: float,
    dt: float = DEFAULT_DT,
    cal: SpeedCalibration = DEFAULT_CALIBRATION,
    env: EnvironmentConstants = EARTH,
    capture: float = 0.1,
) -> Trajectory:
    """Hold a constant command across a multi-patch world.

    Fold crossings are found by a sign change of the distance to a patch
    edge between consecutive steps. Crossing an edge with no joint ends the
    run (reason ``"boundary"``), as does a corner stall (``"stall"``).
    """
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    if not duration > 0:
        raise DomainError(f"duration must be > 0, got {duration}")
    n = int(math.ceil(duration / dt - 1e-9))
    patch = world.patch(start.surface_id)

    def sample(t, st, p):
        return Sample(t, st, contact_status(robot, st, p.surface, env), adhesion_margin(robot, st, p.surface, env))

    def finish(completed, reason):
        return Trajectory(samples, _summarize(samples, completed, reason))

    state = start
    samples = [sample(0.0, state, patch)]
    if samples[0].status is ContactStatus.PULL_OFF:
        raise DetachmentError(f"robot cannot hold on to {patch.id!r}", finish(False, "pulloff"))

    for i in range(1, n + 1):
        t = i * dt
        prev = state
        state = step(robot, prev, cmd, dt, patch.surface, cal, env)
        crossed = None
        for edge in EDGES:
            before = patch.signed_distance(edge, prev.x, prev.y)
            after = patch.signed_distance(edge, state.x, state.y)
            if before <= 0.0 < after:
                frac = -before / (after - before)
                if crossed is None or frac < crossed[1]:
                    crossed = (edge, frac)
        if crossed is not None:
            edge, frac = crossed
            at_fold = replace(
                state,
                x=prev.x + frac * (state.x - prev.x),
                y=prev.y + frac * (state.y - prev.y),
            )
            joint = world.joint_from(patch.id, edge)
            if joint is None:
                samples.append(sample(t, at_fold, patch))
                return finish(False, "boundary")
            outcome = traverse_corner(robot, at_fold, joint, world, env, capture)
            if not outcome.success:
                samples.append(sample(t, replace(at_fold, speed=0.0), patch))
                return finish(False, "stall")
            state = outcome.state
            patch = world.patch(state.surface_id)
            smp = sample(t, state, patch)
            samples.append(smp)
            if smp.status is ContactStatus.PULL_OFF:
                raise DetachmentError(f"robot detached entering {patch.id!r}", finish(False, "pulloff"))
            continue
        samples.append(sample(t, state, patch))
    return finish(True, "complete")

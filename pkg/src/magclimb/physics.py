"""Force and torque models for a two-wheel magnetic-adhesion climbing robot.

Everything here is a pure function of frozen value types. Units are SI
internally; surface orientation is accepted in degrees and converted once.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple


class DomainError(ValueError):
    """An input lies outside the physical domain of a model."""


class Terrain(str, enum.Enum):
    SMOOTH = "Smooth"
    RUSTED = "Rusted"
    DEBRIS = "Debris"


# Magnetic contact degrades more on rust than under loose debris.
TERRAIN_ADHESION = {
    Terrain.SMOOTH: 1.0,
    Terrain.RUSTED: 0.9,
    Terrain.DEBRIS: 0.95,
}

# (thickness_mm, factor) anchors; linear in between, 1.0 from 7 mm up.
THICKNESS_ANCHORS: Tuple[Tuple[float, float], ...] = (
    (1.0, 0.1),
    (3.0, 0.7),
    (5.0, 0.85),
    (7.0, 1.0),
)


@dataclass(frozen=True)
class EnvironmentConstants:
    g: float = 9.81
    mu0: float = 4.0 * math.pi * 1e-7

    def __post_init__(self):
        if not self.g > 0:
            raise DomainError(f"g must be positive, got {self.g}")
        if not self.mu0 > 0:
            raise DomainError(f"mu0 must be positive, got {self.mu0}")


EARTH = EnvironmentConstants()


@dataclass(frozen=True)
class MagneticWheelSpec:
    flux_density_B: float  # T
    contact_area_A: float  # m^2
    radius_r: float  # m
    count: int = 2

    def __post_init__(self):
        if not self.flux_density_B >= 0:
            raise DomainError(f"flux_density_B must be >= 0, got {self.flux_density_B}")
        if not self.contact_area_A > 0:
            raise DomainError(f"contact_area_A must be > 0, got {self.contact_area_A}")
        if not self.radius_r > 0:
            raise DomainError(f"radius_r must be > 0, got {self.radius_r}")
        if int(self.count) != self.count or self.count < 1:
            raise DomainError(f"count must be a positive integer, got {self.count}")


@dataclass(frozen=True)
class GeometrySpec:
    lever_X1: float = 1.0  # m
    lever_X2: float = 1.0  # m
    weight_dist_k: float = 1.0

    def __post_init__(self):
        for name in ("lever_X1", "lever_X2", "weight_dist_k"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class RobotSpec:
    mass_total: float  # kg
    wheels: MagneticWheelSpec
    geometry: GeometrySpec = field(default_factory=GeometrySpec)
    sf_adhesion: float = 5.0
    sf_torque: float = 3.0
    motor_torque_available: float = 0.0  # N*m per drive motor

    def __post_init__(self):
        if not self.mass_total > 0:
            raise DomainError(f"mass_total must be > 0, got {self.mass_total}")
        if not self.sf_adhesion >= 1:
            raise DomainError(f"sf_adhesion must be >= 1, got {self.sf_adhesion}")
        if not self.sf_torque >= 1:
            raise DomainError(f"sf_torque must be >= 1, got {self.sf_torque}")
        if not self.motor_torque_available >= 0:
            raise DomainError(
                f"motor_torque_available must be >= 0, got {self.motor_torque_available}"
            )


@dataclass(frozen=True)
class SurfacePatch:
    orientation_deg: float = 90.0  # 0 floor, 90 wall, 180 ceiling
    thickness_mm: float = 10.0
    friction_mu: float = 0.6
    terrain: Terrain = Terrain.SMOOTH

    def __post_init__(self):
        if not 0 <= self.orientation_deg <= 180:
            raise DomainError(f"orientation_deg must lie in [0, 180], got {self.orientation_deg}")
        if not self.thickness_mm > 0:
            raise DomainError(f"thickness_mm must be > 0, got {self.thickness_mm}")
        if not 0 <= self.friction_mu <= 2:
            raise DomainError(f"friction_mu must lie in [0, 2], got {self.friction_mu}")
        object.__setattr__(self, "terrain", Terrain(self.terrain))

    @property
    def orientation_rad(self) -> float:
        return math.radians(self.orientation_deg)


@dataclass(frozen=True)
class CornerLoadCase:
    force_front_F21: float  # N
    force_rear_F22: float  # N
    gravity_P: float  # N

    def __post_init__(self):
        for name in ("force_front_F21", "force_rear_F22", "gravity_P"):
            if not getattr(self, name) >= 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class FeasibilityReport:
    adhesion_required_total: float
    adhesion_required_per_wheel: float
    adhesion_available_total: float
    adhesion_margin: float
    torque_required: float
    torque_margin: float
    corner_torque_min: float
    extreme_adhesion_min: float
    feasible: bool


def magnetic_force(B: float, A: float, env: EnvironmentConstants = EARTH) -> float:
    """Lumped holding force ``B**2 * A / (2 * mu0)`` of one magnet, in newtons."""
    if not A > 0:
        raise DomainError(f"contact area must be > 0, got {A}")
    if not B >= 0:
        raise DomainError(f"flux density must be >= 0, got {B}")
    return B * B * A / (2.0 * env.mu0)


def thickness_factor(thickness_mm: float) -> float:
    """Adhesion derating for thin plates, in (0, 1].

    Piecewise linear through :data:`THICKNESS_ANCHORS`, clamped to 0.1 below
    the first anchor and to 1.0 from 7 mm upward.
    """
    if not thickness_mm > 0:
        raise DomainError(f"thickness must be > 0 mm, got {thickness_mm}")
    lo_t, lo_f = THICKNESS_ANCHORS[0]
    if thickness_mm <= lo_t:
        return lo_f
    for hi_t, hi_f in THICKNESS_ANCHORS[1:]:
        if thickness_mm <= hi_t:
            return lo_f + (hi_f - lo_f) * (thickness_mm - lo_t) / (hi_t - lo_t)
        lo_t, lo_f = hi_t, hi_f
    return 1.0


def terrain_adhesion_factor(terrain: Terrain) -> float:
    return TERRAIN_ADHESION[Terrain(terrain)]


def effective_adhesion(
    wheels: MagneticWheelSpec, surface: SurfacePatch, env: EnvironmentConstants = EARTH
) -> float:
    """Total holding force of all wheels on ``surface``, in newtons."""
    per_wheel = magnetic_force(wheels.flux_density_B, wheels.contact_area_A, env)
    return (
        wheels.count
        * per_wheel
        * thickness_factor(surface.thickness_mm)
        * terrain_adhesion_factor(surface.terrain)
    )


def decompose_gravity(
    mass: float, orientation_deg: float, env: EnvironmentConstants = EARTH
) -> Tuple[float, float]:
    """Split the weight into (along-surface, into-surface) components.

    The normal component is signed: past 90 degrees gravity pulls the robot
    away from the surface and the value goes negative.
    """
    if not mass > 0:
        raise DomainError(f"mass must be > 0, got {mass}")
    theta = math.radians(orientation_deg)
    weight = mass * env.g
    return weight * math.sin(theta), weight * math.cos(theta)


def friction_capacity(mu: float, normal_force: float) -> float:
    if mu < 0:
        raise DomainError(f"friction coefficient must be >= 0, got {mu}")
    if normal_force < 0:
        raise DomainError(f"normal force must be >= 0 (clamp first), got {normal_force}")
    return mu * normal_force


def required_adhesion(
    mass: float, sf: float, wheel_count: int, env: EnvironmentConstants = EARTH
) -> Tuple[float, float]:
    """Safety-factored holding force as (total, per_wheel) newtons."""
    if not mass > 0:
        raise DomainError(f"mass must be > 0, got {mass}")
    if not sf >= 1:
        raise DomainError(f"safety factor must be >= 1, got {sf}")
    if wheel_count < 1:
        raise DomainError(f"wheel_count must be >= 1, got {wheel_count}")
    total = sf * mass * env.g
    return total, total / wheel_count


def required_torque(total_force: float, wheel_radius: float, sf: float = 1.0) -> float:
    if not wheel_radius > 0:
        raise DomainError(f"wheel radius must be > 0, got {wheel_radius}")
    if total_force < 0:
        raise DomainError(f"total force must be >= 0, got {total_force}")
    if not sf >= 1:
        raise DomainError(f"safety factor must be >= 1, got {sf}")
    return sf * total_force * wheel_radius


def min_extreme_adhesion(P_h: float, geometry: GeometrySpec) -> float:
    """Infimum of the adhesive force keeping the robot attached.

    Evaluated literally as ``P_h / (X1 * X2)`` with both lever arms in
    metres. The expression is not dimensionally homogeneous; it is kept as
    published. Callers must compare with a strict inequality.
    """
    if P_h < 0:
        raise DomainError(f"P_h must be >= 0, got {P_h}")
    denom = geometry.lever_X1 * geometry.lever_X2
    if denom == 0:
        raise DomainError("lever_X1 * lever_X2 must be nonzero")
    return P_h / denom


def min_corner_torque(wheel_radius: float, loads: CornerLoadCase, k: float = 1.0) -> float:
    """Infimum of the drive torque needed to climb through an internal corner."""
    if not wheel_radius > 0:
        raise DomainError(f"wheel radius must be > 0, got {wheel_radius}")
    return wheel_radius * (loads.force_front_F21 + k * loads.force_rear_F22 + loads.gravity_P / 2.0)


def default_corner_loads(
    robot: RobotSpec, surface: SurfacePatch, env: EnvironmentConstants = EARTH
) -> CornerLoadCase:
    """Corner load case when none is given: each wheel pressed by its own magnet."""
    per_wheel = effective_adhesion(robot.wheels, surface, env) / robot.wheels.count
    return CornerLoadCase(per_wheel, per_wheel, robot.mass_total * env.g)


def _ratio(available: float, required: float) -> float:
    if required > 0:
        return available / required
    return math.inf if available > 0 else 1.0


def feasibility_report(
    robot: RobotSpec,
    surface: SurfacePatch,
    corner: Optional[CornerLoadCase] = None,
    env: EnvironmentConstants = EARTH,
) -> FeasibilityReport:
    """Run every adhesion and torque check for ``robot`` on ``surface``.

    Infeasibility is reported through ``feasible``; only invalid inputs raise.
    """
    total_req, per_wheel_req = required_adhesion(
        robot.mass_total, robot.sf_adhesion, robot.wheels.count, env
    )
    available = effective_adhesion(robot.wheels, surface, env)
    parallel, _ = decompose_gravity(robot.mass_total, surface.orientation_deg, env)
    parallel = max(parallel, 0.0)
    torque_req = required_torque(parallel, robot.wheels.radius_r, robot.sf_torque)
    if corner is None:
        corner = default_corner_loads(robot, surface, env)
    corner_min = min_corner_torque(robot.wheels.radius_r, corner, robot.geometry.weight_dist_k)
    adhesion_margin = _ratio(available, total_req)
    torque_margin = _ratio(robot.motor_torque_available, torque_req)
    return FeasibilityReport(
        adhesion_required_total=total_req,
        adhesion_required_per_wheel=per_wheel_req,
        adhesion_available_total=available,
        adhesion_margin=adhesion_margin,
        torque_required=torque_req,
        torque_margin=torque_margin,
        corner_torque_min=corner_min,
        extreme_adhesion_min=min_extreme_adhesion(parallel, robot.geometry),
        feasible=adhesion_margin >= 1.0 and torque_margin >= 1.0,
    )

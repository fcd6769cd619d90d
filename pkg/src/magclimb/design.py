"""Inverse sizing: magnets and motors from payload requirements."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, List, Optional, Sequence

from .physics import (
    EARTH,
    DomainError,
    EnvironmentConstants,
    magnetic_force,
    required_adhesion,
    required_torque,
    thickness_factor,
)


class NoSuitableMotor(LookupError):
    pass


class NoSuitableMagnet(LookupError):
    pass


class CatalogError(ValueError):
    pass


class ComponentKind(str, enum.Enum):
    MAGNET = "Magnet"
    MOTOR = "Motor"


@dataclass(frozen=True)
class CatalogEntry:
    kind: ComponentKind
    name: str
    flux_density_B: float = 0.0  # T, magnets only
    contact_area_A: float = 0.0  # m^2, magnets only
    torque: float = 0.0  # N*m, motors only
    mass: float = 0.0  # kg

    def __post_init__(self):
        object.__setattr__(self, "kind", ComponentKind(self.kind))
        if not self.name:
            raise DomainError("catalog entry needs a name")
        if self.kind is ComponentKind.MAGNET:
            if not (self.flux_density_B > 0 and self.contact_area_A > 0):
                raise DomainError(f"magnet {self.name!r} needs positive flux density and area")
        elif not self.torque > 0:
            raise DomainError(f"motor {self.name!r} needs positive torque")
        if self.mass < 0:
            raise DomainError(f"{self.name!r} has negative mass")


@dataclass(frozen=True)
class Selection:
    entry: CatalogEntry
    margin: float


@dataclass(frozen=True)
class DesignRequirements:
    payload: float = 0.0  # kg
    robot_mass: float = 27.5  # kg
    wheel_radius: float = 0.1  # m
    wheel_count: int = 2
    contact_area: float = 0.002  # m^2 per wheel, used for required_B
    thickness_mm: float = 10.0
    sf_adhesion: float = 5.0
    sf_torque: float = 3.0

    @property
    def total_mass(self) -> float:
        return self.robot_mass + self.payload


@dataclass(frozen=True)
class DesignReport:
    total_mass: float
    required_adhesion_total: float
    required_adhesion_per_wheel: float
    required_B: float
    required_torque: float
    magnet: Optional[CatalogEntry]
    magnet_margin: Optional[float]
    motor: Optional[CatalogEntry]
    motor_margin: Optional[float]
    feasible: bool
    notes: List[str] = field(default_factory=list)


def size_magnet(
    per_wheel_force: float,
    contact_area: float,
    thickness_mm: float = 10.0,
    env: EnvironmentConstants = EARTH,
) -> float:
    """Flux density a wheel magnet needs to hold ``per_wheel_force`` on a plate."""
    if not contact_area > 0:
        raise DomainError(f"contact area must be > 0, got {contact_area}")
    if per_wheel_force < 0:
        raise DomainError(f"force must be >= 0, got {per_wheel_force}")
    raw = per_wheel_force / thickness_factor(thickness_mm)
    return math.sqrt(2.0 * env.mu0 * raw / contact_area)


def _motors(catalog: Iterable[CatalogEntry]) -> List[CatalogEntry]:
    return [e for e in catalog if e.kind is ComponentKind.MOTOR]


def size_motor(required: float, catalog: Sequence[CatalogEntry]) -> Selection:
    """Smallest motor whose torque covers ``required``.

    Ties on torque resolve by catalog order. A zero requirement yields an
    infinite margin.
    """
    if not catalog:
        raise CatalogError("catalog is empty")
    candidates = [m for m in _motors(catalog) if m.torque >= required]
    if not candidates:
        best = max((m.torque for m in _motors(catalog)), default=0.0)
        raise NoSuitableMotor(
            f"no motor provides {required:.6g} N*m (largest in catalog: {best:.6g} N*m)"
        )
    pick = min(candidates, key=lambda m: m.torque)
    margin = pick.torque / required if required > 0 else math.inf
    return Selection(pick, margin)


def magnet_hold_force(
    entry: CatalogEntry, thickness_mm: float = 10.0, env: EnvironmentConstants = EARTH
) -> float:
    return magnetic_force(entry.flux_density_B, entry.contact_area_A, env) * thickness_factor(
        thickness_mm
    )


def select_magnet(
    per_wheel_force: float,
    catalog: Sequence[CatalogEntry],
    thickness_mm: float = 10.0,
    env: EnvironmentConstants = EARTH,
) -> Selection:
    if not catalog:
        raise CatalogError("catalog is empty")
    scored = [
        (magnet_hold_force(e, thickness_mm, env), e)
        for e in catalog
        if e.kind is ComponentKind.MAGNET
    ]
    ok = [(f, e) for f, e in scored if f >= per_wheel_force]
    if not ok:
        raise NoSuitableMagnet(f"no magnet holds {per_wheel_force:.6g} N per wheel")
    force, pick = min(ok, key=lambda fe: fe[0])
    margin = force / per_wheel_force if per_wheel_force > 0 else math.inf
    return Selection(pick, margin)


def design_report(
    req: DesignRequirements,
    catalog: Sequence[CatalogEntry],
    env: EnvironmentConstants = EARTH,
) -> DesignReport:
    """Size magnets and motors for ``req`` and pick parts from ``catalog``.

    The torque requirement assumes the vertical-wall worst case, where the
    whole weight acts along the surface. Catalog misses are reported as
    infeasibility in ``notes`` rather than raised.
    """
    if not catalog:
        raise CatalogError("catalog is empty")
    total, per_wheel = required_adhesion(req.total_mass, req.sf_adhesion, req.wheel_count, env)
    torque = required_torque(req.total_mass * env.g, req.wheel_radius, req.sf_torque)
    b_req = size_magnet(per_wheel, req.contact_area, req.thickness_mm, env)
    notes: List[str] = []
    magnet = motor = None
    try:
        magnet = select_magnet(per_wheel, catalog, req.thickness_mm, env)
    except NoSuitableMagnet as exc:
        notes.append(f"NoSuitableMagnet: {exc}")
    try:
        motor = size_motor(torque, catalog)
    except NoSuitableMotor as exc:
        notes.append(f"NoSuitableMotor: {exc}")
    return DesignReport(
        total_mass=req.total_mass,
        required_adhesion_total=total,
        required_adhesion_per_wheel=per_wheel,
        required_B=b_req,
        required_torque=torque,
        magnet=magnet.entry if magnet else None,
        magnet_margin=magnet.margin if magnet else None,
        motor=motor.entry if motor else None,
        motor_margin=motor.margin if motor else None,
        feasible=magnet is not None and motor is not None,
        notes=notes,
    )


CATALOG_COLUMNS = ("kind", "name", "flux_density_T", "contact_area_m2", "torque_Nm", "mass_kg")


def parse_catalog(text: str) -> List[CatalogEntry]:
    """Read a CSV catalog. Blank numeric cells mean zero."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise CatalogError("catalog file is empty")
    missing = [c for c in CATALOG_COLUMNS if c not in reader.fieldnames]
    extra = [c for c in reader.fieldnames if c not in CATALOG_COLUMNS]
    if missing:
        raise CatalogError(f"catalog is missing column(s): {', '.join(missing)}")
    if extra:
        raise CatalogError(f"catalog has unknown column(s): {', '.join(extra)}")

    def num(row, col, lineno):
        cell = (row[col] or "").strip()
        try:
            return float(cell) if cell else 0.0
        except ValueError:
            raise CatalogError(f"line {lineno}: {col} is not a number: {cell!r}") from None

    entries = []
    for lineno, row in enumerate(reader, start=2):
        try:
            entries.append(
                CatalogEntry(
                    kind=ComponentKind(row["kind"].strip()),
                    name=row["name"].strip(),
                    flux_density_B=num(row, "flux_density_T", lineno),
                    contact_area_A=num(row, "contact_area_m2", lineno),
                    torque=num(row, "torque_Nm", lineno),
                    mass=num(row, "mass_kg", lineno),
                )
            )
        except (DomainError, ValueError) as exc:
            if isinstance(exc, CatalogError):
                raise
            raise CatalogError(f"line {lineno}: {exc}") from None
    if not entries:
        raise CatalogError("catalog has no entries")
    return entries


def default_catalog() -> List[CatalogEntry]:
    text = resources.files("magclimb.data").joinpath("catalog.csv").read_text()
    return parse_catalog(text)

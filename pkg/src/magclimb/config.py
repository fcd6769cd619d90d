"""Config ingestion and deterministic file emission.

Input documents are JSON validated against the schemas shipped in
``magclimb/schemas`` (strict: unknown keys are rejected). Outputs are JSON
reports and CSV tables written byte-for-byte reproducibly.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import hashlib
import io
import json
import math
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import jsonschema

from .design import DesignRequirements
from .physics import (
    CornerLoadCase,
    GeometrySpec,
    MagneticWheelSpec,
    RobotSpec,
    SurfacePatch,
    Terrain,
)
from .sim import CornerJoint, PathController, SpeedCalibration, SurfaceWorld, WorldPatch

SCHEMA_VERSION = 1
SCHEMA_NAMES = ("robot", "surface", "world", "path", "requirements", "calibration")


class ConfigFileError(ValueError):
    """A config document is unreadable or violates its schema."""


@lru_cache(maxsize=None)
def schema(name: str) -> Dict[str, Any]:
    text = resources.files("magclimb.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


def _where(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    return ".".join(parts) if parts else "<document>"


def validate(doc: Any, kind: str, source: str = "<input>") -> Dict[str, Any]:
    validator = jsonschema.Draft202012Validator(schema(kind))
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigFileError(f"{source}: {kind} file invalid at {_where(err)}: {err.message}")
    return doc


def load_document(path, kind: str) -> Dict[str, Any]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigFileError(f"{path}: cannot read: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"{path}: not valid JSON: {exc}") from None
    return validate(doc, kind, str(path))


# -- documents -> domain types ----------------------------------------------


def robot_from_doc(doc: Dict[str, Any]) -> RobotSpec:
    w = doc["wheels"]
    g = doc.get("geometry", {})
    return RobotSpec(
        mass_total=doc["mass_kg"],
        wheels=MagneticWheelSpec(w["flux_density_T"], w["contact_area_m2"], w["radius_m"], w["count"]),
        geometry=GeometrySpec(
            g.get("lever_x1_m", 1.0), g.get("lever_x2_m", 1.0), g.get("weight_dist_k", 1.0)
        ),
        sf_adhesion=doc.get("sf_adhesion", 5.0),
        sf_torque=doc.get("sf_torque", 3.0),
        motor_torque_available=doc["motor_torque_Nm"],
    )


def robot_to_doc(robot: RobotSpec) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "mass_kg": robot.mass_total,
        "wheels": {
            "flux_density_T": robot.wheels.flux_density_B,
            "contact_area_m2": robot.wheels.contact_area_A,
            "radius_m": robot.wheels.radius_r,
            "count": robot.wheels.count,
        },
        "geometry": {
            "lever_x1_m": robot.geometry.lever_X1,
            "lever_x2_m": robot.geometry.lever_X2,
            "weight_dist_k": robot.geometry.weight_dist_k,
        },
        "sf_adhesion": robot.sf_adhesion,
        "sf_torque": robot.sf_torque,
        "motor_torque_Nm": robot.motor_torque_available,
    }


def _loads(doc) -> CornerLoadCase:
    return CornerLoadCase(doc["front_N"], doc["rear_N"], doc["gravity_N"])


def _patch(doc) -> SurfacePatch:
    return SurfacePatch(
        doc["orientation_deg"], doc["thickness_mm"], doc["friction_mu"], Terrain(doc.get("terrain", "Smooth"))
    )


def surface_from_doc(doc: Dict[str, Any]) -> Tuple[SurfacePatch, Optional[CornerLoadCase]]:
    corner = _loads(doc["corner_loads"]) if "corner_loads" in doc else None
    return _patch(doc), corner


def world_from_doc(doc: Dict[str, Any]) -> SurfaceWorld:
    patches = tuple(WorldPatch(p["id"], _patch(p), p["width_m"], p["height_m"]) for p in doc["patches"])
    corners = tuple(
        CornerJoint(c["from_patch"], c["from_edge"], c["to_patch"], c["to_edge"], _loads(c["loads"]), c.get("offset_m"))
        for c in doc.get("corners", [])
    )
    return SurfaceWorld(patches, corners)


def controller_from_doc(doc: Dict[str, Any]) -> PathController:
    c = doc.get("controller", {})
    base = PathController()
    return PathController(
        lookahead=c.get("lookahead_m", base.lookahead),
        speed=c.get("speed_mps", base.speed),
        goal_tolerance=c.get("goal_tolerance_m", base.goal_tolerance),
        max_time=c.get("max_time_s"),
    )


def requirements_from_doc(doc: Dict[str, Any]) -> DesignRequirements:
    base = DesignRequirements()
    return DesignRequirements(
        payload=doc["payload_kg"],
        robot_mass=doc["robot_mass_kg"],
        wheel_radius=doc["wheel_radius_m"],
        wheel_count=doc.get("wheel_count", base.wheel_count),
        contact_area=doc.get("contact_area_m2", base.contact_area),
        thickness_mm=doc.get("thickness_mm", base.thickness_mm),
        sf_adhesion=doc.get("sf_adhesion", base.sf_adhesion),
        sf_torque=doc.get("sf_torque", base.sf_torque),
    )


_CAL_KEYS = {
    "v_max_mps": "v_max",
    "load_slope_per_kg": "load_slope",
    "batt_floor": "batt_floor",
    "incline_knee_deg": "incline_knee_deg",
    "incline_45_factor": "incline_45_factor",
    "terrain_speed": "terrain_speed",
    "battery_full_time_s": "battery_full_time",
    "slip_speed_factor": "slip_speed_factor",
}


def calibration_from_doc(doc: Dict[str, Any]) -> SpeedCalibration:
    kwargs = {attr: doc[key] for key, attr in _CAL_KEYS.items() if key in doc}
    if "terrain_speed" in kwargs:
        kwargs["terrain_speed"] = {Terrain(k): v for k, v in kwargs["terrain_speed"].items()}
    return SpeedCalibration(**kwargs)


# -- emission ------------------------------------------------------------------


def plain(obj: Any) -> Any:
    """Convert dataclasses/enums/tuples into JSON-ready values.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``
    so the output stays strict JSON.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {(k.value if isinstance(k, enum.Enum) else str(k)): plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [plain(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps_json(obj: Any) -> str:
    return json.dumps(plain(obj), indent=2, allow_nan=False) + "\n"


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, enum.Enum):
        return str(value.value)
    return str(value)


def dumps_table(columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_cell(row[c]) for c in columns])
    return buf.getvalue()


def write_text(path, text: str) -> str:
    """Write ``text`` and return its SHA-256 hex digest."""
    data = text.encode("utf-8")
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def manifest(
    command: str,
    inputs: Dict[str, Optional[str]],
    resolved: Dict[str, Any],
    outputs: List[Tuple[str, str]],
) -> Dict[str, Any]:
    return {
        "command": command,
        "inputs": {k: v for k, v in inputs.items()},
        "config": plain(resolved),
        "outputs": [{"path": p, "sha256": h} for p, h in outputs],
    }

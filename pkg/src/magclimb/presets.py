"""Reference robot configurations."""

from __future__ import annotations

import math

from .design import size_magnet
from .physics import EARTH, GeometrySpec, MagneticWheelSpec, RobotSpec, required_adhesion

REFERENCE_MASS = 27.5  # kg, total system mass
REFERENCE_WHEEL_RADIUS = 0.1  # m
REFERENCE_WHEEL_COUNT = 2
REFERENCE_MOTOR_TORQUE = 80.94  # N*m, the safety-factored requirement
RATED_PAYLOAD = 27.5  # kg, load at which the sweep robot hits margin 1.0
CONTACT_AREA = 0.002  # m^2 per wheel
FLUX_STEP = 1e-4  # T, magnets are specified to 0.1 mT


def sized_flux(mass: float, sf: float = 5.0, area: float = CONTACT_AREA, env=EARTH) -> float:
    """Smallest catalogue-resolution flux density holding ``mass`` at ``sf``."""
    _, per_wheel = required_adhesion(mass, sf, REFERENCE_WHEEL_COUNT, env)
    exact = size_magnet(per_wheel, area, 10.0, env)
    # round() strips the binary residue of the multiplication
    return round(math.ceil(exact / FLUX_STEP) * FLUX_STEP, 10)


def reference_robot(env=EARTH) -> RobotSpec:
    """27.5 kg, two 0.1 m wheels, magnets sized just above 674.45 N each."""
    return RobotSpec(
        mass_total=REFERENCE_MASS,
        wheels=MagneticWheelSpec(
            flux_density_B=sized_flux(REFERENCE_MASS, env=env),
            contact_area_A=CONTACT_AREA,
            radius_r=REFERENCE_WHEEL_RADIUS,
            count=REFERENCE_WHEEL_COUNT,
        ),
        geometry=GeometrySpec(),
        sf_adhesion=5.0,
        sf_torque=3.0,
        motor_torque_available=REFERENCE_MOTOR_TORQUE,
    )


def rated_robot(rated_payload: float = RATED_PAYLOAD, env=EARTH) -> RobotSpec:
    """The reference robot with magnets resized to carry ``rated_payload`` on a wall."""
    base = reference_robot(env)
    flux = sized_flux(base.mass_total + rated_payload, base.sf_adhesion, env=env)
    wheels = MagneticWheelSpec(flux, CONTACT_AREA, REFERENCE_WHEEL_RADIUS, REFERENCE_WHEEL_COUNT)
    return RobotSpec(
        mass_total=base.mass_total,
        wheels=wheels,
        geometry=base.geometry,
        sf_adhesion=base.sf_adhesion,
        sf_torque=base.sf_torque,
        motor_torque_available=base.motor_torque_available,
    )

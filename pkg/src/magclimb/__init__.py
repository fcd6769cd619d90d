"""Design-feasibility and locomotion simulator for magnetic climbing robots."""

from .physics import (
    CornerLoadCase,
    DomainError,
    EnvironmentConstants,
    FeasibilityReport,
    GeometrySpec,
    MagneticWheelSpec,
    RobotSpec,
    SurfacePatch,
    Terrain,
    feasibility_report,
)
from .presets import reference_robot, rated_robot

__version__ = "0.1.0"

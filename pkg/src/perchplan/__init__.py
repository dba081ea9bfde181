"""Trajectory planner for quadrotor perching on static or moving inclined surfaces."""

from .flatness import FlatState, VehicleGeometry
from .spline import BoundaryState, PerchSpline
from .platform import PlatformModel
from .terminal import PerchSpec, TerminalVars
from .penalties import ActuatorLimits, PenaltyWeights, QuadratureSpec
from .smoothing import SmoothingParams
from .scenario import ScenarioConfig, SolverConfig
from .optimizer import PlanResult, advance, solve, replan
from .validator import ConstraintReport, check, disc_oracle, gradient_audit

__version__ = "0.1.0"

__all__ = [
    "FlatState",
    "VehicleGeometry",
    "BoundaryState",
    "PerchSpline",
    "PlatformModel",
    "PerchSpec",
    "TerminalVars",
    "ActuatorLimits",
    "PenaltyWeights",
    "QuadratureSpec",
    "SmoothingParams",
    "ScenarioConfig",
    "SolverConfig",
    "PlanResult",
    "solve",
    "replan",
    "advance",
    "ConstraintReport",
    "check",
    "disc_oracle",
    "gradient_audit",
]

"""Scenario configuration: aggregation of every planner parameter plus file IO.

Scenario files are YAML (JSON is a strict subset and parses too) with one
section per parameter group.  A written config re-parses to an identical
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .flatness import VehicleGeometry
from .penalties import ActuatorLimits, PenaltyWeights, QuadratureSpec
from .platform import PlatformModel
from .smoothing import SmoothingParams
from .spline import BoundaryState
from .terminal import PerchSpec


class ScenarioParseError(ValueError):
    """Malformed or inconsistent scenario file."""


@dataclass(frozen=True)
class SolverConfig:
    """Piece count and quasi-Newton solver settings."""

    pieces: int = 10
    max_iterations: int = 1000
    gradient_tolerance: float = 1e-5
    cost_tolerance: float = 1e-6
    history_size: int = 30
    c_armijo: float = 1e-4
    c_curvature: float = 0.9
    initial_duration: float = None

    def __post_init__(self):
        if self.pieces < 2:
            raise ValueError("pieces must be at least 2")
        if not self.gradient_tolerance > 0 or not self.cost_tolerance > 0:
            raise ValueError("tolerances must be positive")
        if not 0 < self.c_armijo < self.c_curvature < 1:
            raise ValueError("need 0 < c_armijo < c_curvature < 1")
        if self.initial_duration is not None and not self.initial_duration > 0:
            raise ValueError("initial_duration must be positive")


@dataclass
class ScenarioConfig:
    """Everything a solve needs: vehicle, limits, platform, weights, solver."""

    initial: BoundaryState
    platform: PlatformModel
    geometry: VehicleGeometry = field(default_factory=VehicleGeometry)
    limits: ActuatorLimits = field(default_factory=ActuatorLimits)
    weights: PenaltyWeights = field(default_factory=PenaltyWeights)
    smoothing: SmoothingParams = field(default_factory=SmoothingParams)
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)

    @property
    def perch(self) -> PerchSpec:
        return self.platform.spec

    # -- serialization -----------------------------------------------------

    def to_dict(self):
        return {
            "initial": {
                "p": list(map(float, self.initial.p)),
                "v": list(map(float, self.initial.v)),
                "a": list(map(float, self.initial.a)),
                "j": list(map(float, self.initial.j)),
            },
            "platform": {
                "position": list(map(float, self.platform.rho0)),
                "velocity": list(map(float, self.platform.vel)),
            },
            "perch": {
                "z_d": list(map(float, self.perch.z_d)),
                "v_n_bar": float(self.perch.v_n_bar),
                "d_bar": float(self.perch.d_bar),
            },
            "vehicle": {
                "g_bar": self.geometry.g_bar,
                "l_bar": self.geometry.l_bar,
                "r_bar": self.geometry.r_bar,
            },
            "limits": {
                "v_max": self.limits.v_max,
                "omega_max": self.limits.omega_max,
                "tau_min": self.limits.tau_min,
                "tau_max": self.limits.tau_max,
                "z_min": self.limits.z_min,
            },
            "weights": {
                "w_tau": self.weights.w_tau,
                "w_omega": self.weights.w_omega,
                "w_v": self.weights.w_v,
                "w_g": self.weights.w_g,
                "w_c": self.weights.w_c,
                "w_t": self.weights.w_t,
                "rho_time": self.weights.rho_time,
            },
            "smoothing": {"mu": self.smoothing.mu, "eps": self.smoothing.eps},
            "quadrature": {"kappa": self.quadrature.kappa},
            "solver": {
                "pieces": self.solver.pieces,
                "max_iterations": self.solver.max_iterations,
                "gradient_tolerance": self.solver.gradient_tolerance,
                "cost_tolerance": self.solver.cost_tolerance,
                "history_size": self.solver.history_size,
                "c_armijo": self.solver.c_armijo,
                "c_curvature": self.solver.c_curvature,
                "initial_duration": self.solver.initial_duration,
            },
        }

    @staticmethod
    def from_dict(data) -> "ScenarioConfig":
        try:
            init = data["initial"]
            initial = BoundaryState(
                p=init["p"],
                v=init.get("v", np.zeros(3)),
                a=init.get("a", np.zeros(3)),
                j=init.get("j", np.zeros(3)),
            )
            perch_d = data.get("perch", {})
            if "slope_deg" in perch_d and "z_d" in perch_d:
                raise ScenarioParseError("give either perch.z_d or perch.slope_deg")
            if "slope_deg" in perch_d:
                z_d = surface_normal_from_slope(perch_d["slope_deg"])
            else:
                z_d = np.asarray(perch_d.get("z_d", (0.0, 0.0, 1.0)), float)
                z_d = z_d / np.linalg.norm(z_d)
            spec = PerchSpec(
                z_d=z_d,
                v_n_bar=float(perch_d.get("v_n_bar", 0.0)),
                d_bar=float(perch_d.get("d_bar", 0.5)),
            )
            plat_d = data["platform"]
            platform = PlatformModel(
                rho0=plat_d["position"],
                vel=plat_d.get("velocity", np.zeros(3)),
                spec=spec,
            )
            scenario = ScenarioConfig(
                initial=initial,
                platform=platform,
                geometry=VehicleGeometry(**data.get("vehicle", {})),
                limits=ActuatorLimits(**data.get("limits", {})),
                weights=PenaltyWeights(**data.get("weights", {})),
                smoothing=SmoothingParams(**data.get("smoothing", {})),
                quadrature=QuadratureSpec(**data.get("quadrature", {})),
                solver=SolverConfig(**data.get("solver", {})),
            )
        except ScenarioParseError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioParseError(f"invalid scenario: {exc}") from exc
        return scenario

    @staticmethod
    def load(path) -> "ScenarioConfig":
        try:
            text = Path(path).read_text()
            data = yaml.safe_load(text)
        except (OSError, yaml.YAMLError) as exc:
            raise ScenarioParseError(f"cannot read scenario {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ScenarioParseError(f"scenario {path} is not a mapping")
        return ScenarioConfig.from_dict(data)

    def save(self, path):
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False))

    # -- convenience -------------------------------------------------------

    def with_platform(self, platform: PlatformModel) -> "ScenarioConfig":
        return ScenarioConfig(
            initial=self.initial,
            platform=platform,
            geometry=self.geometry,
            limits=self.limits,
            weights=self.weights,
            smoothing=self.smoothing,
            quadrature=self.quadrature,
            solver=self.solver,
        )

    def with_initial(self, initial: BoundaryState) -> "ScenarioConfig":
        return ScenarioConfig(
            initial=initial,
            platform=self.platform,
            geometry=self.geometry,
            limits=self.limits,
            weights=self.weights,
            smoothing=self.smoothing,
            quadrature=self.quadrature,
            solver=self.solver,
        )


def surface_normal_from_slope(slope_deg):
    """Outward surface normal for an inclination angle in degrees.

    0 is a flat upward-facing pad, -90 a vertical surface facing the -x
    direction, beyond -90 an overhang.
    """
    th = np.deg2rad(float(slope_deg))
    return np.array([np.sin(th), 0.0, np.cos(th)])

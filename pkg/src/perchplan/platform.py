"""Constant-velocity prediction of the landing platform and its half-space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .terminal import PerchSpec


@dataclass
class PlatformModel:
    """Platform pose extrapolated with a constant-velocity model.

    The perching surface is the boundary of the half-space a^T x <= b(t)
    with a = -z_d and b(t) = a^T rho(t): allowed space is the landing side.
    """

    rho0: np.ndarray
    vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    spec: PerchSpec = field(default_factory=PerchSpec)

    def __post_init__(self):
        self.rho0 = np.asarray(self.rho0, dtype=float)
        self.vel = np.asarray(self.vel, dtype=float)
        if self.rho0.shape != (3,) or not np.all(np.isfinite(self.rho0)):
            raise ValueError("rho0 must be a finite 3-vector")
        if self.vel.shape != (3,) or not np.all(np.isfinite(self.vel)):
            raise ValueError("vel must be a finite 3-vector")

    def predict(self, t):
        """Platform position and velocity at time t."""
        return self.rho0 + self.vel * t, self.vel

    def halfspace(self, t):
        """(a, b, db_dt) of the landing half-space at time t."""
        a = -self.spec.z_d
        rho, vel = self.predict(t)
        return a, float(a @ rho), float(a @ vel)

    def advanced(self, dt):
        """Copy of this model with time origin shifted forward by dt."""
        return PlatformModel(self.rho0 + self.vel * dt, self.vel.copy(), self.spec)

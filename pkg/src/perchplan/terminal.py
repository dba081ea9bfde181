"""Flexible terminal transformation.

The free terminal variables are the tangential relative velocity v_t (in
the surface plane) and a thrust phase tau_f.  They map to the spline's
terminal boundary state so that the perching pose, terminal thrust bound,
and relative-velocity conditions hold by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flatness import E3
from .spline import BoundaryState


@dataclass(frozen=True)
class PerchSpec:
    """Surface normal, approach speed, and platform surface radius."""

    z_d: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    v_n_bar: float = 0.0
    d_bar: float = 0.5

    def __post_init__(self):
        z_d = np.asarray(self.z_d, dtype=float)
        if z_d.shape != (3,) or abs(np.linalg.norm(z_d) - 1.0) > 1e-9:
            raise ValueError("z_d must be a unit 3-vector")
        object.__setattr__(self, "z_d", z_d)
        if self.v_n_bar < 0:
            raise ValueError("v_n_bar must be nonnegative")
        if not self.d_bar > 0:
            raise ValueError("d_bar must be positive")


@dataclass
class TerminalVars:
    """Free terminal variables: tangential velocity and thrust phase."""

    v_t: np.ndarray = field(default_factory=lambda: np.zeros(2))
    tau_f: float = 0.0

    def __post_init__(self):
        self.v_t = np.asarray(self.v_t, dtype=float)
        if self.v_t.shape != (2,) or not np.all(np.isfinite(self.v_t)):
            raise ValueError("v_t must be a finite 2-vector")


_TANGENT_CACHE = {}


def tangent_basis(z_d):
    """Deterministic 3x2 orthonormal basis of the plane orthogonal to z_d.

    Picks the coordinate axis least aligned with z_d, projects it, and
    completes with a cross product.  Memoized: the solver requests the
    same normal every evaluation.
    """
    z_d = np.asarray(z_d, dtype=float)
    key = z_d.tobytes()
    hit = _TANGENT_CACHE.get(key)
    if hit is not None:
        return hit
    axis = int(np.argmin(np.abs(z_d)))
    e = np.zeros(3)
    e[axis] = 1.0
    v1 = e - (e @ z_d) * z_d
    v1 /= np.linalg.norm(v1)
    v2 = np.cross(z_d, v1)
    V = np.column_stack([v1, v2])
    V.setflags(write=False)
    _TANGENT_CACHE[key] = V
    return V


def terminal_velocity(v_t, platform_vel, spec: PerchSpec):
    """Terminal velocity: platform velocity minus normal approach plus tangential part."""
    V = tangent_basis(spec.z_d)
    return np.asarray(platform_vel, float) - spec.v_n_bar * spec.z_d + V @ np.asarray(v_t, float)


def terminal_acceleration(tau_f, spec: PerchSpec, tau_min, tau_max, g_bar):
    """Terminal acceleration with thrust along z_d, magnitude bounded by construction."""
    tau_m = 0.5 * (tau_max + tau_min)
    tau_r = 0.5 * (tau_max - tau_min)
    return (tau_m + tau_r * np.sin(tau_f)) * spec.z_d - g_bar * E3


def regularizer(v_t):
    """Squared tangential speed and its gradient."""
    v_t = np.asarray(v_t, dtype=float)
    return float(v_t @ v_t), 2.0 * v_t


@dataclass
class TerminalState:
    """Terminal boundary state with Jacobians w.r.t. (v_t, tau_f, T)."""

    boundary: BoundaryState
    dv_dvt: np.ndarray  # (3, 2): d(terminal velocity)/d(v_t)
    da_dtauf: np.ndarray  # (3,)
    dp_dT: np.ndarray  # (3,)
    dv_dT: np.ndarray  # (3,)


def terminal_state(v_t, tau_f, platform, geometry, limits, T) -> TerminalState:
    """Full terminal boundary state at duration T, with Jacobians.

    The center of mass sits l_bar outside the surface point along the
    outward normal z_d so the underside disc rests exactly on the
    surface; jerk is zero to keep the touchdown body rate small.
    """
    spec = platform.spec
    rho, rho_dot = platform.predict(T)
    V = tangent_basis(spec.z_d)
    tau_m = 0.5 * (limits.tau_max + limits.tau_min)
    tau_r = 0.5 * (limits.tau_max - limits.tau_min)

    p = rho + geometry.l_bar * spec.z_d
    v = rho_dot - spec.v_n_bar * spec.z_d + V @ np.asarray(v_t, float)
    a = (tau_m + tau_r * np.sin(tau_f)) * spec.z_d - geometry.g_bar * E3
    boundary = BoundaryState(p=p, v=v, a=a, j=np.zeros(3))
    return TerminalState(
        boundary=boundary,
        dv_dvt=V,
        da_dtauf=tau_r * np.cos(tau_f) * spec.z_d,
        dp_dT=rho_dot.copy(),
        dv_dT=np.zeros(3),  # constant-velocity platform
    )

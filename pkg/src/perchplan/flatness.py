"""Differential-flatness map with Hopf-fibration attitude.

All thrust quantities are mass-normalized (m/s^2), so vehicle mass never
appears: the net thrust is simply acceleration plus gravity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

E3 = np.array([0.0, 0.0, 1.0])

# Guard on 1 + z_b[2] below which the yaw-free attitude is undefined
# (drone pointing straight down).
HOPF_SINGULARITY_TOL = 1e-6


class DegenerateThrustError(ValueError):
    """Thrust vector too small to define a body axis."""


class HopfSingularityError(ValueError):
    """Body axis too close to -e3 for the yaw-free quaternion."""


@dataclass
class FlatState:
    """Position and its time derivatives up to snap at one instant."""

    p: np.ndarray
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    a: np.ndarray = field(default_factory=lambda: np.zeros(3))
    j: np.ndarray = field(default_factory=lambda: np.zeros(3))
    s: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("p", "v", "a", "j", "s"):
            value = np.asarray(getattr(self, name), dtype=float)
            if value.shape != (3,) or not np.all(np.isfinite(value)):
                raise ValueError(f"FlatState.{name} must be a finite 3-vector")
            setattr(self, name, value)


@dataclass(frozen=True)
class VehicleGeometry:
    """Gravity plus the two lengths defining the underside disc."""

    g_bar: float = 9.81
    l_bar: float = 0.04
    r_bar: float = 0.12

    def __post_init__(self):
        if not self.g_bar > 0:
            raise ValueError("g_bar must be positive")
        if self.l_bar < 0:
            raise ValueError("l_bar must be nonnegative")
        if not self.r_bar > 0:
            raise ValueError("r_bar must be positive")


def net_thrust(a, g_bar=9.81):
    """Mass-normalized net thrust: acceleration plus gravity along e3."""
    tau = np.asarray(a, dtype=float).copy()
    tau[2] += g_bar
    return tau


def zb_from_thrust(tau):
    """Unit body z-axis aligned with the thrust vector."""
    tau = np.asarray(tau, dtype=float)
    norm = np.linalg.norm(tau)
    if norm < HOPF_SINGULARITY_TOL:
        raise DegenerateThrustError("thrust norm too small to normalize")
    return tau / norm


def f_dn(x):
    """Jacobian of the normalization map y -> y/||y|| at x.

    Symmetric, and annihilates x itself.
    """
    x = np.asarray(x, dtype=float)
    sq = float(x @ x)
    if sq < HOPF_SINGULARITY_TOL**2:
        raise DegenerateThrustError("cannot differentiate normalization at ~0")
    return (np.eye(3) - np.outer(x, x) / sq) / np.sqrt(sq)


def zb_dot(tau, j):
    """Time derivative of the body z-axis; always orthogonal to z_b."""
    return f_dn(tau) @ np.asarray(j, dtype=float)


def body_rate_sq(tau, j):
    """Squared body rate omega_1^2 + omega_2^2 = ||zb_dot||^2 (yaw rate ignored)."""
    zd = zb_dot(tau, j)
    return float(zd @ zd)


def quat_from_zb(zb):
    """Yaw-free unit quaternion (w, x, y, z) rotating e3 onto z_b."""
    a, b, c = np.asarray(zb, dtype=float)
    if 1.0 + c <= HOPF_SINGULARITY_TOL:
        raise HopfSingularityError("body axis too close to -e3")
    q = np.array([1.0 + c, -b, a, 0.0])
    return q / np.sqrt(2.0 * (1.0 + c))


def rotation_from_quat(q):
    """3x3 rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def disc_basis_in_world(zb):
    """2x3 matrix B^T R^T whose rows span the underside-disc plane.

    Closed form in the components of z_b; rows are orthonormal and
    orthogonal to z_b.
    """
    a, b, c = np.asarray(zb, dtype=float)
    if 1.0 + c <= HOPF_SINGULARITY_TOL:
        raise HopfSingularityError("body axis too close to -e3")
    s = 1.0 / (1.0 + c)
    return np.array(
        [
            [1.0 - a * a * s, -a * b * s, -a],
            [-a * b * s, 1.0 - b * b * s, -b],
        ]
    )

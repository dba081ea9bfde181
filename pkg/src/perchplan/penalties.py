"""Continuous-time constraints as smoothed penalties with analytic gradients.

Each ``g_*`` function evaluates one penalty at a single flat state and
returns the value together with its gradients with respect to the flat
derivatives it depends on.  ``accumulate`` integrates all of them over a
spline with trapezoidal quadrature and back-propagates to coefficient and
duration gradients; the hot loop lives in :mod:`perchplan.kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flatness import disc_basis_in_world, f_dn, net_thrust, zb_from_thrust
from .smoothing import SmoothingParams, l_eps, l_mu

# Below TAU_DEGENERATE the thrust is treated as degenerate and replaced by
# a quadratic barrier pushing it away from zero; below HOPF_BARRIER of
# 1 + z_b[2] the disc orientation is undefined (Hopf singularity) and the
# collision sample falls back to a barrier.
from ._kernels_np import HOPF_BARRIER, TAU_DEGENERATE  # noqa: E402
from . import kernels


@dataclass(frozen=True)
class ActuatorLimits:
    """Speed, body-rate, thrust, and altitude limits."""

    v_max: float = 6.0
    omega_max: float = 3.0
    tau_min: float = 5.0
    tau_max: float = 15.0
    z_min: float = 0.0

    def __post_init__(self):
        if not self.v_max > 0 or not self.omega_max > 0:
            raise ValueError("v_max and omega_max must be positive")
        if not 0 < self.tau_min < self.tau_max:
            raise ValueError("need 0 < tau_min < tau_max")
        if self.z_min < 0:
            raise ValueError("z_min must be nonnegative")


@dataclass(frozen=True)
class PenaltyWeights:
    """Weights of the penalty terms plus the time regularization rho."""

    w_tau: float = 1e4
    w_omega: float = 1e4
    w_v: float = 1e4
    w_g: float = 1e4
    w_c: float = 1e4
    w_t: float = 1.0
    rho_time: float = 1.0

    def __post_init__(self):
        for name in ("w_tau", "w_omega", "w_v", "w_g", "w_c", "w_t", "rho_time"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class QuadratureSpec:
    """Trapezoidal quadrature resolution per spline piece."""

    kappa: int = 16

    def __post_init__(self):
        if self.kappa < 2:
            raise ValueError("kappa must be at least 2")

    def weights(self):
        w = np.ones(self.kappa + 1)
        w[0] = w[-1] = 0.5
        return w


def g_thrust(state, limits: ActuatorLimits, mu, g_bar=9.81):
    """Thrust-magnitude penalty; returns (value, d/da)."""
    tau = net_thrust(state.a, g_bar)
    sq = float(tau @ tau)
    v_hi, d_hi = l_mu(sq - limits.tau_max**2, mu)
    v_lo, d_lo = l_mu(limits.tau_min**2 - sq, mu)
    return v_hi + v_lo, (d_hi - d_lo) * 2.0 * tau


def g_bodyrate(state, limits: ActuatorLimits, mu, g_bar=9.81):
    """Body-rate penalty; returns (value, d/da, d/dj)."""
    tau = net_thrust(state.a, g_bar)
    j = state.j
    n_sq = float(tau @ tau)
    jj = float(j @ j)
    tj = float(tau @ j)
    sigma = jj / n_sq - tj * tj / n_sq**2
    value, deriv = l_mu(sigma - limits.omega_max**2, mu)
    dsig_da = (-2.0 * jj / n_sq**2 + 4.0 * tj * tj / n_sq**3) * tau - 2.0 * tj / n_sq**2 * j
    dsig_dj = 2.0 * j / n_sq - 2.0 * tj / n_sq**2 * tau
    return value, deriv * dsig_da, deriv * dsig_dj


def g_velocity(state, limits: ActuatorLimits, mu):
    """Speed penalty; returns (value, d/dv)."""
    sq = float(state.v @ state.v)
    value, deriv = l_mu(sq - limits.v_max**2, mu)
    return value, deriv * 2.0 * state.v


def g_ground(state, limits: ActuatorLimits, mu):
    """Ground-clearance penalty; returns (value, d/dp)."""
    value, deriv = l_mu(limits.z_min - float(state.p[2]), mu)
    grad = np.zeros(3)
    grad[2] = -deriv
    return value, grad


def support_margin(state, platform, t, geometry):
    """Signed support margin F1 of the underside disc against the half-space.

    F1 <= 0 iff the whole disc lies on the landing side.  Returns
    (F1, dF1/dp, dF1/da).
    """
    a_hs, b_hs, _ = platform.halfspace(t)
    tau = net_thrust(state.a, geometry.g_bar)
    zb = zb_from_thrust(tau)
    M = disc_basis_in_world(zb)
    w = M @ a_hs
    wn = float(np.linalg.norm(w))
    center = state.p - geometry.l_bar * zb
    F1 = geometry.r_bar * wn + float(a_hs @ center) - b_hs

    dF1_dzb = -geometry.l_bar * a_hs
    if wn > 1e-12:
        dF1_dzb = dF1_dzb + geometry.r_bar * _disc_matrix_jac(zb, a_hs).T @ (w / wn)
    dF1_da = f_dn(tau) @ dF1_dzb
    return F1, a_hs.copy(), dF1_da


def _disc_matrix_jac(zb, a_hs):
    """Jacobian of w = (B^T R^T) a_hs with respect to z_b; (2, 3)."""
    x, y, z = zb
    s = 1.0 / (1.0 + z)
    a1, a2, a3 = a_hs
    jac = np.empty((2, 3))
    # w1 = (1 - x^2 s) a1 - x y s a2 - x a3
    jac[0, 0] = -2.0 * x * s * a1 - y * s * a2 - a3
    jac[0, 1] = -x * s * a2
    jac[0, 2] = x * x * s * s * a1 + x * y * s * s * a2
    # w2 = -x y s a1 + (1 - y^2 s) a2 - y a3
    jac[1, 0] = -y * s * a1
    jac[1, 1] = -x * s * a1 - 2.0 * y * s * a2 - a3
    jac[1, 2] = x * y * s * s * a1 + y * y * s * s * a2
    return jac


def g_collision(state, platform, t, geometry, smoothing: SmoothingParams):
    """Platform collision penalty gated by proximity.

    The half-space violation is smoothed by L_mu and multiplied by a
    proximity gate L_eps[d_bar^2 - ||p - rho||^2] that is ~1 near the
    platform and ~0 far away.  Returns (value, d/dp, d/da).
    """
    F1, dF1_dp, dF1_da = support_margin(state, platform, t, geometry)
    rho, _ = platform.predict(t)
    rel = state.p - rho
    F2a = platform.spec.d_bar**2 - float(rel @ rel)
    pen, dpen = l_mu(F1, smoothing.mu)
    gate, dgate = l_eps(F2a, smoothing.eps)
    value = pen * gate
    dp = dpen * gate * dF1_dp + pen * dgate * (-2.0 * rel)
    da = dpen * gate * dF1_da
    return value, dp, da


def accumulate(spline, platform, limits, weights, quad, smoothing, geometry):
    """Trapezoidal quadrature of all weighted penalties over a spline.

    Returns (costs, dF_dc, dF_dT) where costs is a dict of the weighted
    penalty integrals keyed by star name, dF_dc is (N, 8, 3), and dF_dT
    holds partials with respect to each piece duration.
    """
    costs, dF_dc, dF_dT = kernels.accumulate_penalties(
        spline.coeffs,
        spline.T_piece,
        quad.kappa,
        platform.rho0,
        platform.vel,
        platform.spec.z_d,
        platform.spec.d_bar,
        limits,
        weights,
        smoothing,
        geometry,
    )
    names = ("tau", "omega", "v", "g", "c")
    return dict(zip(names, costs)), dF_dc, dF_dT

"""Vectorized numpy implementation of the penalty quadrature kernel.

Pure-Python fallback for the compiled extension; both implement the same
contract and are cross-checked in the test suite.
"""

from __future__ import annotations

from math import factorial

import numpy as np

# Thrust-degeneracy and Hopf-singularity cutoffs; re-exported by
# perchplan.penalties as the canonical location.
TAU_DEGENERATE = 1e-2
HOPF_BARRIER = 1e-3

_E3 = np.array([0.0, 0.0, 1.0])


def _l_mu_arr(x, mu):
    cubic = (mu - 0.5 * x) * (x / mu) ** 3
    dcubic = -0.5 * (x / mu) ** 3 + 3.0 * (mu - 0.5 * x) * x * x / mu**3
    value = np.where(x <= 0.0, 0.0, np.where(x <= mu, cubic, x - 0.5 * mu))
    deriv = np.where(x <= 0.0, 0.0, np.where(x <= mu, dcubic, 1.0))
    return value, deriv


def _l_eps_arr(x, eps):
    k = 1.0 / (2.0 * eps**4)
    lo_v = k * (x + eps) ** 3 * (eps - x)
    lo_d = k * (3.0 * (x + eps) ** 2 * (eps - x) - (x + eps) ** 3)
    hi_v = k * (x - eps) ** 3 * (eps + x) + 1.0
    hi_d = k * (3.0 * (x - eps) ** 2 * (eps + x) + (x - eps) ** 3)
    value = np.where(
        x <= -eps, 0.0, np.where(x <= 0.0, lo_v, np.where(x <= eps, hi_v, 1.0))
    )
    deriv = np.where(
        x <= -eps, 0.0, np.where(x <= 0.0, lo_d, np.where(x <= eps, hi_d, 0.0))
    )
    return value, deriv


def _basis(t_samples, order):
    """(kappa+1, 8) basis derivative rows at the given local times."""
    B = np.zeros((t_samples.size, 8))
    for i in range(order, 8):
        B[:, i] = factorial(i) / factorial(i - order) * t_samples ** (i - order)
    return B


def accumulate_penalties(
    coeffs,
    T_piece,
    kappa,
    plat_pos0,
    plat_vel,
    z_d,
    d_bar,
    limits,
    weights,
    smoothing,
    geometry,
):
    """Trapezoidal quadrature of all weighted penalties and their gradients.

    Returns (costs (5,), dF_dc (N,8,3), dF_dT (N,)) with costs ordered
    (thrust, body rate, velocity, ground, collision), already weighted.
    """
    N = coeffs.shape[0]
    mu = smoothing.mu
    eps = smoothing.eps
    g_bar = geometry.g_bar
    Ti = float(T_piece)

    t_loc = np.arange(kappa + 1) / kappa * Ti
    bases = [_basis(t_loc, k) for k in range(6)]
    # Flat derivatives, shape (order, N, kappa+1, 3).
    P = np.stack([np.einsum("jc,icd->ijd", bases[k], coeffs) for k in range(5)])
    pos, vel, acc, jer, snp = P

    piece_idx = np.arange(N)[:, None]
    frac = (np.arange(kappa + 1) / kappa)[None, :]
    t_abs = (piece_idx + frac) * Ti
    rho = plat_pos0[None, None, :] + plat_vel[None, None, :] * t_abs[..., None]
    a_hs = -np.asarray(z_d, float)
    b_hs = np.einsum("k,ijk->ij", a_hs, rho)
    db_dt = float(a_hs @ plat_vel)

    tau = acc + g_bar * _E3
    tau_sq = np.einsum("ijk,ijk->ij", tau, tau)
    tau_n = np.sqrt(tau_sq)
    degenerate = tau_n < TAU_DEGENERATE
    tau_n_safe = np.where(degenerate, 1.0, tau_n)
    tau_sq_safe = np.where(degenerate, 1.0, tau_sq)

    # Per-sample penalty values and gradients w.r.t. the flat derivatives.
    G_p = np.zeros_like(pos)
    G_v = np.zeros_like(pos)
    G_a = np.zeros_like(pos)
    G_j = np.zeros_like(pos)
    # Weighted penalty value per star per sample.
    val = np.zeros((5, N, kappa + 1))

    # Thrust magnitude (with degenerate-sample barrier).
    hi_v, hi_d = _l_mu_arr(tau_sq - limits.tau_max**2, mu)
    lo_v, lo_d = _l_mu_arr(limits.tau_min**2 - tau_sq, mu)
    g_tau = np.where(degenerate, (TAU_DEGENERATE - tau_n) ** 2, hi_v + lo_v)
    coef = np.where(
        degenerate,
        -2.0 * (TAU_DEGENERATE - tau_n) / tau_n_safe,
        2.0 * (hi_d - lo_d),
    )
    dG_tau_da = coef[..., None] * tau
    val[0] = weights.w_tau * g_tau
    G_a += weights.w_tau * dG_tau_da

    # Body rate (squared, yaw ignored).
    jj = np.einsum("ijk,ijk->ij", jer, jer)
    tj = np.einsum("ijk,ijk->ij", tau, jer)
    sigma = jj / tau_sq_safe - tj * tj / tau_sq_safe**2
    om_v, om_d = _l_mu_arr(sigma - limits.omega_max**2, mu)
    om_v = np.where(degenerate, 0.0, om_v)
    om_d = np.where(degenerate, 0.0, om_d)
    dsig_da = (
        (-2.0 * jj / tau_sq_safe**2 + 4.0 * tj * tj / tau_sq_safe**3)[..., None] * tau
        - (2.0 * tj / tau_sq_safe**2)[..., None] * jer
    )
    dsig_dj = (2.0 / tau_sq_safe)[..., None] * jer - (2.0 * tj / tau_sq_safe**2)[..., None] * tau
    val[1] = weights.w_omega * om_v
    G_a += weights.w_omega * om_d[..., None] * dsig_da
    G_j += weights.w_omega * om_d[..., None] * dsig_dj

    # Speed.
    vv = np.einsum("ijk,ijk->ij", vel, vel)
    sp_v, sp_d = _l_mu_arr(vv - limits.v_max**2, mu)
    val[2] = weights.w_v * sp_v
    G_v += weights.w_v * (2.0 * sp_d)[..., None] * vel

    # Ground clearance.
    gr_v, gr_d = _l_mu_arr(limits.z_min - pos[..., 2], mu)
    val[3] = weights.w_g * gr_v
    G_p[..., 2] -= weights.w_g * gr_d

    # Platform collision: disc support margin gated by proximity.
    zb = tau / tau_n_safe[..., None]
    upside_down = (1.0 + zb[..., 2]) < HOPF_BARRIER
    bad = degenerate | upside_down
    zx, zy, zz = zb[..., 0], zb[..., 1], zb[..., 2]
    s = 1.0 / np.where(bad, 1.0, 1.0 + zz)
    a1, a2, a3 = a_hs
    w1 = (1.0 - zx * zx * s) * a1 - zx * zy * s * a2 - zx * a3
    w2 = -zx * zy * s * a1 + (1.0 - zy * zy * s) * a2 - zy * a3
    wn = np.sqrt(w1 * w1 + w2 * w2)
    wn_safe = np.where(wn < 1e-12, 1.0, wn)
    center_term = np.einsum("k,ijk->ij", a_hs, pos) - geometry.l_bar * (
        a1 * zx + a2 * zy + a3 * zz
    )
    F1 = geometry.r_bar * wn + center_term - b_hs
    rel = pos - rho
    F2a = d_bar**2 - np.einsum("ijk,ijk->ij", rel, rel)
    pen_v, pen_d = _l_mu_arr(F1, mu)
    gate_v, gate_d = _l_eps_arr(F2a, eps)

    # d||w||/dzb via the closed-form Jacobian of (B^T R^T) a_hs.
    j00 = -2.0 * zx * s * a1 - zy * s * a2 - a3
    j01 = -zx * s * a2
    j02 = zx * zx * s * s * a1 + zx * zy * s * s * a2
    j10 = -zy * s * a1
    j11 = -zx * s * a1 - 2.0 * zy * s * a2 - a3
    j12 = zx * zy * s * s * a1 + zy * zy * s * s * a2
    u1 = w1 / wn_safe
    u2 = w2 / wn_safe
    rim_grad_active = wn >= 1e-12
    rg = np.where(rim_grad_active, geometry.r_bar, 0.0)
    dF1_dzb = np.stack(
        [
            rg * (j00 * u1 + j10 * u2) - geometry.l_bar * a1,
            rg * (j01 * u1 + j11 * u2) - geometry.l_bar * a2,
            rg * (j02 * u1 + j12 * u2) - geometry.l_bar * a3,
        ],
        axis=-1,
    )
    # f_dn(tau) applied: (v - zb (zb.v)) / ||tau||.
    zb_dot_v = np.einsum("ijk,ijk->ij", zb, dF1_dzb)
    dF1_da = (dF1_dzb - zb * zb_dot_v[..., None]) / tau_n_safe[..., None]

    coll_v = np.where(bad, 0.0, pen_v * gate_v)
    coll_dp = np.where(bad[..., None], 0.0, (pen_d * gate_v)[..., None] * a_hs
                       + (pen_v * gate_d)[..., None] * (-2.0 * rel))
    coll_da = np.where(bad[..., None], 0.0, (pen_d * gate_v)[..., None] * dF1_da)
    coll_dt = np.where(bad, 0.0, pen_d * gate_v * (-db_dt)
                       + pen_v * gate_d * 2.0 * np.einsum("ijk,k->ij", rel, plat_vel))

    # Hopf-singularity barrier keeps the body axis away from -e3.
    c_tilde = zz
    barrier = np.where(
        upside_down & ~degenerate, (HOPF_BARRIER - (1.0 + c_tilde)) ** 2, 0.0
    )
    bar_coef = np.where(
        upside_down & ~degenerate, -2.0 * (HOPF_BARRIER - (1.0 + c_tilde)), 0.0
    )
    # dc_tilde/dtau = (e3 - c_tilde * zb) / ||tau||.
    dbar_da = bar_coef[..., None] * (_E3 - c_tilde[..., None] * zb) / tau_n_safe[..., None]

    val[4] = weights.w_c * (coll_v + barrier)
    G_p += weights.w_c * coll_dp
    G_a += weights.w_c * (coll_da + dbar_da)
    G_plat_dt = weights.w_c * coll_dt

    # Quadrature accumulation.
    wbar = np.ones(kappa + 1)
    wbar[0] = wbar[-1] = 0.5
    scale = Ti / kappa
    costs = scale * np.einsum("j,sij->s", wbar, val)

    dF_dc = np.zeros_like(coeffs)
    for k, grad in enumerate((G_p, G_v, G_a, G_j)):
        dF_dc += scale * np.einsum("j,jc,ijd->icd", wbar, bases[k], grad)

    # Time gradient: explicit T factor, sample-time drift within the piece,
    # and platform drift from all later pieces' absolute times.
    g_state = (
        np.einsum("ijk,ijk->ij", G_p, vel)
        + np.einsum("ijk,ijk->ij", G_v, acc)
        + np.einsum("ijk,ijk->ij", G_a, jer)
        + np.einsum("ijk,ijk->ij", G_j, snp)
    )
    total_val = val.sum(axis=0)
    dF_dT = (1.0 / kappa) * total_val @ wbar
    dF_dT += scale * ((g_state + G_plat_dt) * frac) @ wbar
    S = scale * G_plat_dt @ wbar
    suffix = np.concatenate([np.cumsum(S[::-1])[::-1][1:], [0.0]])
    dF_dT += suffix

    return costs, dF_dc, dF_dT

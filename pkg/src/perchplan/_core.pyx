# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled penalty quadrature kernel.

Scalar per-sample loop mirroring perchplan._kernels_np exactly; built as
an optional extension and selected at import in perchplan.kernels.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

DEF TAU_DEGENERATE = 1e-2
DEF HOPF_BARRIER = 1e-3


cdef inline void l_mu_c(double x, double mu, double* v, double* d) nogil:
    cdef double r
    if x <= 0.0:
        v[0] = 0.0
        d[0] = 0.0
    elif x <= mu:
        r = x / mu
        v[0] = (mu - 0.5 * x) * r * r * r
        d[0] = -0.5 * r * r * r + 3.0 * (mu - 0.5 * x) * x * x / (mu * mu * mu)
    else:
        v[0] = x - 0.5 * mu
        d[0] = 1.0


cdef inline void l_eps_c(double x, double eps, double* v, double* d) nogil:
    cdef double k = 1.0 / (2.0 * eps * eps * eps * eps)
    cdef double a
    if x <= -eps:
        v[0] = 0.0
        d[0] = 0.0
    elif x <= 0.0:
        a = x + eps
        v[0] = k * a * a * a * (eps - x)
        d[0] = k * (3.0 * a * a * (eps - x) - a * a * a)
    elif x <= eps:
        a = x - eps
        v[0] = k * a * a * a * (eps + x) + 1.0
        d[0] = k * (3.0 * a * a * (eps + x) + a * a * a)
    else:
        v[0] = 1.0
        d[0] = 0.0


def accumulate_penalties(
    cnp.ndarray[cnp.float64_t, ndim=3] coeffs,
    double T_piece,
    int kappa,
    object plat_pos0,
    object plat_vel,
    object z_d,
    double d_bar,
    double v_max,
    double omega_max,
    double tau_min,
    double tau_max,
    double z_min,
    double w_tau,
    double w_omega,
    double w_v,
    double w_g,
    double w_c,
    double mu,
    double eps,
    double g_bar,
    double l_bar,
    double r_bar,
):
    cdef int N = coeffs.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p0 = np.ascontiguousarray(plat_pos0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pv = np.ascontiguousarray(plat_vel, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] zd = np.ascontiguousarray(z_d, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] costs = np.zeros(5)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] dF_dc = np.zeros((N, 8, 3))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dF_dT = np.zeros(N)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] S_plat = np.zeros(N)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] cc = np.ascontiguousarray(coeffs, dtype=np.float64)

    cdef double a1 = -zd[0], a2 = -zd[1], a3 = -zd[2]
    cdef double db_dt = a1 * pv[0] + a2 * pv[1] + a3 * pv[2]
    cdef double scale = T_piece / kappa

    cdef double[5][3] P        # flat derivatives order 0..4
    cdef double[4][3] G        # gradients w.r.t. p, v, a, j
    cdef double basis[6][8]
    cdef int i, j, k, d, m, o
    cdef double t_loc, t_abs, wbar, tp, fac
    cdef double tau0, tau1, tau2, tau_sq, tau_n
    cdef double hi_v, hi_d, lo_v, lo_d, coefd
    cdef double jj, tj, sigma, om_v, om_d, ds0, ds1, ds2, dj0, dj1, dj2
    cdef double vv, sp_v, sp_d, z, gr_v, gr_d
    cdef double rho0, rho1, rho2, b_hs
    cdef double zbx, zby, zbz, s
    cdef double w1, w2, wn, wn_safe, u1, u2, rg
    cdef double center_term, F1, rel0, rel1, rel2, F2a
    cdef double pen_v, pen_d, gate_v, gate_d
    cdef double j00, j01, j02, j10, j11, j12
    cdef double dz0, dz1, dz2, zdv, da0, da1, da2
    cdef double coll_v, g_plat_dt, bar, bar_coef
    cdef double sample_val, g_state
    cdef bint degenerate, upside

    for i in range(N):
        for j in range(kappa + 1):
            t_loc = (<double>j / kappa) * T_piece
            t_abs = (i + <double>j / kappa) * T_piece
            wbar = 0.5 if (j == 0 or j == kappa) else 1.0

            # basis rows, orders 0..5
            for o in range(6):
                for k in range(8):
                    basis[o][k] = 0.0
            for k in range(8):
                basis[0][k] = t_loc ** k if k > 0 else 1.0
            for o in range(1, 6):
                for k in range(o, 8):
                    fac = 1.0
                    for m in range(k, k - o, -1):
                        fac *= m
                    basis[o][k] = fac * (t_loc ** (k - o) if k > o else 1.0)

            for o in range(5):
                for d in range(3):
                    tp = 0.0
                    for k in range(8):
                        tp += basis[o][k] * cc[i, k, d]
                    P[o][d] = tp
            for o in range(4):
                for d in range(3):
                    G[o][d] = 0.0

            tau0 = P[2][0]
            tau1 = P[2][1]
            tau2 = P[2][2] + g_bar
            tau_sq = tau0 * tau0 + tau1 * tau1 + tau2 * tau2
            tau_n = sqrt(tau_sq)
            degenerate = tau_n < TAU_DEGENERATE

            sample_val = 0.0
            g_plat_dt = 0.0

            # thrust
            if degenerate:
                hi_v = (TAU_DEGENERATE - tau_n) ** 2
                coefd = -2.0 * (TAU_DEGENERATE - tau_n) / (tau_n if tau_n > 0.0 else 1.0)
                costs[0] += scale * wbar * w_tau * hi_v
                sample_val += w_tau * hi_v
                G[2][0] += w_tau * coefd * tau0
                G[2][1] += w_tau * coefd * tau1
                G[2][2] += w_tau * coefd * tau2
            else:
                l_mu_c(tau_sq - tau_max * tau_max, mu, &hi_v, &hi_d)
                l_mu_c(tau_min * tau_min - tau_sq, mu, &lo_v, &lo_d)
                costs[0] += scale * wbar * w_tau * (hi_v + lo_v)
                sample_val += w_tau * (hi_v + lo_v)
                coefd = 2.0 * (hi_d - lo_d)
                G[2][0] += w_tau * coefd * tau0
                G[2][1] += w_tau * coefd * tau1
                G[2][2] += w_tau * coefd * tau2

                # body rate
                jj = P[3][0] * P[3][0] + P[3][1] * P[3][1] + P[3][2] * P[3][2]
                tj = tau0 * P[3][0] + tau1 * P[3][1] + tau2 * P[3][2]
                sigma = jj / tau_sq - tj * tj / (tau_sq * tau_sq)
                l_mu_c(sigma - omega_max * omega_max, mu, &om_v, &om_d)
                costs[1] += scale * wbar * w_omega * om_v
                sample_val += w_omega * om_v
                coefd = -2.0 * jj / (tau_sq * tau_sq) + 4.0 * tj * tj / (tau_sq * tau_sq * tau_sq)
                ds0 = coefd * tau0 - 2.0 * tj / (tau_sq * tau_sq) * P[3][0]
                ds1 = coefd * tau1 - 2.0 * tj / (tau_sq * tau_sq) * P[3][1]
                ds2 = coefd * tau2 - 2.0 * tj / (tau_sq * tau_sq) * P[3][2]
                dj0 = 2.0 / tau_sq * P[3][0] - 2.0 * tj / (tau_sq * tau_sq) * tau0
                dj1 = 2.0 / tau_sq * P[3][1] - 2.0 * tj / (tau_sq * tau_sq) * tau1
                dj2 = 2.0 / tau_sq * P[3][2] - 2.0 * tj / (tau_sq * tau_sq) * tau2
                G[2][0] += w_omega * om_d * ds0
                G[2][1] += w_omega * om_d * ds1
                G[2][2] += w_omega * om_d * ds2
                G[3][0] += w_omega * om_d * dj0
                G[3][1] += w_omega * om_d * dj1
                G[3][2] += w_omega * om_d * dj2

            # speed
            vv = P[1][0] * P[1][0] + P[1][1] * P[1][1] + P[1][2] * P[1][2]
            l_mu_c(vv - v_max * v_max, mu, &sp_v, &sp_d)
            costs[2] += scale * wbar * w_v * sp_v
            sample_val += w_v * sp_v
            G[1][0] += w_v * 2.0 * sp_d * P[1][0]
            G[1][1] += w_v * 2.0 * sp_d * P[1][1]
            G[1][2] += w_v * 2.0 * sp_d * P[1][2]

            # ground
            l_mu_c(z_min - P[0][2], mu, &gr_v, &gr_d)
            costs[3] += scale * wbar * w_g * gr_v
            sample_val += w_g * gr_v
            G[0][2] -= w_g * gr_d

            # platform collision / Hopf barrier
            rho0 = p0[0] + pv[0] * t_abs
            rho1 = p0[1] + pv[1] * t_abs
            rho2 = p0[2] + pv[2] * t_abs
            b_hs = a1 * rho0 + a2 * rho1 + a3 * rho2
            if not degenerate:
                zbx = tau0 / tau_n
                zby = tau1 / tau_n
                zbz = tau2 / tau_n
                upside = (1.0 + zbz) < HOPF_BARRIER
                if upside:
                    bar = (HOPF_BARRIER - (1.0 + zbz)) ** 2
                    bar_coef = -2.0 * (HOPF_BARRIER - (1.0 + zbz))
                    costs[4] += scale * wbar * w_c * bar
                    sample_val += w_c * bar
                    # dzbz/dtau = (e3 - zbz*zb)/||tau||
                    G[2][0] += w_c * bar_coef * (-zbz * zbx) / tau_n
                    G[2][1] += w_c * bar_coef * (-zbz * zby) / tau_n
                    G[2][2] += w_c * bar_coef * (1.0 - zbz * zbz) / tau_n
                else:
                    s = 1.0 / (1.0 + zbz)
                    w1 = (1.0 - zbx * zbx * s) * a1 - zbx * zby * s * a2 - zbx * a3
                    w2 = -zbx * zby * s * a1 + (1.0 - zby * zby * s) * a2 - zby * a3
                    wn = sqrt(w1 * w1 + w2 * w2)
                    wn_safe = wn if wn >= 1e-12 else 1.0
                    center_term = (
                        a1 * P[0][0] + a2 * P[0][1] + a3 * P[0][2]
                        - l_bar * (a1 * zbx + a2 * zby + a3 * zbz)
                    )
                    F1 = r_bar * wn + center_term - b_hs
                    rel0 = P[0][0] - rho0
                    rel1 = P[0][1] - rho1
                    rel2 = P[0][2] - rho2
                    F2a = d_bar * d_bar - (rel0 * rel0 + rel1 * rel1 + rel2 * rel2)
                    l_mu_c(F1, mu, &pen_v, &pen_d)
                    l_eps_c(F2a, eps, &gate_v, &gate_d)
                    coll_v = pen_v * gate_v
                    costs[4] += scale * wbar * w_c * coll_v
                    sample_val += w_c * coll_v

                    j00 = -2.0 * zbx * s * a1 - zby * s * a2 - a3
                    j01 = -zbx * s * a2
                    j02 = zbx * zbx * s * s * a1 + zbx * zby * s * s * a2
                    j10 = -zby * s * a1
                    j11 = -zbx * s * a1 - 2.0 * zby * s * a2 - a3
                    j12 = zbx * zby * s * s * a1 + zby * zby * s * s * a2
                    u1 = w1 / wn_safe
                    u2 = w2 / wn_safe
                    rg = r_bar if wn >= 1e-12 else 0.0
                    dz0 = rg * (j00 * u1 + j10 * u2) - l_bar * a1
                    dz1 = rg * (j01 * u1 + j11 * u2) - l_bar * a2
                    dz2 = rg * (j02 * u1 + j12 * u2) - l_bar * a3
                    zdv = zbx * dz0 + zby * dz1 + zbz * dz2
                    da0 = (dz0 - zbx * zdv) / tau_n
                    da1 = (dz1 - zby * zdv) / tau_n
                    da2 = (dz2 - zbz * zdv) / tau_n

                    G[0][0] += w_c * (pen_d * gate_v * a1 + pen_v * gate_d * (-2.0 * rel0))
                    G[0][1] += w_c * (pen_d * gate_v * a2 + pen_v * gate_d * (-2.0 * rel1))
                    G[0][2] += w_c * (pen_d * gate_v * a3 + pen_v * gate_d * (-2.0 * rel2))
                    G[2][0] += w_c * pen_d * gate_v * da0
                    G[2][1] += w_c * pen_d * gate_v * da1
                    G[2][2] += w_c * pen_d * gate_v * da2
                    g_plat_dt += w_c * (
                        pen_d * gate_v * (-db_dt)
                        + pen_v * gate_d * 2.0 * (rel0 * pv[0] + rel1 * pv[1] + rel2 * pv[2])
                    )

            # coefficient gradient accumulation
            for o in range(4):
                for k in range(8):
                    if basis[o][k] != 0.0:
                        for d in range(3):
                            dF_dc[i, k, d] += scale * wbar * basis[o][k] * G[o][d]

            # time gradient pieces
            g_state = 0.0
            for o in range(4):
                for d in range(3):
                    g_state += G[o][d] * P[o + 1][d]
            dF_dT[i] += (1.0 / kappa) * wbar * sample_val
            dF_dT[i] += scale * wbar * (<double>j / kappa) * (g_state + g_plat_dt)
            S_plat[i] += scale * wbar * g_plat_dt

    # platform drift of later pieces' absolute sample times
    cdef double suffix = 0.0
    for i in range(N - 1, -1, -1):
        dF_dT[i] += suffix
        suffix += S_plat[i]

    return costs, dF_dc, dF_dT


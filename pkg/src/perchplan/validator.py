"""Independent verification of planned trajectories.

Everything here deliberately avoids the solver's smoothing machinery:
constraints are evaluated exactly on a dense time grid, gradients are
audited against central finite differences, and the disc support margin
is checked against brute-force rim sampling.  The report produced by
:func:`check` is the arbiter in the acceptance tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .flatness import E3
from .optimizer import cost_and_grad, initial_guess
from .scenario import ScenarioConfig
from .terminal import tangent_basis


@dataclass
class ConstraintReport:
    """Worst-case violations of every constraint plus terminal residuals.

    Violations are in natural units (m/s, m/s^2, rad/s, m) and clipped at
    zero; ``times`` holds the sample time of each worst case.
    """

    violations: dict = field(default_factory=dict)
    times: dict = field(default_factory=dict)
    min_altitude: float = np.inf
    duration: float = 0.0
    terminal_position_error: float = 0.0
    terminal_normal_velocity_error: float = 0.0
    terminal_zb_angle: float = 0.0
    terminal_jerk: float = 0.0

    def passed(self, slack=0.05):
        """True iff every constraint violation is within the slack."""
        return all(v <= slack for v in self.violations.values())

    def worst(self):
        """(name, violation) of the largest violation."""
        name = max(self.violations, key=self.violations.get)
        return name, self.violations[name]

    def to_dict(self):
        return {
            "violations": {k: float(v) for k, v in self.violations.items()},
            "times": {k: float(v) for k, v in self.times.items()},
            "min_altitude": float(self.min_altitude),
            "duration": float(self.duration),
            "terminal": {
                "position_error": float(self.terminal_position_error),
                "normal_velocity_error": float(self.terminal_normal_velocity_error),
                "zb_angle": float(self.terminal_zb_angle),
                "jerk": float(self.terminal_jerk),
            },
            "passed": bool(self.passed()),
        }


def _flat_quantities(spline, times, g_bar):
    """Sampled position/velocity/thrust/body-rate arrays along the spline."""
    S = spline.sample(times, max_order=3)
    pos, vel, acc, jer = S[:, 0], S[:, 1], S[:, 2], S[:, 3]
    tau = acc + g_bar * E3
    tau_n = np.linalg.norm(tau, axis=1)
    safe = np.maximum(tau_n, 1e-12)
    jj = np.einsum("ij,ij->i", jer, jer)
    tj = np.einsum("ij,ij->i", tau, jer)
    sigma = np.maximum(jj / safe**2 - tj**2 / safe**4, 0.0)
    omega = np.sqrt(sigma)
    return pos, vel, tau, jer, tau_n, omega


def _support_margins(pos, tau, tau_n, z_d, geometry):
    """Exact disc support margin F1 at every sample (vectorized)."""
    a_hs = -np.asarray(z_d, float)
    zb = tau / np.maximum(tau_n, 1e-12)[:, None]
    s = 1.0 / np.maximum(1.0 + zb[:, 2], 1e-12)
    a1, a2, a3 = a_hs
    w1 = (1.0 - zb[:, 0] ** 2 * s) * a1 - zb[:, 0] * zb[:, 1] * s * a2 - zb[:, 0] * a3
    w2 = -zb[:, 0] * zb[:, 1] * s * a1 + (1.0 - zb[:, 1] ** 2 * s) * a2 - zb[:, 1] * a3
    wn = np.hypot(w1, w2)
    center = pos - geometry.l_bar * zb
    return geometry.r_bar * wn + center @ a_hs


def check(plan, scenario: ScenarioConfig, dt=None) -> ConstraintReport:
    """Dense exact constraint check of a plan (or bare spline).

    Samples at step dt (default T/2000) and evaluates speed, thrust,
    body rate, ground clearance, and platform collision without any
    smoothing, plus the terminal pose/velocity residuals.
    """
    spline = getattr(plan, "spline", plan)
    T = spline.T_total
    n = 2000 if dt is None else max(int(np.ceil(T / dt)), 1)
    times = np.linspace(0.0, T, n + 1)

    geom = scenario.geometry
    limits = scenario.limits
    spec = scenario.perch
    pos, vel, tau, jer, tau_n, omega = _flat_quantities(spline, times, geom.g_bar)

    report = ConstraintReport()
    report.duration = T
    report.min_altitude = float(pos[:, 2].min())

    def record(name, series):
        i = int(np.argmax(series))
        report.violations[name] = float(max(series[i], 0.0))
        report.times[name] = float(times[i])

    record("velocity", np.linalg.norm(vel, axis=1) - limits.v_max)
    record("thrust_high", tau_n - limits.tau_max)
    record("thrust_low", limits.tau_min - tau_n)
    record("body_rate", omega - limits.omega_max)
    record("ground", limits.z_min - pos[:, 2])

    # Collision: the disc must stay on the landing side of the surface
    # whenever the drone is inside the proximity ball around the platform.
    rho = scenario.platform.rho0[None, :] + scenario.platform.vel[None, :] * times[:, None]
    near = np.einsum("ij,ij->i", pos - rho, pos - rho) <= spec.d_bar**2
    F1 = _support_margins(pos, tau, tau_n, spec.z_d, geom) - np.einsum(
        "ij,j->i", rho, -spec.z_d
    )
    record("collision", np.where(near, F1, -np.inf))

    # Terminal residuals.
    rho_T, rho_dot = scenario.platform.predict(T)
    p_target = rho_T + geom.l_bar * spec.z_d
    report.terminal_position_error = float(np.linalg.norm(pos[-1] - p_target))
    vn = float((rho_dot - vel[-1]) @ spec.z_d)
    report.terminal_normal_velocity_error = abs(vn - spec.v_n_bar)
    zb_T = tau[-1] / max(tau_n[-1], 1e-12)
    cosang = np.clip(float(zb_T @ spec.z_d), -1.0, 1.0)
    report.terminal_zb_angle = float(np.arccos(cosang))
    report.terminal_jerk = float(np.linalg.norm(jer[-1]))
    return report


def tangential_speed(plan, scenario: ScenarioConfig):
    """Exact tangential relative touchdown speed ||v_t|| of a plan."""
    spline = getattr(plan, "spline", plan)
    v_end = spline.eval(spline.T_total, max_order=1)[1]
    _, rho_dot = scenario.platform.predict(spline.T_total)
    V = tangent_basis(scenario.perch.z_d)
    return float(np.linalg.norm(V.T @ (v_end - rho_dot)))


def gradient_audit(scenario: ScenarioConfig, n_probes=10, h=1e-6, seed=0):
    """Worst relative error of the analytic cost gradient vs central FD.

    Probes the cold-start decision vector, random perturbations of it,
    and the all-zero vector.
    """
    rng = np.random.default_rng(seed)
    x0 = initial_guess(scenario)
    probes = [x0, np.zeros_like(x0)]
    while len(probes) < n_probes:
        probes.append(x0 + 0.1 * rng.standard_normal(x0.size))

    worst = 0.0
    for x in probes[:n_probes]:
        _, g = cost_and_grad(x, scenario)
        fd = np.empty_like(g)
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            f_hi, _ = cost_and_grad(x + e, scenario)
            f_lo, _ = cost_and_grad(x - e, scenario)
            fd[i] = (f_hi - f_lo) / (2.0 * h)
        denom = np.maximum(1.0, np.maximum(np.abs(g), np.abs(fd)))
        worst = max(worst, float(np.max(np.abs(g - fd) / denom)))
    return worst


def disc_oracle(p, a, platform, t, geometry, n_rim=3600):
    """Brute-force disc support margin from rim sampling.

    Evaluates a^T x - b over n_rim boundary points of the underside disc;
    by linearity the supremum over the full disc is attained on the rim,
    so this converges to the closed-form F1 from below.
    """
    from .flatness import disc_basis_in_world, net_thrust, zb_from_thrust

    a_hs, b_hs, _ = platform.halfspace(t)
    tau = net_thrust(np.asarray(a, float), geometry.g_bar)
    zb = zb_from_thrust(tau)
    M = disc_basis_in_world(zb)  # rows span the disc plane in world frame
    center = np.asarray(p, float) - geometry.l_bar * zb
    theta = 2.0 * np.pi * np.arange(n_rim) / n_rim
    rim = center[None, :] + geometry.r_bar * (
        np.cos(theta)[:, None] * M[0] + np.sin(theta)[:, None] * M[1]
    )
    return float(np.max(rim @ a_hs) - b_hs)

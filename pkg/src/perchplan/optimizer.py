"""Unconstrained spatio-temporal optimization of the perching trajectory.

The decision vector packs a log-duration, the spline's intermediate
points, and the free terminal variables; the cost is the snap energy plus
time regularization, the quadrature penalties, and the tangential-speed
regularizer.  A limited-memory quasi-Newton loop with a weak-Wolfe line
search minimizes it; warm starts reuse a previous decision vector.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .penalties import accumulate
from .scenario import ScenarioConfig, SolverConfig
from .spline import BoundaryState, PerchSpline, basis_row, solve_boundary_polynomial
from .terminal import TerminalVars, regularizer, terminal_state

STATUS_CONVERGED = "converged"
STATUS_MAX_ITER = "max-iterations"
STATUS_LS_FAIL = "line-search-failure"


@dataclass
class PlanResult:
    """Solved trajectory plus solver diagnostics."""

    spline: PerchSpline
    terminal: TerminalVars
    duration: float
    cost: float
    iterations: int
    wall_time: float
    status: str
    decision: np.ndarray
    penalty_costs: dict

    @property
    def converged(self):
        return self.status == STATUS_CONVERGED


def pack(T_prime, q, v_t, tau_f):
    """Flatten (T', q, v_t, tau_f) into one decision vector."""
    return np.concatenate([[T_prime], np.asarray(q, float).ravel(), np.asarray(v_t, float), [tau_f]])


def unpack(x, N):
    """Inverse of :func:`pack` for an N-piece spline."""
    nq = 3 * (N - 1)
    T_prime = float(x[0])
    q = np.asarray(x[1 : 1 + nq], float).reshape(N - 1, 3)
    v_t = np.asarray(x[1 + nq : 3 + nq], float)
    tau_f = float(x[3 + nq])
    return T_prime, q, v_t, tau_f


def cost_and_grad(x, scenario: ScenarioConfig, return_parts=False):
    """Total cost and its analytic gradient over the decision vector."""
    N = scenario.solver.pieces
    T_prime, q, v_t, tau_f = unpack(x, N)
    T = float(np.exp(T_prime))

    term = terminal_state(v_t, tau_f, scenario.platform, scenario.geometry, scenario.limits, T)
    spline = PerchSpline.build(scenario.initial, term.boundary, q, T)

    energy, dE_dc, dE_dT = spline.energy_cost()
    pen_costs, dP_dc, dP_dT = accumulate(
        spline,
        scenario.platform,
        scenario.limits,
        scenario.weights,
        scenario.quadrature,
        scenario.smoothing,
        scenario.geometry,
    )
    J_t, dJt_dvt = regularizer(v_t)
    w = scenario.weights
    J = energy + w.rho_time * T + sum(pen_costs.values()) + w.w_t * J_t

    dJ_dq, dJ_dT, dJ_dbcT = spline.propagate_gradient(dE_dc + dP_dc, dE_dT + dP_dT)
    g_T = dJ_dT + w.rho_time + float(dJ_dbcT[0] @ term.dp_dT) + float(dJ_dbcT[1] @ term.dv_dT)
    g = np.empty(x.size)
    g[0] = g_T * T
    g[1 : 3 * N - 2] = dJ_dq.ravel()
    g[3 * N - 2 : 3 * N] = term.dv_dvt.T @ dJ_dbcT[1] + w.w_t * dJt_dvt
    g[3 * N] = float(dJ_dbcT[2] @ term.da_dtauf)
    if return_parts:
        parts = dict(pen_costs)
        parts["energy"] = energy
        parts["time"] = w.rho_time * T
        parts["t"] = w.w_t * J_t
        return J, g, parts, spline
    return J, g


def default_initial_duration(scenario: ScenarioConfig):
    """Duration guess scaling with distance; at least one second."""
    term_p = scenario.platform.rho0 + scenario.geometry.l_bar * scenario.perch.z_d
    dist = float(np.linalg.norm(term_p - scenario.initial.p))
    return max(1.0, 2.0 * dist / scenario.limits.v_max)


def initial_guess(scenario: ScenarioConfig):
    """Cold-start decision vector.

    v_t starts at zero and tau_f at the mid-thrust phase; the intermediate
    points sample the degree-7 boundary value problem between the initial
    state and the implied terminal state.
    """
    N = scenario.solver.pieces
    v_t0 = np.zeros(2)
    tau_f0 = 0.0
    if scenario.solver.initial_duration is not None:
        T0 = float(scenario.solver.initial_duration)
    else:
        T0 = default_initial_duration(scenario)

    term = terminal_state(v_t0, tau_f0, scenario.platform, scenario.geometry, scenario.limits, T0)
    poly = solve_boundary_polynomial(scenario.initial, term.boundary, T0)
    knots = np.arange(1, N) * (T0 / N)
    q = np.stack([basis_row(t, 0) @ poly for t in knots])
    return pack(np.log(T0), q, v_t0, tau_f0)


def _safe_objective(fun, n):
    """Wrap an objective so blow-ups read as +inf instead of raising."""

    def wrapped(x):
        if not np.all(np.isfinite(x)) or abs(float(x[0])) > 30.0:
            return np.inf, np.zeros(n)
        try:
            f, g = fun(x)
        except (ValueError, FloatingPointError):
            return np.inf, np.zeros(n)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            return np.inf, np.zeros(n)
        return f, g

    return wrapped


def _weak_wolfe_search(fun, x, f0, g0, direction, c1, c2, max_steps=60):
    """Bisection line search for the weak Wolfe conditions.

    Returns (alpha, x_new, f_new, g_new, ok).
    """
    d_dot_g0 = float(g0 @ direction)
    alpha, lo, hi = 1.0, 0.0, np.inf
    best = None
    for _ in range(max_steps):
        x_new = x + alpha * direction
        f_new, g_new = fun(x_new)
        if not np.isfinite(f_new):
            hi = alpha
            alpha = 0.5 * (lo + hi)
            continue
        if f_new > f0 + c1 * alpha * d_dot_g0:
            hi = alpha
        elif float(g_new @ direction) < c2 * d_dot_g0:
            lo = alpha
            best = (alpha, x_new, f_new, g_new)
        else:
            return alpha, x_new, f_new, g_new, True
        alpha = 2.0 * lo if np.isinf(hi) else 0.5 * (lo + hi)
    if best is not None:
        # Sufficient decrease held; accept despite the flat curvature check.
        return best + (True,)
    return alpha, x, f0, g0, False


def _lbfgs(fun, x0, config: SolverConfig):
    """Limited-memory quasi-Newton minimization of fun(x) -> (f, g)."""
    x = np.asarray(x0, float).copy()
    fun = _safe_objective(fun, x.size)
    f, g = fun(x)
    mem_s, mem_y = [], []
    status = STATUS_MAX_ITER
    iteration = 0
    for iteration in range(config.max_iterations):
        if np.max(np.abs(g)) <= config.gradient_tolerance * max(1.0, np.max(np.abs(x))):
            status = STATUS_CONVERGED
            break

        # Two-loop recursion.
        direction = -g.copy()
        alphas = []
        for s, y in reversed(list(zip(mem_s, mem_y))):
            rho = 1.0 / float(y @ s)
            a = rho * float(s @ direction)
            direction -= a * y
            alphas.append((a, rho))
        if mem_s:
            s, y = mem_s[-1], mem_y[-1]
            direction *= float(s @ y) / float(y @ y)
        else:
            # No curvature information yet: unit first step.
            direction /= max(1.0, float(np.linalg.norm(direction)))
        for (a, rho), (s, y) in zip(reversed(alphas), zip(mem_s, mem_y)):
            b = rho * float(y @ direction)
            direction += (a - b) * s

        if float(g @ direction) >= 0.0:
            direction = -g.copy()

        _, x_new, f_new, g_new, ok = _weak_wolfe_search(
            fun, x, f, g, direction, config.c_armijo, config.c_curvature
        )
        if not ok:
            status = STATUS_LS_FAIL
            break

        s_vec = x_new - x
        y_vec = g_new - g
        if float(s_vec @ y_vec) > 1e-12 * float(np.linalg.norm(s_vec) * np.linalg.norm(y_vec)):
            mem_s.append(s_vec)
            mem_y.append(y_vec)
            if len(mem_s) > config.history_size:
                mem_s.pop(0)
                mem_y.pop(0)

        # Relative-decrease stopping rule: once accepted steps stop paying
        # for themselves the iterate is treated as converged.
        done = f - f_new <= config.cost_tolerance * max(1.0, abs(f))
        x, f, g = x_new, f_new, g_new
        if done:
            status = STATUS_CONVERGED
            break
    else:
        iteration = config.max_iterations
    return x, f, g, iteration, status


def solve(scenario: ScenarioConfig, config: SolverConfig = None, start=None) -> PlanResult:
    """Minimize the perching cost from a cold or warm start."""
    if config is not None:
        scenario = ScenarioConfig(
            initial=scenario.initial,
            platform=scenario.platform,
            geometry=scenario.geometry,
            limits=scenario.limits,
            weights=scenario.weights,
            smoothing=scenario.smoothing,
            quadrature=scenario.quadrature,
            solver=config,
        )
    t0 = time.perf_counter()
    x0 = initial_guess(scenario) if start is None else np.asarray(start, float).copy()

    # Diagonal preconditioning: the tangential-velocity block carries a
    # w_t-scaled quadratic, so scale it down to even out curvature.
    N = scenario.solver.pieces
    scale = np.ones(x0.size)
    scale[3 * N - 2 : 3 * N] = 1.0 / np.sqrt(max(1.0, scenario.weights.w_t))

    def objective(y):
        f, g = cost_and_grad(scale * y, scenario)
        return f, scale * g

    y, f, _, iters, status = _lbfgs(objective, x0 / scale, scenario.solver)
    x = scale * y
    wall = time.perf_counter() - t0

    _, _, parts, spline = cost_and_grad(x, scenario, return_parts=True)
    _, _, v_t, tau_f = unpack(x, scenario.solver.pieces)
    return PlanResult(
        spline=spline,
        terminal=TerminalVars(v_t=v_t, tau_f=tau_f),
        duration=spline.T_total,
        cost=f,
        iterations=iters,
        wall_time=wall,
        status=status,
        decision=x,
        penalty_costs=parts,
    )


def advance(scenario: ScenarioConfig, plan: PlanResult, dt):
    """Shift a solved problem forward by dt seconds.

    Returns (new_scenario, warm_start): the initial state re-anchored to
    the planned state at dt, the platform model advanced by dt, and a
    warm-start decision vector resampled from the previous spline.
    """
    if not 0.0 < dt < plan.duration:
        raise ValueError("dt must lie inside the planned duration")
    d = plan.spline.eval(dt, max_order=3)
    new_scenario = scenario.with_initial(
        BoundaryState(p=d[0], v=d[1], a=d[2], j=d[3])
    ).with_platform(scenario.platform.advanced(dt))

    N = scenario.solver.pieces
    T_new = plan.duration - dt
    knots = dt + np.arange(1, N) * (T_new / N)
    q = plan.spline.sample(knots, max_order=0)[:, 0, :]
    start = pack(np.log(T_new), q, plan.terminal.v_t, plan.terminal.tau_f)
    return new_scenario, start


def replan(scenario: ScenarioConfig, previous: PlanResult, config: SolverConfig = None) -> PlanResult:
    """Warm-start re-solve after the scenario moved.

    The caller is responsible for re-anchoring ``scenario.initial`` to the
    current drone state and advancing the platform model; this reuses the
    previous decision vector as the starting iterate.
    """
    return solve(scenario, config=config, start=previous.decision)

import numpy as np
import pytest

from perchplan import optimizer
from perchplan.optimizer import (
    STATUS_CONVERGED,
    _lbfgs,
    _weak_wolfe_search,
    advance,
    cost_and_grad,
    initial_guess,
    pack,
    unpack,
)
from perchplan.scenario import SolverConfig


def test_pack_unpack_roundtrip():
    rng = np.random.default_rng(0)
    N = 10
    T_prime = 1.3
    q = rng.normal(size=(N - 1, 3))
    v_t = rng.normal(size=2)
    tau_f = -0.7
    x = pack(T_prime, q, v_t, tau_f)
    assert x.shape == (3 * N + 1,)
    T2, q2, v2, t2 = unpack(x, N)
    assert T2 == T_prime
    assert np.array_equal(q2, q)
    assert np.array_equal(v2, v_t)
    assert t2 == tau_f


def test_initial_guess_interpolates(benchmark_scenario):
    x0 = initial_guess(benchmark_scenario)
    N = benchmark_scenario.solver.pieces
    T_prime, q, v_t, tau_f = unpack(x0, N)
    assert np.exp(T_prime) == pytest.approx(3.8)  # configured initial duration
    assert np.allclose(v_t, 0.0)
    assert tau_f == 0.0
    # intermediate points run from start toward the platform
    assert q[0, 0] < q[-1, 0]
    assert np.all(np.isfinite(q))


def test_cost_and_grad_finite_and_deterministic(benchmark_scenario):
    x0 = initial_guess(benchmark_scenario)
    f1, g1 = cost_and_grad(x0, benchmark_scenario)
    f2, g2 = cost_and_grad(x0, benchmark_scenario)
    assert np.isfinite(f1) and np.all(np.isfinite(g1))
    assert f1 == f2
    assert np.array_equal(g1, g2)


def test_lbfgs_on_quadratic():
    A = np.diag([1.0, 10.0, 100.0])
    b = np.array([1.0, -2.0, 3.0])

    def fun(x):
        return 0.5 * float(x @ A @ x) - float(b @ x), A @ x - b

    config = SolverConfig(pieces=2, gradient_tolerance=1e-10, cost_tolerance=1e-14)
    x, f, g, iters, status = _lbfgs(fun, np.zeros(3), config)
    assert status == STATUS_CONVERGED
    assert np.allclose(x, np.linalg.solve(A, b), atol=1e-5)


def test_line_search_decreases():
    def fun(x):
        return float(np.sum(x**4 + x**2)), 4 * x**3 + 2 * x

    x = np.array([1.0, -2.0])
    f0, g0 = fun(x)
    alpha, x_new, f_new, g_new, ok = _weak_wolfe_search(
        fun, x, f0, g0, -g0, 1e-4, 0.9
    )
    assert ok
    assert f_new < f0


def test_solver_determinism(benchmark_scenario):
    a = optimizer.solve(benchmark_scenario)
    b = optimizer.solve(benchmark_scenario)
    assert a.status == b.status
    assert a.iterations == b.iterations
    assert np.array_equal(a.decision, b.decision)
    assert a.cost == b.cost


def test_solve_reduces_cost_and_reports_parts(benchmark_scenario):
    x0 = initial_guess(benchmark_scenario)
    f0, _ = cost_and_grad(x0, benchmark_scenario)
    plan = optimizer.solve(benchmark_scenario)
    assert plan.cost < f0
    assert plan.duration == pytest.approx(plan.spline.T_total)
    expected = {"tau", "omega", "v", "g", "c", "energy", "time", "t"}
    assert set(plan.penalty_costs) == expected
    assert plan.wall_time > 0.0


def test_advance_rejects_bad_dt(benchmark_scenario):
    plan = optimizer.solve(benchmark_scenario)
    with pytest.raises(ValueError):
        advance(benchmark_scenario, plan, -0.1)
    with pytest.raises(ValueError):
        advance(benchmark_scenario, plan, plan.duration + 1.0)


def test_advance_anchors_to_planned_state(benchmark_scenario):
    plan = optimizer.solve(benchmark_scenario)
    shifted, start = advance(benchmark_scenario, plan, 0.1)
    state = plan.spline.eval(0.1, max_order=3)
    assert np.allclose(shifted.initial.p, state[0])
    assert np.allclose(shifted.initial.v, state[1])
    T_prime, _, v_t, tau_f = unpack(start, benchmark_scenario.solver.pieces)
    assert np.exp(T_prime) == pytest.approx(plan.duration - 0.1)
    assert np.array_equal(v_t, plan.terminal.v_t)
    assert tau_f == plan.terminal.tau_f


def test_safe_objective_handles_blowups(benchmark_scenario):
    x0 = initial_guess(benchmark_scenario)
    bad = x0.copy()
    bad[0] = 100.0  # absurd log-duration
    wrapped = optimizer._safe_objective(
        lambda x: cost_and_grad(x, benchmark_scenario), x0.size
    )
    f, g = wrapped(bad)
    assert np.isinf(f)
    assert np.all(g == 0.0)
    f, g = wrapped(np.full_like(x0, np.nan))
    assert np.isinf(f)

import numpy as np
import pytest

from perchplan import optimizer
from perchplan.platform import PlatformModel
from perchplan.spline import BoundaryState, PerchSpline
from perchplan.terminal import PerchSpec
from perchplan.validator import (
    check,
    disc_oracle,
    gradient_audit,
    tangential_speed,
)

from conftest import scenario


def rest(p):
    z = np.zeros(3)
    return BoundaryState(p=np.asarray(p, float), v=z, a=z, j=z)


def hover_spline(p, N=4, T=2.0):
    q = np.tile(np.asarray(p, float), (N - 1, 1))
    return PerchSpline.build(rest(p), rest(p), q, T)


def test_hover_has_no_violations(benchmark_scenario):
    spline = hover_spline([1.0, 0.0, 2.0])
    report = check(spline, benchmark_scenario)
    for name, value in report.violations.items():
        assert value == 0.0, name
    assert report.passed(slack=0.0)
    assert report.min_altitude == pytest.approx(2.0)
    # terminal residuals reflect the hover endpoint, not the platform
    assert report.terminal_position_error > 1.0
    assert report.duration == pytest.approx(2.0)


def test_overspeed_spline_flagged(benchmark_scenario):
    # 8 meters in one second must exceed the 6 m/s limit somewhere
    spline = PerchSpline.build(
        rest([0, 0, 2]), rest([8, 0, 2]), np.array([[4.0, 0.0, 2.0]]), 1.0
    )
    report = check(spline, benchmark_scenario)
    assert report.violations["velocity"] > 0.0
    # the worst sample sits near the mid-flight speed peak
    assert 0.2 < report.times["velocity"] < 0.8
    assert not report.passed()


def test_low_altitude_flagged(benchmark_scenario):
    spline = hover_spline([1.0, 0.0, 0.1])
    report = check(spline, benchmark_scenario)
    assert report.violations["ground"] == pytest.approx(0.3, abs=1e-9)
    assert report.min_altitude == pytest.approx(0.1)


def test_report_serializable(benchmark_scenario):
    plan = optimizer.solve(benchmark_scenario)
    report = check(plan, benchmark_scenario)
    data = report.to_dict()
    assert set(data) == {"violations", "times", "min_altitude", "duration", "terminal", "passed"}
    assert isinstance(data["passed"], bool)
    assert set(data["violations"]) == {
        "velocity", "thrust_high", "thrust_low", "body_rate", "ground", "collision",
    }
    for t in data["times"].values():
        assert 0.0 <= t <= plan.duration


def test_converged_benchmark_validates(benchmark_scenario):
    plan = optimizer.solve(benchmark_scenario)
    assert plan.converged
    report = check(plan, benchmark_scenario)
    assert report.passed(slack=0.05)
    assert report.terminal_position_error < 1e-9
    assert report.terminal_jerk < 1e-9
    assert report.terminal_zb_angle < 1e-9
    # rest-to-rest: no tangential touchdown speed to speak of
    assert tangential_speed(plan, benchmark_scenario) < 0.1


def test_gradient_audit_quick(benchmark_scenario):
    err = gradient_audit(benchmark_scenario, n_probes=3, seed=1)
    assert err <= 1e-4


def test_disc_oracle_resolution():
    spec = PerchSpec(z_d=np.array([0.0, 0.0, 1.0]))
    platform = PlatformModel(rho0=np.zeros(3), vel=np.zeros(3), spec=spec)
    geometry = scenario("benchmark-rest2rest").geometry
    p = np.array([0.1, -0.2, 0.3])
    a = np.array([2.0, 1.0, 0.0])
    coarse = disc_oracle(p, a, platform, 0.0, geometry, n_rim=8)
    fine = disc_oracle(p, a, platform, 0.0, geometry, n_rim=3600)
    # finer sampling approaches the supremum from below
    assert coarse <= fine + 1e-12

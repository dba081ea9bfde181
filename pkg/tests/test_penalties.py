import numpy as np
import pytest

from perchplan.flatness import FlatState, VehicleGeometry, net_thrust, zb_from_thrust
from perchplan.penalties import (
    ActuatorLimits,
    PenaltyWeights,
    QuadratureSpec,
    accumulate,
    g_bodyrate,
    g_collision,
    g_ground,
    g_thrust,
    g_velocity,
    support_margin,
)
from perchplan.platform import PlatformModel
from perchplan.smoothing import SmoothingParams
from perchplan.spline import BoundaryState, PerchSpline
from perchplan.terminal import PerchSpec
from perchplan.validator import disc_oracle

GEOM = VehicleGeometry()
LIMITS = ActuatorLimits(v_max=6.0, omega_max=3.0, tau_min=5.0, tau_max=15.0, z_min=0.4)
MU = 0.05


def random_state(rng, scale=4.0):
    state = FlatState(
        p=rng.normal(0, 2, 3),
        v=rng.normal(0, scale, 3),
        a=rng.normal(0, scale, 3),
        j=rng.normal(0, 3 * scale, 3),
    )
    return state


def random_platform(rng):
    z_d = rng.normal(size=3)
    z_d /= np.linalg.norm(z_d)
    spec = PerchSpec(z_d=z_d, v_n_bar=0.2)
    return PlatformModel(rho0=rng.normal(0, 2, 3), vel=rng.normal(0, 0.5, 3), spec=spec)


def central_fd(f, x, h=1e-6):
    g = np.zeros_like(x, dtype=float)
    for i in range(x.size):
        e = np.zeros_like(g)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


# -- individual penalty gradients -------------------------------------------


def test_thrust_penalty_gradient():
    rng = np.random.default_rng(0)
    for _ in range(30):
        state = random_state(rng)
        value, da = g_thrust(state, LIMITS, MU)
        assert value >= 0.0

        def f(a):
            return g_thrust(FlatState(p=state.p, v=state.v, a=a, j=state.j), LIMITS, MU)[0]

        assert np.allclose(da, central_fd(f, state.a), atol=1e-5)


def test_thrust_penalty_inactive_inside_bounds():
    a = np.array([0.0, 0.0, 0.0])  # hover: tau = 9.81, well inside [5, 15]
    value, da = g_thrust(FlatState(p=np.zeros(3), a=a), LIMITS, MU)
    assert value == 0.0
    assert np.allclose(da, 0.0)


def test_bodyrate_penalty_gradient():
    rng = np.random.default_rng(1)
    for _ in range(30):
        state = random_state(rng)
        if np.linalg.norm(net_thrust(state.a, 9.81)) < 1.0:
            continue
        value, da, dj = g_bodyrate(state, LIMITS, MU)
        assert value >= 0.0

        def fa(a):
            return g_bodyrate(FlatState(p=state.p, v=state.v, a=a, j=state.j), LIMITS, MU)[0]

        def fj(j):
            return g_bodyrate(FlatState(p=state.p, v=state.v, a=state.a, j=j), LIMITS, MU)[0]

        assert np.allclose(da, central_fd(fa, state.a), atol=2e-4)
        assert np.allclose(dj, central_fd(fj, state.j), atol=2e-4)


def test_velocity_and_ground_gradients():
    rng = np.random.default_rng(2)
    for _ in range(30):
        state = random_state(rng)
        _, dv = g_velocity(state, LIMITS, MU)

        def fv(v):
            return g_velocity(FlatState(p=state.p, v=v, a=state.a), LIMITS, MU)[0]

        assert np.allclose(dv, central_fd(fv, state.v), atol=1e-5)

        low = FlatState(p=np.array([0.0, 0.0, rng.uniform(-1.0, 1.0)]))
        value, dp = g_ground(low, LIMITS, MU)
        assert value >= 0.0
        if low.p[2] > LIMITS.z_min + MU:
            assert value == 0.0

        def fp(p):
            return g_ground(FlatState(p=p), LIMITS, MU)[0]

        assert np.allclose(dp, central_fd(fp, low.p), atol=1e-5)


def test_collision_gradient():
    rng = np.random.default_rng(3)
    smoothing = SmoothingParams(mu=MU, eps=0.05)
    checked = 0
    while checked < 20:
        platform = random_platform(rng)
        state = FlatState(
            p=platform.rho0 + rng.normal(0, 0.3, 3),
            a=rng.normal(0, 4, 3),
        )
        tau = net_thrust(state.a, GEOM.g_bar)
        if np.linalg.norm(tau) < 1.0 or zb_from_thrust(tau)[2] < -0.9:
            continue
        t = float(rng.uniform(0, 2))
        _, dp, da = g_collision(state, platform, t, GEOM, smoothing)

        def fp(p):
            return g_collision(FlatState(p=p, a=state.a), platform, t, GEOM, smoothing)[0]

        def fa(a):
            return g_collision(FlatState(p=state.p, a=a), platform, t, GEOM, smoothing)[0]

        assert np.allclose(dp, central_fd(fp, state.p), atol=2e-4)
        assert np.allclose(da, central_fd(fa, state.a), atol=2e-4)
        checked += 1


# -- support margin vs rim oracle -------------------------------------------


def test_support_margin_matches_rim_oracle():
    rng = np.random.default_rng(4)
    checked = 0
    while checked < 200:
        platform = random_platform(rng)
        state = FlatState(p=platform.rho0 + rng.normal(0, 0.5, 3), a=rng.normal(0, 4, 3))
        tau = net_thrust(state.a, GEOM.g_bar)
        if np.linalg.norm(tau) < 0.5 or zb_from_thrust(tau)[2] < -0.95:
            continue
        t = float(rng.uniform(0, 1))
        F1, _, _ = support_margin(state, platform, t, GEOM)
        approx = disc_oracle(state.p, state.a, platform, t, GEOM, n_rim=3600)
        assert approx <= F1 + 1e-12  # rim sampling bounds from below
        assert F1 - approx <= 1e-3
        assert np.sign(F1) == np.sign(approx) or abs(F1) < 1e-9
        checked += 1


def test_support_margin_level_disc():
    # level disc resting on a floor plane: margin exactly zero
    spec = PerchSpec(z_d=np.array([0.0, 0.0, 1.0]))
    platform = PlatformModel(rho0=np.zeros(3), vel=np.zeros(3), spec=spec)
    state = FlatState(p=np.array([0.0, 0.0, GEOM.l_bar]))  # hover attitude
    F1, _, _ = support_margin(state, platform, 0.0, GEOM)
    assert F1 == pytest.approx(0.0, abs=1e-12)
    # raising the drone clears the surface; lowering violates it
    up = FlatState(p=np.array([0.0, 0.0, GEOM.l_bar + 0.1]))
    dn = FlatState(p=np.array([0.0, 0.0, GEOM.l_bar - 0.1]))
    assert support_margin(up, platform, 0.0, GEOM)[0] == pytest.approx(-0.1)
    assert support_margin(dn, platform, 0.0, GEOM)[0] == pytest.approx(0.1)


def test_tilted_disc_touching_at_rim():
    # disc tilted about y touching the floor at one rim point
    spec = PerchSpec(z_d=np.array([0.0, 0.0, 1.0]))
    platform = PlatformModel(rho0=np.zeros(3), vel=np.zeros(3), spec=spec)
    a = np.array([3.0, 0.0, 0.0])  # thrust tilted toward +x
    tau = net_thrust(a, GEOM.g_bar)
    zb = zb_from_thrust(tau)
    # place the CoM so the lowest rim point sits exactly on z = 0
    sin_tilt = abs(zb[0])
    z_com = GEOM.l_bar * zb[2] + GEOM.r_bar * sin_tilt
    state = FlatState(p=np.array([0.0, 0.0, z_com]), a=a)
    F1, _, _ = support_margin(state, platform, 0.0, GEOM)
    assert F1 == pytest.approx(0.0, abs=1e-12)
    oracle = disc_oracle(state.p, a, platform, 0.0, GEOM, n_rim=3600)
    assert oracle == pytest.approx(0.0, abs=1e-6)


# -- quadrature accumulation -------------------------------------------------


def test_accumulate_costs_nonnegative_and_gradient_shapes():
    rng = np.random.default_rng(5)
    z = np.zeros(3)
    bc0 = BoundaryState(p=[0, 0, 1.5], v=z, a=z, j=z)
    bcT = BoundaryState(p=[2, 0, 1.2], v=[0.3, 0, 0], a=[1, 0, -2], j=z)
    q = rng.normal([1, 0, 1.3], 0.2, (4, 3))
    spline = PerchSpline.build(bc0, bcT, q, 2.0)
    platform = PlatformModel(
        rho0=[2.0, 0.0, 1.2],
        vel=[0.1, 0.0, 0.0],
        spec=PerchSpec(z_d=np.array([-1.0, 0.0, 0.0]), v_n_bar=0.3),
    )
    costs, dF_dc, dF_dT = accumulate(
        spline, platform, LIMITS, PenaltyWeights(), QuadratureSpec(),
        SmoothingParams(mu=MU, eps=0.05), GEOM,
    )
    assert set(costs) == {"tau", "omega", "v", "g", "c"}
    assert all(v >= 0.0 for v in costs.values())
    assert dF_dc.shape == (5, 8, 3)
    assert dF_dT.shape == (5,)
    assert np.all(np.isfinite(dF_dc)) and np.all(np.isfinite(dF_dT))


def test_limits_validation():
    with pytest.raises(ValueError):
        ActuatorLimits(v_max=0.0)
    with pytest.raises(ValueError):
        ActuatorLimits(tau_min=10.0, tau_max=5.0)
    with pytest.raises(ValueError):
        ActuatorLimits(z_min=-1.0)
    with pytest.raises(ValueError):
        PenaltyWeights(w_v=-1.0)
    with pytest.raises(ValueError):
        QuadratureSpec(kappa=1)

import numpy as np
import pytest

from perchplan._kernels_np import _l_eps_arr, _l_mu_arr
from perchplan.smoothing import SmoothingParams, l_eps, l_mu

WIDTHS = [1e-3, 1e-2, 1e-1]
TOL = 1e-6


@pytest.mark.parametrize("mu", WIDTHS)
def test_l_mu_regions(mu):
    assert l_mu(-1.0, mu) == (0.0, 0.0)
    assert l_mu(0.0, mu) == (0.0, 0.0)
    v, d = l_mu(2.0 * mu, mu)
    assert v == pytest.approx(2.0 * mu - mu / 2.0)
    assert d == 1.0


@pytest.mark.parametrize("mu", WIDTHS)
def test_l_mu_continuity(mu):
    for x0 in (0.0, mu):
        below = l_mu(x0 - 1e-9 * mu, mu)
        above = l_mu(x0 + 1e-9 * mu, mu)
        assert abs(below[0] - above[0]) < TOL
        assert abs(below[1] - above[1]) < TOL


@pytest.mark.parametrize("mu", WIDTHS)
def test_l_mu_monotone_and_consistent(mu):
    xs = np.linspace(-2.0 * mu, 3.0 * mu, 601)
    vals = np.array([l_mu(x, mu)[0] for x in xs])
    derivs = np.array([l_mu(x, mu)[1] for x in xs])
    assert np.all(vals >= 0.0)
    assert np.all(np.diff(vals) >= -TOL)
    assert np.all(derivs >= 0.0)
    # Derivative matches a central finite difference of the value.
    h = 1e-7 * max(mu, 1e-3)
    fd = np.array([(l_mu(x + h, mu)[0] - l_mu(x - h, mu)[0]) / (2 * h) for x in xs])
    assert np.max(np.abs(fd - derivs)) < 1e-4


@pytest.mark.parametrize("eps", WIDTHS)
def test_l_eps_range_and_symmetry(eps):
    xs = np.linspace(-2.0 * eps, 2.0 * eps, 401)
    vals = np.array([l_eps(x, eps)[0] for x in xs])
    assert np.all((vals >= -TOL) & (vals <= 1.0 + TOL))
    assert np.all(np.diff(vals) >= -TOL)
    # Point symmetry about (0, 1/2).
    for x in xs:
        assert l_eps(x, eps)[0] + l_eps(-x, eps)[0] == pytest.approx(1.0, abs=TOL)
    assert l_eps(-2.0 * eps, eps) == (0.0, 0.0)
    assert l_eps(2.0 * eps, eps) == (1.0, 0.0)


@pytest.mark.parametrize("eps", WIDTHS)
def test_l_eps_continuity_and_derivative(eps):
    for x0 in (-eps, 0.0, eps):
        below = l_eps(x0 - 1e-9 * eps, eps)
        above = l_eps(x0 + 1e-9 * eps, eps)
        assert abs(below[0] - above[0]) < TOL
        assert abs(below[1] - above[1]) < TOL
    h = 1e-7 * eps
    for x in np.linspace(-1.5 * eps, 1.5 * eps, 101):
        fd = (l_eps(x + h, eps)[0] - l_eps(x - h, eps)[0]) / (2 * h)
        assert fd == pytest.approx(l_eps(x, eps)[1], abs=1e-4)


@pytest.mark.parametrize("width", WIDTHS)
def test_array_kernels_match_scalar(width):
    rng = np.random.default_rng(0)
    xs = rng.uniform(-3 * width, 3 * width, 200)
    mv, md = _l_mu_arr(xs, width)
    ev, ed = _l_eps_arr(xs, width)
    for i, x in enumerate(xs):
        sv, sd = l_mu(x, width)
        assert mv[i] == pytest.approx(sv, abs=1e-12)
        assert md[i] == pytest.approx(sd, abs=1e-12)
        sv, sd = l_eps(x, width)
        assert ev[i] == pytest.approx(sv, abs=1e-12)
        assert ed[i] == pytest.approx(sd, abs=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        SmoothingParams(mu=0.0)
    with pytest.raises(ValueError):
        SmoothingParams(eps=-1.0)
    params = SmoothingParams()
    assert params.mu > 0 and params.eps > 0

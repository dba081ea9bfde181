import numpy as np
import pytest

from perchplan.scenario import (
    ScenarioConfig,
    ScenarioParseError,
    SolverConfig,
    surface_normal_from_slope,
)

from conftest import SCENARIO_DIR, scenario


def test_all_shipped_scenarios_parse():
    names = sorted(p.stem for p in SCENARIO_DIR.glob("*.yaml"))
    assert names, "no scenario files shipped"
    for name in names:
        config = scenario(name)
        assert config.solver.pieces >= 2
        assert abs(np.linalg.norm(config.perch.z_d) - 1.0) < 1e-9


def test_round_trip(tmp_path):
    config = scenario("moving-vehicle")
    path = tmp_path / "copy.yaml"
    config.save(path)
    reparsed = ScenarioConfig.load(path)
    assert reparsed.to_dict() == config.to_dict()


def test_surface_normal_from_slope():
    assert np.allclose(surface_normal_from_slope(0.0), [0, 0, 1])
    assert np.allclose(surface_normal_from_slope(-90.0), [-1, 0, 0], atol=1e-12)
    n = surface_normal_from_slope(-45.0)
    assert np.allclose(n, [-np.sqrt(0.5), 0, np.sqrt(0.5)])
    # beyond vertical: overhang, normal points downward
    assert surface_normal_from_slope(-110.0)[2] < 0.0


def test_slope_and_zd_are_exclusive():
    data = scenario("benchmark-rest2rest").to_dict()
    data["perch"]["slope_deg"] = -90.0  # to_dict already emitted z_d
    with pytest.raises(ScenarioParseError):
        ScenarioConfig.from_dict(data)


def test_defaults_applied():
    config = ScenarioConfig.from_dict(
        {"initial": {"p": [0, 0, 1]}, "platform": {"position": [1, 0, 1]}}
    )
    assert config.limits.v_max == 6.0
    assert config.limits.tau_max == 15.0
    assert config.limits.omega_max == 3.0
    assert config.solver.pieces == 10
    assert np.allclose(config.perch.z_d, [0, 0, 1])
    assert np.allclose(config.initial.v, 0.0)


def test_parse_errors(tmp_path):
    with pytest.raises(ScenarioParseError):
        ScenarioConfig.from_dict({"platform": {"position": [1, 0, 1]}})
    with pytest.raises(ScenarioParseError):
        ScenarioConfig.from_dict(
            {"initial": {"p": [0, 0, 1]}, "platform": {"position": [1, 0, 1]},
             "limits": {"v_max": -1.0}}
        )
    bad = tmp_path / "bad.yaml"
    bad.write_text("not: [valid")
    with pytest.raises(ScenarioParseError):
        ScenarioConfig.load(bad)
    missing = tmp_path / "missing.yaml"
    with pytest.raises(ScenarioParseError):
        ScenarioConfig.load(missing)
    listfile = tmp_path / "list.yaml"
    listfile.write_text("- 1\n- 2\n")
    with pytest.raises(ScenarioParseError):
        ScenarioConfig.load(listfile)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(pieces=1)
    with pytest.raises(ValueError):
        SolverConfig(gradient_tolerance=0.0)
    with pytest.raises(ValueError):
        SolverConfig(c_armijo=0.95, c_curvature=0.9)
    with pytest.raises(ValueError):
        SolverConfig(initial_duration=-1.0)
    assert SolverConfig(initial_duration=None).initial_duration is None


def test_with_helpers():
    config = scenario("benchmark-rest2rest")
    moved = config.with_platform(config.platform.advanced(0.5))
    assert moved.limits is config.limits
    assert moved.initial is config.initial
    re_anchored = config.with_initial(config.initial)
    assert re_anchored.platform is config.platform

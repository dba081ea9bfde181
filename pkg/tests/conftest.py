from pathlib import Path

import pytest

from perchplan.cli import load_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def scenario_path(name):
    return SCENARIO_DIR / f"{name}.yaml"


def scenario(name):
    return load_scenario(scenario_path(name))


@pytest.fixture
def benchmark_scenario():
    return scenario("benchmark-rest2rest")


@pytest.fixture
def moving_scenario():
    return scenario("moving-vehicle")

"""Shared test fixtures."""

import pytest
from los_coverage.sampling import RandomSeed, ScenarioParams


@pytest.fixture
def urban_params():
    """The 3gpp-urban-a scenario: 5 roads/km, 2 RSUs/km, 25 vehicles/km."""
    return ScenarioParams.from_per_km(lambda_l=5, mu=2, mu_v=25, gamma=100, eta=100)


@pytest.fixture
def dense_rsu_params():
    """5 roads/km with 4 RSUs/km, the Theorem 1 example scenario."""
    return ScenarioParams.from_per_km(lambda_l=5, mu=4, mu_v=50, gamma=100, eta=100)


@pytest.fixture
def seed():
    """A fixed seed so statistical tests are deterministic."""
    return RandomSeed(20240601)


@pytest.fixture
def config_file(tmp_path):
    """Write a flat TOML config and return its path."""

    def write(text: str):
        path = tmp_path / "run.toml"
        path.write_text(text)
        return path

    return write

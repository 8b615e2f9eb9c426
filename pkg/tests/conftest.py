import numpy as np
import pytest

from kapitza_dirac.driver import SimConfig, build_scenario


@pytest.fixture
def small_config():
    return SimConfig(n_x=3, n_y=3)


@pytest.fixture
def small_scenario(small_config):
    scenario, beam = build_scenario(small_config)
    return scenario, beam


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

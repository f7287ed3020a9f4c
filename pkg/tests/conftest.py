import numpy as np
import pytest

from gnpvlc.config import default_scenario, wiretap_scenario
from gnpvlc.variants import SystemCache


@pytest.fixture(scope="session")
def config():
    return default_scenario()


@pytest.fixture(scope="session")
def wiretap_config():
    return wiretap_scenario()


@pytest.fixture(scope="session")
def cache(config):
    return SystemCache(config)


@pytest.fixture(scope="session")
def system(cache):
    return cache.get(True, "los")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from secswipt.model import NetworkConfig, generate_channels, normalize

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def paper_cfg():
    return NetworkConfig()


@pytest.fixture(scope="session")
def small_cfg():
    return NetworkConfig(K=2, N_k=2, N1_k=1, M=3)


@pytest.fixture(scope="session")
def paper_channels(paper_cfg):
    return generate_channels(paper_cfg, 0)


@pytest.fixture(scope="session")
def paper_norm(paper_cfg, paper_channels):
    return normalize(paper_channels, paper_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

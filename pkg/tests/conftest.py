import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "hologlab",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("hologlab")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240811)

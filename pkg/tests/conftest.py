import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_pair(rng):
    from congruence import SampleSet
    x = rng.uniform(0, 2 * np.pi, 30)
    xp = rng.uniform(0, 2 * np.pi, 20)
    return (SampleSet(x, np.sin(x) + 0.3 * rng.standard_normal(30)),
            SampleSet(xp, np.cos(xp) + 0.3 * rng.standard_normal(20)))

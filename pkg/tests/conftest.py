import math

import numpy as np
import pytest

from schwarzlift.nehari import solve_extremal
from schwarzlift.metric import RadialMetric
from schwarzlift.verify import make_example


def disk_points(n, radius=0.9, seed=0):
    rng = np.random.default_rng(seed)
    return radius * np.sqrt(rng.uniform(0, 1, n)) * np.exp(2j * np.pi * rng.uniform(0, 1, n))


@pytest.fixture(scope="session")
def catenoid60():
    return make_example("catenoid_exp", {"c": 60.0, "t": 1.0})


@pytest.fixture(scope="session")
def pi2over4_metric():
    return RadialMetric(solve_extremal("pi2over4"))


@pytest.fixture(scope="session")
def sharp_c():
    return (1 + math.sqrt(2)) * math.exp(math.pi)

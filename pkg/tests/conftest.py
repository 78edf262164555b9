import warnings

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fisherq import GridSpec

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def line():
    """The standard 1-D grid: [-12, 12) with 2048 points."""
    return GridSpec.centered(12.0, 2048)


@pytest.fixture
def small_line():
    return GridSpec.centered(10.0, 1024)


@pytest.fixture
def plane():
    a = GridSpec.centered(12.0, 128).axes[0]
    return GridSpec((a, a))


@pytest.fixture(autouse=True)
def strict_warnings():
    # numerical warnings from the library signal a bad grid; make them loud in tests
    with warnings.catch_warnings():
        warnings.simplefilter("error", category=UserWarning)
        yield


def relerr(a, b):
    return abs(a - b) / abs(b)


def rng_states(grid, seeds, smoothness=0.5):
    from fisherq import random_state

    return [random_state(grid, s, smoothness) for s in seeds]


np.set_printoptions(precision=6)

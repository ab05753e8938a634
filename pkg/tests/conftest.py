import numpy as np
import pytest

from jndfilter.testimages import synthetic_natural


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def natural_64():
    return synthetic_natural(64, 64, seed=7)


@pytest.fixture
def natural_128():
    return synthetic_natural(128, 128, seed=3)

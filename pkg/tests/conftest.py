import numpy as np
import pytest
from hypothesis import settings

from scflow.scales import BandVector

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


def rand_vec(rng, band, scale=1.0):
    n = 2 * band + 1
    return BandVector(scale * (rng.standard_normal(n) + 1j * rng.standard_normal(n)))

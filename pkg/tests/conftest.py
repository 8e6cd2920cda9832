import numpy as np
import pytest

from qboosting.concepts import full_domain, majority


@pytest.fixture
def maj3():
    return full_domain(majority(3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

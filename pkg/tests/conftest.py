import math

import numpy as np
import pytest

from parabolic import potential as pot


@pytest.fixture(scope="session")
def devaney():
    return pot.devaney()


@pytest.fixture(scope="session")
def iso():
    return pot.isotropic()


@pytest.fixture(scope="session")
def barrier50():
    return pot.barrier50()


def unit(theta):
    return np.array([math.cos(theta), math.sin(theta)])

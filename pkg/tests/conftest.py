import numpy as np
import pytest

from henon_rigidity import HenonChain, simple_henon
from henon_rigidity.fixtures import example_pair


@pytest.fixture
def H() -> HenonChain:
    return simple_henon([0, 0, 1])


@pytest.fixture
def pair():
    return example_pair()


@pytest.fixture
def rng():
    return np.random.default_rng(0)

import numpy as np
import pytest

from sigmaforest import build_graph


@pytest.fixture
def k2():
    return build_graph(2, [(1, 2, 1.0)])


@pytest.fixture
def path3():
    return build_graph(3, [(1, 2, 1.0), (2, 3, 1.0)])


@pytest.fixture
def cycle4():
    return build_graph(4, [(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 1, 1.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(42)

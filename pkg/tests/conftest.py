import numpy as np
import pytest

import ergmcmc as e


@pytest.fixture(scope="session")
def florentine():
    return e.load_builtin("florentine")


@pytest.fixture(scope="session")
def karate():
    return e.load_builtin("karate")


@pytest.fixture()
def rng():
    return np.random.default_rng(20260810)


def random_graph(rng, n, p=0.4, attributes=None):
    g = e.Graph(n, attributes=attributes)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                g.toggle(i, j)
    return g

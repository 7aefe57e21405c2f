import numpy as np
import pytest

from sgwn.graph import Graph


def random_graph(n, rng, p=0.5, connected=True):
    """Erdos-Renyi graph; when ``connected`` a random spanning path is added first."""
    a = (rng.random((n, n)) < p).astype(float)
    a = np.triu(a, 1)
    a = a + a.T
    if connected:
        order = rng.permutation(n)
        for i, j in zip(order[:-1], order[1:]):
            a[i, j] = a[j, i] = 1.0
    return Graph(a)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def path2():
    return Graph([[0, 1], [1, 0]])


@pytest.fixture
def k3():
    return Graph(np.ones((3, 3)) - np.eye(3))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)

import numpy as np
import pytest

from mbpkit.graph import Graph, make_graph


@pytest.fixture
def path4() -> Graph:
    return make_graph(4, [(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def k4() -> Graph:
    return make_graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])


@pytest.fixture
def k6() -> Graph:
    return make_graph(6, [(i, j) for i in range(6) for j in range(i + 1, 6)])


@pytest.fixture
def empty4() -> Graph:
    return make_graph(4, [])


@pytest.fixture
def cycle6() -> Graph:
    return make_graph(6, [(i, (i + 1) % 6) for i in range(6)])


def brute_force_mbp(g: Graph, lam: float):
    """Independent oracle: minimum of the bisection objective over all 2^n
    assignments, computed straight from the definition."""
    from mbpkit import qubo

    n = g.node_count
    best_e, best_x = None, None
    for code in range(1 << n):
        x = np.array([(code >> i) & 1 for i in range(n)], dtype=np.int8)
        e = qubo.e_mbp(g, lam, x)
        if best_e is None or e < best_e:
            best_e, best_x = e, x
    return best_e, best_x

import numpy as np
import pytest

from gnnflow.graphs import Graph


def random_graph(rng, max_nodes=12, min_nodes=1) -> Graph:
    v = int(rng.integers(min_nodes, max_nodes + 1))
    pairs = [(i, j) for i in range(v) for j in range(i + 1, v)]
    edges = []
    if pairs:
        p = rng.random()
        mask = rng.random(len(pairs)) < p
        edges = [pairs[i] for i in np.nonzero(mask)[0]]
    return Graph.from_edges(edges, node_count=v)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

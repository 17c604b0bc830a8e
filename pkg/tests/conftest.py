import random

import pytest

from bufgossip import _backend
from bufgossip.graph import Graph

requires_kernels = pytest.mark.skipif(not _backend.available(),
                                      reason="compiled kernels not built")


def random_connected_graph(rng: random.Random, n: int, extra: int) -> Graph:
    """Random spanning tree plus up to ``extra`` random chords."""
    edges = set()
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        u, v = order[i], order[rng.randrange(i)]
        edges.add((min(u, v), max(u, v)))
    for _ in range(extra):
        u, v = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return Graph.from_edges(n, sorted(edges))


def shuffled_ports(rng: random.Random, g: Graph) -> Graph:
    """Same graph with every adjacency list permuted (new port labels)."""
    rows = []
    for row in g.adjacency:
        row = list(row)
        rng.shuffle(row)
        rows.append(tuple(row))
    return Graph(g.node_count, tuple(rows))

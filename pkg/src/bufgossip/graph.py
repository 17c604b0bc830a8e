"""Port-labelled undirected graphs, the generators used by the experiments,
and the structural metrics the bounds need (diameter, BFS layers, pull load).
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np


class GraphError(ValueError):
    """Invalid graph or generator parameters."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class DisconnectedGraphError(GraphError):
    pass


@dataclass(frozen=True, eq=True)
class Graph:
    """Undirected simple connected graph.

    ``adjacency[v]`` is the ordered tuple of neighbours of ``v``; the position
    of a neighbour in that tuple is the local port label.
    """

    node_count: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        n = self.node_count
        if n < 1:
            raise GraphError("node_count", "must be >= 1")
        if len(self.adjacency) != n:
            raise GraphError("adjacency", f"expected {n} rows, got {len(self.adjacency)}")
        sets = []
        for v, row in enumerate(self.adjacency):
            s = set(row)
            if len(s) != len(row):
                raise GraphError("adjacency", f"duplicate neighbour at node {v}")
            if v in s:
                raise GraphError("adjacency", f"self-loop at node {v}")
            for u in row:
                if not 0 <= u < n:
                    raise GraphError("adjacency", f"node {v} lists unknown neighbour {u}")
            sets.append(s)
        for v, s in enumerate(sets):
            for u in s:
                if v not in sets[u]:
                    raise GraphError("adjacency", f"edge {v}->{u} has no reverse")
        if n > 1:
            seen = _bfs_distances(self.adjacency, 0)
            if min(seen) < 0:
                raise DisconnectedGraphError("adjacency", "graph is not connected")

    @classmethod
    def from_edges(cls, n: int, edges: Sequence[tuple[int, int]]) -> Graph:
        """Build a graph whose ports are neighbours in ascending id order."""
        rows: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError("edges", f"edge ({u}, {v}) out of range for n={n}")
            rows[u].append(v)
            rows[v].append(u)
        return cls(n, tuple(tuple(sorted(r)) for r in rows))

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.adjacency)

    @property
    def edge_count(self) -> int:
        return sum(self.degrees) // 2

    def edges(self) -> list[tuple[int, int]]:
        """Edges as sorted ``(smaller, larger)`` pairs, sorted."""
        return sorted((v, u) for v, row in enumerate(self.adjacency) for u in row if v < u)

    @property
    def max_degree(self) -> int:
        return max(self.degrees)

    @property
    def is_regular(self) -> bool:
        return len(set(self.degrees)) == 1

    @property
    def regular_degree(self) -> int:
        if not self.is_regular:
            raise GraphError("degree", "graph is not regular")
        return self.degrees[0]

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, neighbors, reverse_port)`` arrays (int64).

        For the slot ``e = indptr[v] + p`` holding ``u = neighbors[e]``,
        ``reverse_port[e]`` is the port of ``v`` in ``u``'s adjacency.
        """
        n = self.node_count
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.degrees, out=indptr[1:])
        nbrs = np.fromiter((u for row in self.adjacency for u in row), dtype=np.int64,
                           count=int(indptr[-1]))
        port = [{u: p for p, u in enumerate(row)} for row in self.adjacency]
        rev = np.fromiter((port[u][v] for v, row in enumerate(self.adjacency) for u in row),
                          dtype=np.int64, count=int(indptr[-1]))
        return indptr, nbrs, rev

    @cached_property
    def reverse_ports(self) -> tuple[tuple[int, ...], ...]:
        port = [{u: p for p, u in enumerate(row)} for row in self.adjacency]
        return tuple(tuple(port[u][v] for u in row) for v, row in enumerate(self.adjacency))


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

GRAPH_KINDS = ("complete", "path", "star", "star-chain", "random-regular", "edge-list")


@dataclass(frozen=True)
class GraphSpec:
    """Recipe for a graph.  Only the fields relevant to ``kind`` are read."""

    kind: str
    n: int | None = None
    delta: int | None = None  # leaves per star
    d: int | None = None  # number of stars in a chain
    degree: int | None = None
    path: str | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in GRAPH_KINDS:
            raise GraphError("kind", f"unknown graph kind {self.kind!r}")

    @classmethod
    def complete(cls, n: int) -> GraphSpec:
        return cls("complete", n=n)

    @classmethod
    def path_graph(cls, n: int) -> GraphSpec:
        return cls("path", n=n)

    @classmethod
    def star(cls, delta: int) -> GraphSpec:
        return cls("star", delta=delta)

    @classmethod
    def star_chain(cls, d: int, delta: int) -> GraphSpec:
        return cls("star-chain", d=d, delta=delta)

    @classmethod
    def random_regular(cls, n: int, degree: int, seed: int = 0) -> GraphSpec:
        return cls("random-regular", n=n, degree=degree, seed=seed)

    @classmethod
    def edge_list(cls, path: str | Path) -> GraphSpec:
        return cls("edge-list", path=str(path))

    @property
    def label(self) -> str:
        """Stable identifier, safe for CSV cells."""
        if self.kind in ("complete", "path"):
            return f"{self.kind}:n={self.n}"
        if self.kind == "star":
            return f"star:delta={self.delta}"
        if self.kind == "star-chain":
            return f"star-chain:d={self.d}:delta={self.delta}"
        if self.kind == "random-regular":
            return f"random-regular:n={self.n}:degree={self.degree}:seed={self.seed}"
        return f"edge-list:{Path(self.path or '').name}"

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, data: dict) -> GraphSpec:
        allowed = {"kind", "n", "delta", "d", "degree", "path", "seed"}
        unknown = set(data) - allowed
        if unknown:
            raise GraphError(sorted(unknown)[0], "unknown graph spec field")
        if "kind" not in data:
            raise GraphError("kind", "missing")
        return cls(**data)


def _require_int(value, field: str, minimum: int) -> int:
    if value is None:
        raise GraphError(field, "required")
    if isinstance(value, bool) or not isinstance(value, int):
        raise GraphError(field, f"must be an integer, got {value!r}")
    if value < minimum:
        raise GraphError(field, f"must be >= {minimum}, got {value}")
    return value


def complete_graph(n: int) -> Graph:
    n = _require_int(n, "n", 1)
    return Graph(n, tuple(tuple(u for u in range(n) if u != v) for v in range(n)))


def path_graph(n: int) -> Graph:
    n = _require_int(n, "n", 1)
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(delta: int) -> Graph:
    """Center 0 joined to leaves ``1..delta``."""
    delta = _require_int(delta, "delta", 1)
    return Graph.from_edges(delta + 1, [(0, i) for i in range(1, delta + 1)])


def star_chain(d: int, delta: int) -> Graph:
    """``d`` stars of ``delta`` leaves with centers joined into a path.

    Centers are ``0..d-1`` in path order; the leaves of center ``c`` are
    ``d + c*delta .. d + (c+1)*delta - 1``.
    """
    d = _require_int(d, "d", 1)
    delta = _require_int(delta, "delta", 1)
    edges = [(c, c + 1) for c in range(d - 1)]
    for c in range(d):
        base = d + c * delta
        edges.extend((c, base + j) for j in range(delta))
    return Graph.from_edges(d * (delta + 1), edges)


def random_regular(n: int, degree: int, seed: int = 0, max_tries: int = 10_000) -> Graph:
    """Random ``degree``-regular graph by stub pairing.

    Shuffled stubs are paired; pairs forming a self-loop or a repeated edge
    are rejected and their stubs re-paired.  A pass that leaves only
    unpairable stubs (or a disconnected result) restarts from scratch.
    """
    n = _require_int(n, "n", 1)
    degree = _require_int(degree, "degree", 1)
    if degree >= n:
        raise GraphError("degree", f"must be < n ({n}), got {degree}")
    if (n * degree) % 2:
        raise GraphError("degree", f"n*degree must be even, got {n}*{degree}")
    rng = random.Random(seed)
    for _ in range(max_tries):
        edges = _pair_stubs(n, degree, rng)
        if edges is None:
            continue
        try:
            return Graph.from_edges(n, sorted(edges))
        except DisconnectedGraphError:
            continue
    raise GraphError("degree", f"no simple connected pairing found in {max_tries} tries")


def _pair_stubs(n: int, degree: int, rng: random.Random) -> set[tuple[int, int]] | None:
    edges: set[tuple[int, int]] = set()
    stubs = [v for v in range(n) for _ in range(degree)]
    while stubs:
        rng.shuffle(stubs)
        leftover: list[int] = []
        for a, b in zip(stubs[::2], stubs[1::2]):
            e = (a, b) if a < b else (b, a)
            if a != b and e not in edges:
                edges.add(e)
            else:
                leftover += (a, b)
        if len(leftover) == len(stubs):
            nodes = sorted(set(leftover))
            if not any((u, v) not in edges for i, u in enumerate(nodes) for v in nodes[i + 1:]):
                return None
        stubs = sorted(leftover)
    return edges


def generate(spec: GraphSpec) -> Graph:
    if spec.kind == "complete":
        return complete_graph(spec.n)
    if spec.kind == "path":
        return path_graph(spec.n)
    if spec.kind == "star":
        return star_graph(spec.delta)
    if spec.kind == "star-chain":
        return star_chain(spec.d, spec.delta)
    if spec.kind == "random-regular":
        return random_regular(spec.n, spec.degree, spec.seed)
    if spec.path is None:
        raise GraphError("path", "required for edge-list graphs")
    return read_edge_list(spec.path)


# ---------------------------------------------------------------------------
# edge-list files
# ---------------------------------------------------------------------------

def parse_edge_list(text: str) -> Graph:
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    max_id = -1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError("path", f"line {lineno}: expected two node ids")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError("path", f"line {lineno}: node ids must be integers") from None
        if u < 0 or v < 0:
            raise GraphError("path", f"line {lineno}: negative node id")
        if u == v:
            raise GraphError("path", f"line {lineno}: self-loop on {u}")
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise GraphError("path", f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        edges.append(key)
        max_id = max(max_id, u, v)
    if max_id < 0:
        raise GraphError("path", "no edges")
    return Graph.from_edges(max_id + 1, edges)


def read_edge_list(path: str | Path) -> Graph:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def format_edge_list(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges())


def write_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8")


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _bfs_distances(adjacency: Sequence[Sequence[int]], source: int) -> list[int]:
    dist = [-1] * len(adjacency)
    dist[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for u in adjacency[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(u)
    return dist


def bfs_layers(g: Graph, source: int) -> list[set[int]]:
    """Nodes grouped by hop distance from ``source``."""
    if not (isinstance(source, int) and 0 <= source < g.node_count):
        raise GraphError("source", f"invalid node id {source!r}")
    dist = _bfs_distances(g.adjacency, source)
    layers: list[set[int]] = [set() for _ in range(max(dist) + 1)]
    for v, k in enumerate(dist):
        layers[k].add(v)
    return layers


def diameter(g: Graph) -> int:
    """Largest hop distance over all node pairs.

    Runs a breadth-first search from every node through scipy's unweighted
    shortest-path routine.
    """
    if g.node_count == 1:
        return 0
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import shortest_path

    indptr, nbrs, _ = g.csr
    mat = csr_matrix((np.ones(len(nbrs), dtype=np.int8), nbrs, indptr),
                     shape=(g.node_count, g.node_count))
    dist = shortest_path(mat, method="D", directed=False, unweighted=True)
    if not np.isfinite(dist).all():
        raise DisconnectedGraphError("adjacency", "graph is not connected")
    return int(dist.max())


@dataclass(frozen=True)
class LoadProfile:
    """Expected one-step arrivals per node when every node contacts a random neighbour."""

    per_node_load: tuple[Fraction, ...]
    max_load: Fraction

    def __post_init__(self) -> None:
        if any(e <= 0 for e in self.per_node_load):
            raise GraphError("per_node_load", "loads must be positive")
        if self.max_load != max(self.per_node_load):
            raise GraphError("max_load", "must equal the largest per-node load")


def load_profile(g: Graph) -> LoadProfile:
    if g.node_count == 1:
        # a lone node has no senders; 1 keeps the sum-equals-n identity
        return LoadProfile((Fraction(1),), Fraction(1))
    inv = [Fraction(1, d) for d in g.degrees]
    loads = tuple(sum((inv[u] for u in row), Fraction(0)) for row in g.adjacency)
    return LoadProfile(loads, max(loads))

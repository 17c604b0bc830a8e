"""Bufferless reference model: every contact made in a round is served in it.

Contact choices read the same tape positions as phase A of the buffered
engine, so a classical run and a buffered run with the same seed are coupled.
"""

from __future__ import annotations

from . import _backend
from .engine import PROTOCOL_CODES, Model, Protocol, RunConfig, Trace, _kernel_trace
from .graph import Graph
from .tape import CONTACT, ChoiceTape


def run_classical_python(graph: Graph, config: RunConfig) -> Trace:
    config.validate(graph)
    n = graph.node_count
    adj = graph.adjacency
    tape = ChoiceTape(config.seed)
    push = config.protocol in (Protocol.PUSH, Protocol.PUSH_PULL)
    pull = config.protocol in (Protocol.PULL, Protocol.PUSH_PULL)
    informed_round = [-1] * n
    informed_round[config.source] = 0
    count = 1
    counts: list[int] = []
    sent = 0
    completion = 0 if n == 1 else None
    rnd = 0
    while completion is None and rnd < config.max_rounds:
        rnd += 1
        start = [r >= 0 for r in informed_round]
        newly = set()
        for v in range(n):
            if start[v] and not push:
                continue
            if not start[v] and not pull:
                continue
            u = adj[v][tape.choice(v, rnd, CONTACT, len(adj[v]))]
            sent += 1
            if start[v]:
                if not start[u]:
                    newly.add(u)
            elif start[u]:
                sent += 1  # the answer
                newly.add(v)
        for v in newly:
            informed_round[v] = rnd
        count += len(newly)
        counts.append(count)
        if count == n:
            completion = rnd
    zeros = (0,) * len(counts)
    return Trace(
        node_count=n,
        model=Model.CLASSICAL,
        informed_counts=tuple(counts),
        nearly_informed_counts=zeros,
        buffered_counts=zeros,
        max_buffer_lens=zeros,
        informed_round=tuple(informed_round),
        completion_round=completion,
        total_messages_sent=sent,
        total_reads=sent,
    )


def run_classical(graph: Graph, config: RunConfig, backend: str = "auto") -> Trace:
    config.validate(graph)
    kernels = _backend.select(backend)
    if kernels is None:
        return run_classical_python(graph, config)
    indptr, nbrs, _ = graph.csr
    out = kernels.run_classical(indptr, nbrs, config.source, PROTOCOL_CODES[config.protocol],
                                config.max_rounds, config.seed & ((1 << 64) - 1))
    return _kernel_trace(graph.node_count, Model.CLASSICAL, out)

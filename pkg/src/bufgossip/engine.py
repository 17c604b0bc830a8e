"""Synchronous-round simulator for the buffer model.

One round runs four phases over the start-of-round state:

A. emit   every node makes at most one call (Push: informed nodes send the
          rumor; Pull / Push&Pull: uninformed nodes send a pull request).
B. deliver arrivals at a node with an empty buffer: one, picked uniformly,
          is marked *direct*; everything else is appended to the FIFO buffer
          in tie-break order.
C. read   each node reads its direct arrival, else its buffer head.  An
          informed node that reads a request answers it in the same round;
          under Push&Pull an informed node that reads no request pushes.
D. late   answers produced in C are delivered.  A recipient that has not
          read this round and whose buffer is empty reads one of them
          directly; the rest are appended.

Arrivals for one recipient are first put in ascending order of the port they
came in on.  ``TieBreak.PORT_ORDER`` keeps that order;
``TieBreak.UNIFORM_RANDOM`` applies a Fisher-Yates shuffle driven by the tape.

This module holds the reference implementation.  :func:`run` hands whole
runs to the compiled kernel when it is available; both produce identical
traces.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterator

from . import _backend
from .graph import Graph, GraphError
from .tape import CONTACT, DIRECT, LATE_DIRECT, LATE_PUSH, LATE_SHUFFLE, SHUFFLE, ChoiceTape


class Protocol(str, Enum):
    PUSH = "push"
    PULL = "pull"
    PUSH_PULL = "push-pull"


class Model(str, Enum):
    BUFFERED = "buffered"
    CLASSICAL = "classical"


class TieBreak(str, Enum):
    UNIFORM_RANDOM = "uniform"
    PORT_ORDER = "port"


class MessageKind(IntEnum):
    RUMOR = 0
    PULL_REQUEST = 1


PROTOCOL_CODES = {Protocol.PUSH: 0, Protocol.PULL: 1, Protocol.PUSH_PULL: 2}
TIE_BREAK_CODES = {TieBreak.UNIFORM_RANDOM: 0, TieBreak.PORT_ORDER: 1}


class InvariantViolation(AssertionError):
    """A per-round budget or buffer invariant was broken."""


@dataclass(frozen=True)
class Message:
    kind: MessageKind
    sender: int
    sent_round: int
    port: int  # recipient-side port the message came in on


@dataclass
class NodeState:
    informed: bool = False
    buffer: deque = field(default_factory=deque)
    capacity: int | None = None
    reads_done: int = 0
    sends_done: int = 0
    informed_round: int = -1
    rumors_buffered: int = 0

    @property
    def nearly_informed(self) -> bool:
        return not self.informed and self.rumors_buffered > 0

    def append(self, msg: Message) -> bool:
        """Queue ``msg``; returns False when drop-tail discards it."""
        if self.capacity is not None and len(self.buffer) >= self.capacity:
            return False
        self.buffer.append(msg)
        if msg.kind is MessageKind.RUMOR:
            self.rumors_buffered += 1
        return True

    def pop(self) -> Message:
        msg = self.buffer.popleft()
        if msg.kind is MessageKind.RUMOR:
            self.rumors_buffered -= 1
        return msg


@dataclass(frozen=True)
class RunConfig:
    protocol: Protocol
    model: Model = Model.BUFFERED
    source: int = 0
    seed: int = 0
    tie_break: TieBreak = TieBreak.UNIFORM_RANDOM
    buffer_capacity: int | None = None
    max_rounds: int = 1_000_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "tie_break", TieBreak(self.tie_break))
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.buffer_capacity is not None and self.buffer_capacity < 0:
            raise ValueError("buffer_capacity must be >= 0")

    def validate(self, graph: Graph) -> None:
        if not (isinstance(self.source, int) and 0 <= self.source < graph.node_count):
            raise GraphError("source", f"invalid source {self.source!r} for n={graph.node_count}")


@dataclass(frozen=True)
class RoundRecord:
    round: int
    informed: int
    nearly_informed: int
    buffered: int
    max_buffer: int


@dataclass(frozen=True)
class Trace:
    """Outcome of one run.  Column ``i`` of the per-round tuples is round ``i + 1``."""

    node_count: int
    model: Model
    informed_counts: tuple[int, ...]
    nearly_informed_counts: tuple[int, ...]
    buffered_counts: tuple[int, ...]
    max_buffer_lens: tuple[int, ...]
    informed_round: tuple[int, ...]  # -1 for never
    completion_round: int | None
    total_messages_sent: int
    total_reads: int = 0
    total_dropped: int = 0
    final_buffered: int = 0

    @property
    def rounds_run(self) -> int:
        return len(self.informed_counts)

    @property
    def censored(self) -> bool:
        return self.completion_round is None

    @property
    def max_buffer(self) -> int:
        return max(self.max_buffer_lens, default=0)

    def records(self) -> Iterator[RoundRecord]:
        for i, row in enumerate(zip(self.informed_counts, self.nearly_informed_counts,
                                    self.buffered_counts, self.max_buffer_lens)):
            yield RoundRecord(i + 1, *row)

    def informed_set(self, rnd: int) -> frozenset[int]:
        return frozenset(v for v, r in enumerate(self.informed_round) if 0 <= r <= rnd)

    def to_jsonl(self) -> str:
        lines = [json.dumps({"round": r.round, "informed": r.informed,
                             "nearly_informed": r.nearly_informed, "buffered": r.buffered,
                             "max_buffer": r.max_buffer}) for r in self.records()]
        lines.append(json.dumps({"completion_round": self.completion_round,
                                 "total_messages": self.total_messages_sent}))
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "node_count": self.node_count,
            "completion_round": self.completion_round,
            "total_messages": self.total_messages_sent,
            "informed_round": list(self.informed_round),
            "rounds": [r.__dict__ for r in self.records()],
        }


@dataclass
class StepResult:
    record: RoundRecord
    sent: int
    reads: int
    dropped: int


def initial_states(graph: Graph, source: int, capacity: int | None = None) -> list[NodeState]:
    states = [NodeState(capacity=capacity) for _ in range(graph.node_count)]
    states[source].informed = True
    states[source].informed_round = 0
    return states


def _order(items: list, recipient: int, rnd: int, tape: ChoiceTape, tie_break: TieBreak,
           purpose: int) -> list:
    # items arrive sorted by port
    if tie_break is TieBreak.UNIFORM_RANDOM:
        for i in range(len(items) - 1, 0, -1):
            j = tape.choice(recipient, rnd, purpose, i + 1, i)
            items[i], items[j] = items[j], items[i]
    return items


def _by_port(msg: Message) -> int:
    return msg.port


def _spend_send(s: NodeState) -> None:
    s.sends_done += 1
    if s.sends_done > 1:
        raise InvariantViolation("node sent more than one message in a round")


def _read(s: NodeState, msg: Message, rnd: int) -> None:
    s.reads_done += 1
    if s.reads_done > 1:
        raise InvariantViolation("node read more than one message in a round")
    if msg.kind is MessageKind.RUMOR and not s.informed:
        s.informed = True
        s.informed_round = rnd


def step(graph: Graph, states: list[NodeState], rnd: int, tape: ChoiceTape,
         protocol: Protocol, tie_break: TieBreak = TieBreak.UNIFORM_RANDOM,
         events: list | None = None) -> StepResult:
    """Advance ``states`` (in place) through round ``rnd``.

    If ``events`` is a list, ``("append" | "drop", node, msg)`` and
    ``("read", node, msg, how)`` tuples are recorded in order, with ``how``
    one of ``"direct"``, ``"buffer"``, ``"late"``.
    """
    if rnd < 1:
        raise ValueError("rounds are numbered from 1")
    adj = graph.adjacency
    rev = graph.reverse_ports
    n = graph.node_count
    for s in states:
        s.reads_done = s.sends_done = 0
    informed_start = [s.informed for s in states]
    sent = reads = dropped = 0

    def deliver(r: int, msg: Message) -> None:
        nonlocal dropped
        kept = states[r].append(msg)
        if not kept:
            dropped += 1
        if events is not None:
            events.append(("append" if kept else "drop", r, msg))

    # phase A
    arrivals: dict[int, list[Message]] = {}
    for v in range(n):
        if informed_start[v]:
            if protocol is not Protocol.PUSH:
                continue
            kind = MessageKind.RUMOR
        else:
            if protocol is Protocol.PUSH:
                continue
            kind = MessageKind.PULL_REQUEST
        p = tape.choice(v, rnd, CONTACT, len(adj[v]))
        _spend_send(states[v])
        sent += 1
        arrivals.setdefault(adj[v][p], []).append(Message(kind, v, rnd, rev[v][p]))

    # phase B
    direct: dict[int, Message] = {}
    for r in sorted(arrivals):
        items = sorted(arrivals[r], key=_by_port)
        if not states[r].buffer:
            j = 0 if len(items) == 1 else tape.choice(r, rnd, DIRECT, len(items))
            direct[r] = items.pop(j)
        for msg in _order(items, r, rnd, tape, tie_break, SHUFFLE):
            deliver(r, msg)

    # phase C
    late: dict[int, list[Message]] = {}
    for v in range(n):
        s = states[v]
        msg = direct.get(v)
        how = "direct"
        if msg is None and s.buffer:
            msg = s.pop()
            how = "buffer"
        answered = False
        if msg is not None:
            _read(s, msg, rnd)
            reads += 1
            if events is not None:
                events.append(("read", v, msg, how))
            if msg.kind is MessageKind.PULL_REQUEST and informed_start[v]:
                _spend_send(s)
                sent += 1
                answered = True
                late.setdefault(msg.sender, []).append(
                    Message(MessageKind.RUMOR, v, rnd, rev[v][msg.port]))
        if protocol is Protocol.PUSH_PULL and informed_start[v] and not answered:
            p = tape.choice(v, rnd, LATE_PUSH, len(adj[v]))
            _spend_send(s)
            sent += 1
            late.setdefault(adj[v][p], []).append(Message(MessageKind.RUMOR, v, rnd, rev[v][p]))

    # phase D
    for r in sorted(late):
        s = states[r]
        items = sorted(late[r], key=_by_port)
        if s.reads_done == 0 and not s.buffer:
            j = 0 if len(items) == 1 else tape.choice(r, rnd, LATE_DIRECT, len(items))
            msg = items.pop(j)
            _read(s, msg, rnd)
            reads += 1
            if events is not None:
                events.append(("read", r, msg, "late"))
        for msg in _order(items, r, rnd, tape, tie_break, LATE_SHUFFLE):
            deliver(r, msg)

    informed = nearly = buffered = max_buf = 0
    for s in states:
        k = len(s.buffer)
        if s.capacity is not None and k > s.capacity:
            raise InvariantViolation("buffer exceeds its capacity")
        informed += s.informed
        nearly += s.nearly_informed
        buffered += k
        if k > max_buf:
            max_buf = k
    return StepResult(RoundRecord(rnd, informed, nearly, buffered, max_buf), sent, reads, dropped)


def run_buffered_python(graph: Graph, config: RunConfig) -> Trace:
    """Reference buffered run built on :func:`step`."""
    config.validate(graph)
    n = graph.node_count
    states = initial_states(graph, config.source, config.buffer_capacity)
    tape = ChoiceTape(config.seed)
    cols: tuple[list[int], ...] = ([], [], [], [])
    sent = reads = dropped = 0
    completion = 0 if n == 1 else None
    rnd = 0
    while completion is None and rnd < config.max_rounds:
        rnd += 1
        res = step(graph, states, rnd, tape, config.protocol, config.tie_break)
        rec = res.record
        for col, x in zip(cols, (rec.informed, rec.nearly_informed, rec.buffered, rec.max_buffer)):
            col.append(x)
        sent += res.sent
        reads += res.reads
        dropped += res.dropped
        if rec.informed == n:
            completion = rnd
    return Trace(
        node_count=n,
        model=Model.BUFFERED,
        informed_counts=tuple(cols[0]),
        nearly_informed_counts=tuple(cols[1]),
        buffered_counts=tuple(cols[2]),
        max_buffer_lens=tuple(cols[3]),
        informed_round=tuple(s.informed_round for s in states),
        completion_round=completion,
        total_messages_sent=sent,
        total_reads=reads,
        total_dropped=dropped,
        final_buffered=sum(len(s.buffer) for s in states),
    )


def _kernel_trace(n: int, model: Model, out: tuple) -> Trace:
    (informed_round, informed, nearly, buffered, max_buf, completion,
     sent, reads, dropped, final_buffered) = out
    return Trace(
        node_count=n,
        model=model,
        informed_counts=tuple(informed.tolist()),
        nearly_informed_counts=tuple(nearly.tolist()),
        buffered_counts=tuple(buffered.tolist()),
        max_buffer_lens=tuple(max_buf.tolist()),
        informed_round=tuple(informed_round.tolist()),
        completion_round=None if completion < 0 else int(completion),
        total_messages_sent=int(sent),
        total_reads=int(reads),
        total_dropped=int(dropped),
        final_buffered=int(final_buffered),
    )


def run(graph: Graph, config: RunConfig, backend: str = "auto") -> Trace:
    """Simulate one run of ``config`` on ``graph``.

    ``backend`` is ``"auto"`` (compiled kernel when importable),
    ``"compiled"`` or ``"python"``.
    """
    config.validate(graph)
    kernels = _backend.select(backend)
    if config.model is Model.CLASSICAL:
        from .classical import run_classical

        return run_classical(graph, config, backend=backend)
    if kernels is None:
        return run_buffered_python(graph, config)
    indptr, nbrs, rev = graph.csr
    out = kernels.run_buffered(
        indptr, nbrs, rev, config.source, PROTOCOL_CODES[config.protocol],
        TIE_BREAK_CODES[config.tie_break],
        -1 if config.buffer_capacity is None else config.buffer_capacity,
        config.max_rounds, config.seed & ((1 << 64) - 1),
    )
    return _kernel_trace(graph.node_count, Model.BUFFERED, out)

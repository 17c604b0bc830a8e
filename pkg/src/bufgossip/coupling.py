"""Run the classical and buffered models on one random tape and compare them.

For Push the informed sets must agree in every round.  For Pull the same
tape positions drive the uninformed nodes' requests, which makes the
divergence between the models visible round by round.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .engine import Model, Protocol, RunConfig, TieBreak, Trace, run
from .graph import Graph
from .tape import ChoiceTape

__all__ = ["ChoiceTape", "CouplingReport", "first_divergence", "run_coupled"]


def first_divergence(a: Trace, b: Trace) -> int | None:
    """Earliest round whose informed sets differ, or None if they never do."""
    rounds = []
    for ra, rb in zip(a.informed_round, b.informed_round):
        if ra != rb:
            rounds.append(min(r for r in (ra, rb) if r >= 0))
    return min(rounds) if rounds else None


@dataclass(frozen=True)
class CouplingReport:
    protocol: Protocol
    source: int
    seed: int
    trace_classical: Trace
    trace_buffered: Trace
    first_divergence_round: int | None

    @property
    def informed_sets_equal_every_round(self) -> bool:
        return self.first_divergence_round is None

    @property
    def partial(self) -> bool:
        return self.trace_classical.censored or self.trace_buffered.censored

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol.value,
            "source": self.source,
            "seed": self.seed,
            "informed_sets_equal_every_round": self.informed_sets_equal_every_round,
            "first_divergence_round": self.first_divergence_round,
            "completion_classical": self.trace_classical.completion_round,
            "completion_buffered": self.trace_buffered.completion_round,
            "partial": self.partial,
            "trace_classical": self.trace_classical.to_dict(),
            "trace_buffered": self.trace_buffered.to_dict(),
        }


def run_coupled(graph: Graph, source: int, protocol: Protocol | str, seed: int,
                max_rounds: int = 1_000_000,
                tie_break: TieBreak = TieBreak.UNIFORM_RANDOM,
                backend: str = "auto") -> CouplingReport:
    protocol = Protocol(protocol)
    base = RunConfig(protocol, source=source, seed=seed, tie_break=tie_break,
                     max_rounds=max_rounds)
    classical = run(graph, replace(base, model=Model.CLASSICAL), backend)
    buffered = run(graph, base, backend)
    return CouplingReport(protocol, source, seed, classical, buffered,
                          first_divergence(classical, buffered))

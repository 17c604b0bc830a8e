"""Monte Carlo harness: many seeded runs per (graph, source), summary
statistics, worst-source aggregation and log-log scaling fits.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from .engine import Model, Protocol, RunConfig, TieBreak, run
from .graph import Graph, GraphError, GraphSpec, generate
from .tape import SOURCE_SAMPLE, derive_seed

log = logging.getLogger(__name__)

Z95 = statistics.NormalDist().inv_cdf(0.975)

RESULT_COLUMNS = ("graph_id", "protocol", "model", "tie_break", "source", "trial", "seed",
                  "completion_round", "censored", "total_messages", "max_buffer")
SUMMARY_COLUMNS = ("graph_id", "protocol", "model", "source", "trials", "mean", "std", "min",
                   "max", "ci95", "worst_source_mean")


@dataclass(frozen=True)
class ExperimentPlan:
    graphs: tuple[GraphSpec, ...]
    protocol: Protocol
    model: Model = Model.BUFFERED
    trials: int = 1
    sources: str | int | dict = "all"  # "all", node id, {"fixed": v} or {"sample": k}
    base_seed: int = 0
    tie_break: TieBreak = TieBreak.UNIFORM_RANDOM
    max_rounds: int = 1_000_000

    def __post_init__(self) -> None:
        object.__setattr__(self, "graphs", tuple(self.graphs))
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "tie_break", TieBreak(self.tie_break))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if not self.graphs:
            raise ValueError("plan needs at least one graph")
        _parse_sources(self.sources)

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentPlan:
        allowed = set(cls.__dataclass_fields__)
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown plan fields: {sorted(unknown)}")
        data = dict(data)
        data["graphs"] = tuple(GraphSpec.from_dict(g) for g in data.get("graphs", ()))
        return cls(**data)

    def to_dict(self) -> dict:
        return {
            "graphs": [g.to_dict() for g in self.graphs],
            "protocol": self.protocol.value,
            "model": self.model.value,
            "trials": self.trials,
            "sources": self.sources,
            "base_seed": self.base_seed,
            "tie_break": self.tie_break.value,
            "max_rounds": self.max_rounds,
        }


def _parse_sources(sources) -> tuple[str, int | None]:
    if sources == "all":
        return "all", None
    if isinstance(sources, int) and not isinstance(sources, bool):
        return "fixed", sources
    if isinstance(sources, dict) and len(sources) == 1:
        (kind, value), = sources.items()
        if kind in ("fixed", "sample") and isinstance(value, int):
            return kind, value
    raise ValueError(f"sources must be 'all', a node id, {{'fixed': v}} or {{'sample': k}}; "
                     f"got {sources!r}")


def select_sources(plan: ExperimentPlan, graph_index: int, g: Graph) -> list[int]:
    kind, value = _parse_sources(plan.sources)
    n = g.node_count
    if kind == "all":
        return list(range(n))
    if kind == "fixed":
        if not 0 <= value < n:
            raise GraphError("sources", f"fixed source {value} not in graph of {n} nodes")
        return [value]
    if not 1 <= value <= n:
        raise GraphError("sources", f"sample size {value} must be in 1..{n}")
    keyed = sorted(range(n), key=lambda v: derive_seed(plan.base_seed, SOURCE_SAMPLE,
                                                        graph_index, v))
    return sorted(keyed[:value])


def trial_seed(base_seed: int, graph_index: int, source: int, trial: int) -> int:
    return derive_seed(base_seed, graph_index, source, trial)


@dataclass(frozen=True)
class ResultRow:
    graph_id: str
    protocol: str
    model: str
    tie_break: str
    source: int
    trial: int
    seed: int
    completion_round: int | None
    censored: bool
    total_messages: int
    max_buffer: int

    def cells(self) -> list:
        return ["" if v is None else (int(v) if isinstance(v, bool) else v)
                for v in (getattr(self, c) for c in RESULT_COLUMNS)]


@dataclass(frozen=True)
class Summary:
    graph_id: str
    protocol: str
    model: str
    source: int
    trials: int
    completed: int
    mean: float
    std: float
    min: float
    max: float
    ci95: float
    censored_fraction: float
    worst_source_mean: float = math.nan

    @property
    def censored_warning(self) -> bool:
        return self.censored_fraction > 0

    def cells(self) -> list:
        return [_cell(getattr(self, c)) for c in SUMMARY_COLUMNS]


def _cell(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6f}"
    return v


@dataclass
class ExperimentResult:
    rows: list[ResultRow] = field(default_factory=list)
    summaries: list[Summary] = field(default_factory=list)

    def worst_source_mean(self, graph_id: str) -> float:
        return next(s.worst_source_mean for s in self.summaries if s.graph_id == graph_id)


@lru_cache(maxsize=8)
def _graph(spec: GraphSpec) -> Graph:
    return generate(spec)


def _run_chunk(plan: ExperimentPlan, graph_index: int, source: int, trials: range,
               backend: str) -> list[ResultRow]:
    spec = plan.graphs[graph_index]
    g = _graph(spec)
    rows = []
    for i in trials:
        seed = trial_seed(plan.base_seed, graph_index, source, i)
        t = run(g, RunConfig(plan.protocol, model=plan.model, source=source, seed=seed,
                             tie_break=plan.tie_break, max_rounds=plan.max_rounds), backend)
        rows.append(ResultRow(spec.label, plan.protocol.value, plan.model.value,
                              plan.tie_break.value, source, i, seed, t.completion_round,
                              t.censored, t.total_messages_sent, t.max_buffer))
    return rows


def summarize(rows: Sequence[ResultRow]) -> list[Summary]:
    """Per-(graph, source) statistics over completed runs, in first-seen order."""
    groups: dict[tuple[str, int], list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.graph_id, r.source), []).append(r)
    out: list[Summary] = []
    for (gid, src), rs in groups.items():
        done = [r.completion_round for r in rs if not r.censored]
        m = len(done)
        if m:
            mean = statistics.fmean(done)
            std = statistics.stdev(done) if m > 1 else 0.0
            lo, hi = float(min(done)), float(max(done))
            ci = Z95 * std / math.sqrt(m)
        else:
            mean = std = lo = hi = ci = math.nan
        censored = (len(rs) - m) / len(rs)
        if censored:
            log.warning("%s source %d: %d of %d runs hit max_rounds; excluded from the mean",
                        gid, src, len(rs) - m, len(rs))
        out.append(Summary(gid, rs[0].protocol, rs[0].model, src, len(rs), m, mean, std, lo,
                           hi, ci, censored))
    worst: dict[str, float] = {}
    for s in out:
        if not math.isnan(s.mean):
            worst[s.graph_id] = max(worst.get(s.graph_id, -math.inf), s.mean)
    return [Summary(**{**s.__dict__, "worst_source_mean": worst.get(s.graph_id, math.nan)})
            for s in out]


def run_experiment(plan: ExperimentPlan, jobs: int = 1, backend: str = "auto") -> ExperimentResult:
    """Run every (graph, source, trial) of ``plan``.

    All graphs and sources are validated before the first run.  Output does
    not depend on ``jobs``: rows are merged in (graph, source, trial) order.
    """
    tasks = []
    for gi, spec in enumerate(plan.graphs):
        g = _graph(spec)
        for src in select_sources(plan, gi, g):
            tasks.append((gi, src))
    chunk = max(1, plan.trials // max(1, 4 * jobs)) if jobs > 1 else plan.trials
    work = [(gi, src, range(a, min(a + chunk, plan.trials)))
            for gi, src in tasks for a in range(0, plan.trials, chunk)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_run_chunk, *zip(*[(plan, gi, src, tr, backend)
                                                      for gi, src, tr in work])))
    else:
        parts = [_run_chunk(plan, gi, src, tr, backend) for gi, src, tr in work]
    rows = [r for part in parts for r in part]
    return ExperimentResult(rows, summarize(rows))


def scaling_fit(points: Iterable[tuple[float, float]]) -> float:
    """Least-squares slope of ``ln y`` against ``ln x``."""
    pts = list(points)
    if any(x <= 0 or y <= 0 for x, y in pts):
        raise ValueError("scaling_fit needs positive x and y")
    if len({x for x, _ in pts}) < 2:
        raise ValueError("scaling_fit needs at least two distinct x values")
    lx = [math.log(x) for x, _ in pts]
    ly = [math.log(y) for _, y in pts]
    mx, my = statistics.fmean(lx), statistics.fmean(ly)
    sxx = sum((a - mx) ** 2 for a in lx)
    sxy = sum((a - mx) * (b - my) for a, b in zip(lx, ly))
    return sxy / sxx


def _csv(header: Sequence[str], rows: Iterable[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def results_csv(rows: Sequence[ResultRow]) -> str:
    return _csv(RESULT_COLUMNS, (r.cells() for r in rows))


def summary_csv(summaries: Sequence[Summary]) -> str:
    return _csv(SUMMARY_COLUMNS, (s.cells() for s in summaries))

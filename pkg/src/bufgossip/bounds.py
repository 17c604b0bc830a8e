"""Closed-form time bounds and the layer-by-layer recursion for Pull.

Every O(.) constant is an explicit argument; nothing here is calibrated.
Bounds use natural logarithms, except the complete-graph Push estimate which
keeps its mixed log2/ln form.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .graph import Graph, diameter, load_profile

HUGE = sys.float_info.max


def push_complete_estimate(n: int) -> float:
    """``log2 n + ln n`` rounds for Push on the complete graph (additive O(1) dropped)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return math.log2(n) + math.log(n)


def pull_regular_upper(D: int, degree: int, c: float = 1.0) -> float:
    """``c * D**2 * degree * ln(degree)``."""
    if D < 1:
        raise ValueError("D must be >= 1")
    if degree < 2:
        raise ValueError("degree must be >= 2")
    if c <= 0:
        raise ValueError("c must be positive")
    return c * D * D * degree * math.log(degree)


def pull_general_upper(max_degree: int, max_load: float | Fraction, D: int,
                       c: float = 1.0) -> float:
    """``c * max_degree * ln(max_degree) * (max_load - 1)**D``, evaluated as written.

    The expression is 0 for regular graphs (``max_load == 1``) and does not
    grow with ``D`` while ``max_load <= 2``; see :func:`general_bound_degenerate`.
    """
    if max_degree < 2:
        raise ValueError("max_degree must be >= 2")
    if max_load < 1:
        raise ValueError("max_load must be >= 1")
    if D < 1:
        raise ValueError("D must be >= 1")
    try:
        return c * max_degree * math.log(max_degree) * float(max_load - 1) ** D
    except OverflowError:
        return HUGE


def general_bound_degenerate(max_load: float | Fraction) -> bool:
    return max_load <= 2


def star_chain_lower(delta: int, d: int) -> tuple[float, bool]:
    """``delta ** d`` as an asymptotic marker; second item flags saturation."""
    if delta < 1 or d < 1:
        raise ValueError("delta and d must be >= 1")
    value = delta ** d
    if value > HUGE:
        return HUGE, True
    return float(value), False


def pull_recursion(t1: float, D: int, max_degree: int, max_load: float | Fraction,
                   c_sqrt: float = 1.0, c_cc: float = 1.0) -> list[float]:
    """Iterate the layer recursion and return ``[T_1, ..., T_D]``.

    Regular graphs (``max_load == 1``) use ``T + c_sqrt*sqrt(T) + c_cc*Δ ln Δ``;
    otherwise ``T*(max_load - 1) + c_cc*Δ ln Δ``.
    """
    if max_load < 1:
        raise ValueError("max_load must be >= 1 for every graph")
    if t1 <= 0:
        raise ValueError("t1 must be positive")
    if D < 1:
        raise ValueError("D must be >= 1")
    if max_degree < 1:
        raise ValueError("max_degree must be >= 1")
    cc = c_cc * max_degree * math.log(max_degree)
    factor = float(max_load - 1)
    regular = max_load == 1
    out = [float(t1)]
    for _ in range(D - 1):
        t = out[-1]
        nxt = t + c_sqrt * math.sqrt(t) + cc if regular else t * factor + cc
        out.append(min(nxt, HUGE))
    return out


@dataclass(frozen=True)
class BoundConstants:
    regular: float = 1.0  # multiplies D^2 Δ ln Δ
    general: float = 1.0  # multiplies Δ ln Δ (E-1)^D
    sqrt_term: float = 1.0
    coupon: float = 1.0
    first_layer: float = 1.0  # T_1 = first_layer * Δ ln Δ

    @classmethod
    def from_dict(cls, data: dict) -> BoundConstants:
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")
        values = {k: float(v) for k, v in data.items()}
        if any(v <= 0 for v in values.values()):
            raise ValueError("constants must be positive")
        return cls(**values)


@dataclass(frozen=True)
class BoundsReport:
    node_count: int
    diameter: int
    max_degree: int
    max_load: float
    regular: bool
    push_complete_estimate: float | None
    pull_regular_upper: float | None
    pull_general_upper: float | None
    general_degenerate: bool
    star_chain_lower: float | None
    star_chain_lower_huge: bool
    recursion_profile: list[float]
    constants_used: BoundConstants = field(default_factory=BoundConstants)

    def to_dict(self) -> dict:
        return asdict(self)

    def table(self) -> str:
        rows = [(k, v) for k, v in self.to_dict().items()
                if k not in ("recursion_profile", "constants_used")]
        rows.append(("recursion_T_D", self.recursion_profile[-1] if self.recursion_profile else None))
        rows.extend((f"c.{k}", v) for k, v in asdict(self.constants_used).items())
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {_fmt(v)}" for k, v in rows) + "\n"


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def bounds_report(g: Graph, constants: BoundConstants | None = None,
                  star_chain: tuple[int, int] | None = None) -> BoundsReport:
    """Evaluate every bound that applies to ``g``.

    ``star_chain`` is ``(d, delta)`` when ``g`` is a star chain.
    """
    c = constants or BoundConstants()
    n = g.node_count
    D = diameter(g)
    dmax = g.max_degree
    e_max = load_profile(g).max_load
    regular = g.is_regular
    reg = None
    gen = None
    profile: list[float] = []
    if D >= 1 and dmax >= 2:
        if regular:
            reg = pull_regular_upper(D, dmax, c.regular)
        gen = pull_general_upper(dmax, e_max, D, c.general)
        t1 = c.first_layer * dmax * math.log(dmax)
        profile = pull_recursion(t1, D, dmax, e_max, c.sqrt_term, c.coupon)
    lower, huge = (None, False)
    if star_chain is not None:
        lower, huge = star_chain_lower(star_chain[1], star_chain[0])
    return BoundsReport(
        node_count=n,
        diameter=D,
        max_degree=dmax,
        max_load=float(e_max),
        regular=regular,
        push_complete_estimate=push_complete_estimate(n) if n >= 2 else None,
        pull_regular_upper=reg,
        pull_general_upper=gen,
        general_degenerate=general_bound_degenerate(e_max),
        star_chain_lower=lower,
        star_chain_lower_huge=huge,
        recursion_profile=profile,
        constants_used=c,
    )

import json
import math
from dataclasses import asdict
from fractions import Fraction

import pytest

from bufgossip.bounds import (
    HUGE,
    BoundConstants,
    bounds_report,
    general_bound_degenerate,
    pull_general_upper,
    pull_recursion,
    pull_regular_upper,
    push_complete_estimate,
    star_chain_lower,
)
from bufgossip.graph import GraphSpec, diameter, generate, load_profile


def test_push_complete_estimate():
    assert push_complete_estimate(2) == pytest.approx(1.6931, abs=1e-4)
    assert push_complete_estimate(4) == pytest.approx(3.3863, abs=1e-4)
    assert push_complete_estimate(1024) == pytest.approx(16.9315, abs=1e-4)
    with pytest.raises(ValueError):
        push_complete_estimate(1)


def test_pull_regular_upper():
    assert pull_regular_upper(1, 2, 1) == pytest.approx(2 * math.log(2))
    assert pull_regular_upper(4, 8, 1) == pytest.approx(266.17, abs=0.01)
    with pytest.raises(ValueError):
        pull_regular_upper(3, 1)
    with pytest.raises(ValueError):
        pull_regular_upper(0, 4)


def test_pull_general_upper():
    assert pull_general_upper(8, 8, 2, 1) == pytest.approx(8 * math.log(8) * 49)
    assert pull_general_upper(8, 8, 2, 1) == pytest.approx(815.1, abs=0.1)
    assert pull_general_upper(6, 1, 5) == 0
    assert general_bound_degenerate(1) and general_bound_degenerate(Fraction(3, 2))
    assert not general_bound_degenerate(Fraction(22, 5))
    with pytest.raises(ValueError):
        pull_general_upper(4, Fraction(1, 2), 3)
    assert pull_general_upper(10, 10**6, 10**4) == HUGE


def test_pull_general_upper_star_chain_3_4():
    g = generate(GraphSpec.star_chain(3, 4))
    e_max = load_profile(g).max_load
    assert (g.max_degree, diameter(g), e_max) == (6, 4, Fraction(22, 5))
    expected = 6 * math.log(6) * (22 / 5 - 1) ** 4
    assert pull_general_upper(6, e_max, 4) == pytest.approx(expected)


def test_star_chain_lower():
    assert star_chain_lower(8, 2) == (64.0, False)
    assert star_chain_lower(1, 17) == (1.0, False)
    assert star_chain_lower(4, 3) == (64.0, False)
    assert star_chain_lower(10, 400) == (HUGE, True)
    with pytest.raises(ValueError):
        star_chain_lower(0, 2)


def test_recursion_regular_closes_to_d_squared():
    delta = 8
    cc = delta * math.log(delta)
    prof = pull_recursion(cc, 64, delta, 1, c_sqrt=1, c_cc=1)
    assert len(prof) == 64
    assert all(b >= a for a, b in zip(prof, prof[1:]))
    ratios = [t / (d * d * cc) for d, t in enumerate(prof, 1)]
    assert max(ratios) <= 1.0
    # independent check of one step
    assert prof[1] == pytest.approx(prof[0] + math.sqrt(prof[0]) + cc)


def test_recursion_emax_two_is_linear():
    cc = 8 * math.log(8)
    prof = pull_recursion(5.0, 10, 8, 2, c_cc=1)
    assert prof == pytest.approx([5.0 + i * cc for i in range(10)])


def test_recursion_star_chain_geometric():
    delta = 8
    prof = pull_recursion(delta * math.log(delta), 12, delta + 1, delta)
    tail = [b / a for a, b in zip(prof, prof[1:])][-4:]
    assert tail == pytest.approx([delta - 1] * 4, rel=1e-3)


def test_recursion_rejects_load_below_one():
    with pytest.raises(ValueError):
        pull_recursion(1.0, 3, 4, Fraction(9, 10))


def test_pure_functions():
    assert pull_recursion(3.0, 5, 4, 3) == pull_recursion(3.0, 5, 4, 3)


def test_report_for_regular_graph():
    g = generate(GraphSpec.random_regular(64, 8, seed=1))
    rep = bounds_report(g, BoundConstants(regular=2.0))
    assert rep.regular and rep.max_load == 1.0
    assert rep.pull_regular_upper == pytest.approx(2.0 * rep.diameter ** 2 * 8 * math.log(8))
    assert rep.pull_general_upper == 0 and rep.general_degenerate
    assert len(rep.recursion_profile) == rep.diameter
    assert rep.star_chain_lower is None


def test_report_for_star_chain():
    g = generate(GraphSpec.star_chain(3, 4))
    rep = bounds_report(g, star_chain=(3, 4))
    assert rep.star_chain_lower == 64
    assert not rep.regular and rep.pull_regular_upper is None
    values = [v for v in asdict(rep).values() if isinstance(v, float)]
    assert all(math.isfinite(v) and v >= 0 for v in values)
    json.dumps(rep.to_dict())
    assert "pull_general_upper" in rep.table()


def test_constants_parsing():
    c = BoundConstants.from_dict({"regular": 3, "coupon": 0.5})
    assert c.regular == 3.0 and c.coupon == 0.5 and c.general == 1.0
    with pytest.raises(ValueError):
        BoundConstants.from_dict({"bogus": 1})
    with pytest.raises(ValueError):
        BoundConstants.from_dict({"regular": -1})

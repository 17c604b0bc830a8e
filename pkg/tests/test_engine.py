import random
from collections import deque

import pytest
from hypothesis import given, settings, strategies as st

from bufgossip.engine import (
    InvariantViolation,
    Message,
    MessageKind,
    Model,
    Protocol,
    RunConfig,
    TieBreak,
    initial_states,
    run,
    run_buffered_python,
    step,
)
from bufgossip.graph import GraphError, GraphSpec, generate
from bufgossip.tape import ChoiceTape
from _invariants import checked_run
from conftest import random_connected_graph, shuffled_ports


def star(delta):
    return generate(GraphSpec.star(delta))


# -- step examples ----------------------------------------------------------

def test_push_path3_middle_source_direct_read():
    g = generate(GraphSpec.path_graph(3))
    for seed in range(10):
        states = initial_states(g, 1)
        res = step(g, states, 1, ChoiceTape(seed), Protocol.PUSH)
        newly = [v for v in (0, 2) if states[v].informed]
        assert len(newly) == 1
        assert states[newly[0]].informed_round == 1
        assert res.record.informed == 2
        assert res.record.buffered == 0


def test_pull_star4_round1_hand_trace():
    g = star(4)
    for seed in range(20):
        states = initial_states(g, 0)
        events = []
        res = step(g, states, 1, ChoiceTape(seed), Protocol.PULL, TieBreak.UNIFORM_RANDOM, events)
        informed_leaves = [v for v in range(1, 5) if states[v].informed]
        assert len(informed_leaves) == 1
        leaf = informed_leaves[0]
        # the center read exactly the request of that leaf, directly
        reads = [e for e in events if e[0] == "read"]
        assert [(e[1], e[2].sender, e[3]) for e in reads] == [(0, leaf, "direct"),
                                                              (leaf, 0, "late")]
        assert sorted(m.sender for m in states[0].buffer) == sorted({1, 2, 3, 4} - {leaf})
        assert all(m.kind is MessageKind.PULL_REQUEST for m in states[0].buffer)
        assert res.sent == 5
        assert res.record.buffered == 3


def test_pull_nonempty_buffer_appends_all_and_reads_head():
    g = star(2)
    states = initial_states(g, 0)
    old = Message(MessageKind.PULL_REQUEST, 1, 1, port=0)
    states[0].append(old)
    events = []
    step(g, states, 2, ChoiceTape(3), Protocol.PULL, TieBreak.PORT_ORDER, events)
    appended = [e[2] for e in events if e[0] == "append" and e[1] == 0]
    assert [(m.sender, m.sent_round) for m in appended] == [(1, 2), (2, 2)]
    center_reads = [e for e in events if e[0] == "read" and e[1] == 0]
    assert len(center_reads) == 1 and center_reads[0][2] is old
    assert states[1].informed and states[1].informed_round == 2
    assert not states[2].informed
    assert list(states[0].buffer) == appended


def test_step_rejects_round_zero():
    g = star(2)
    with pytest.raises(ValueError):
        step(g, initial_states(g, 0), 0, ChoiceTape(0), Protocol.PUSH)


def test_step_budget_assertion():
    g = star(2)
    states = initial_states(g, 0)
    states[0].sends_done = 5  # reset at round start, so no violation
    step(g, states, 1, ChoiceTape(0), Protocol.PUSH)
    from bufgossip.engine import _spend_send
    states[0].sends_done = 1
    with pytest.raises(InvariantViolation):
        _spend_send(states[0])


# -- run examples -----------------------------------------------------------

def test_push_complete2():
    g = generate(GraphSpec.complete(2))
    for seed in range(5):
        assert run(g, RunConfig(Protocol.PUSH, seed=seed)).completion_round == 1


@pytest.mark.parametrize("backend", ["python", "auto"])
@pytest.mark.parametrize("tie_break", list(TieBreak))
def test_pull_star4_completes_in_four(backend, tie_break):
    g = star(4)
    for seed in range(30):
        t = run(g, RunConfig(Protocol.PULL, seed=seed, tie_break=tie_break), backend)
        assert t.completion_round == 4
        assert t.informed_counts == (2, 3, 4, 5)


def test_pull_star_chain_2_8_floor():
    g = generate(GraphSpec.star_chain(2, 8))
    for seed in range(300):
        assert run(g, RunConfig(Protocol.PULL, seed=seed)).completion_round >= 17


def test_single_node_graph():
    g = generate(GraphSpec.complete(1))
    for proto in Protocol:
        t = run(g, RunConfig(proto))
        assert t.completion_round == 0
        assert t.rounds_run == 0


def test_censoring():
    g = generate(GraphSpec.star_chain(2, 8))
    t = run(g, RunConfig(Protocol.PULL, seed=1, max_rounds=5))
    assert t.completion_round is None and t.censored
    assert t.rounds_run == 5


def test_invalid_config():
    with pytest.raises(ValueError):
        RunConfig(Protocol.PUSH, max_rounds=0)
    with pytest.raises(GraphError):
        run(star(3), RunConfig(Protocol.PUSH, source=9))
    with pytest.raises(ValueError):
        RunConfig("gossip")


def test_run_is_deterministic():
    g = generate(GraphSpec.random_regular(32, 4, seed=1))
    for proto in Protocol:
        cfg = RunConfig(proto, seed=77, source=5)
        assert run(g, cfg) == run(g, cfg)
        assert run(g, cfg).to_jsonl() == run(g, cfg).to_jsonl()


def test_tie_break_can_change_the_trace():
    g = generate(GraphSpec.star_chain(2, 8))
    differ = sum(
        run(g, RunConfig(Protocol.PULL, seed=s)) != run(
            g, RunConfig(Protocol.PULL, seed=s, tie_break=TieBreak.PORT_ORDER))
        for s in range(20))
    assert differ > 0


def test_trace_shape():
    g = generate(GraphSpec.star_chain(2, 4))
    t = run(g, RunConfig(Protocol.PULL, seed=3))
    assert list(t.informed_counts) == sorted(t.informed_counts)
    assert t.informed_counts[-1] == g.node_count
    assert t.informed_counts.index(g.node_count) + 1 == t.completion_round
    assert max(t.informed_round) == t.completion_round
    assert t.informed_round[0] == 0
    assert t.total_messages_sent == t.total_reads + t.final_buffered + t.total_dropped
    recs = list(t.records())
    assert recs[0].round == 1 and recs[-1].round == t.completion_round
    for r in range(t.completion_round + 1):
        assert len(t.informed_set(r)) == (1 if r == 0 else t.informed_counts[r - 1])


def test_jsonl_format():
    t = run(star(4), RunConfig(Protocol.PULL))
    lines = t.to_jsonl().splitlines()
    assert lines[0] == ('{"round": 1, "informed": 2, "nearly_informed": 0, "buffered": 3, '
                        '"max_buffer": 3}')
    assert lines[-1] == '{"completion_round": 4, "total_messages": 14}'
    assert len(lines) == 5


def test_push_invariant_buffers_of_uninformed_stay_empty():
    g = generate(GraphSpec.random_regular(32, 4, seed=9))
    states = initial_states(g, 0)
    tape = ChoiceTape(4)
    for rnd in range(1, 40):
        for s in states:
            assert s.informed or not s.buffer
        step(g, states, rnd, tape, Protocol.PUSH)


def test_nearly_informed_counted():
    # star chain: the second center sits nearly informed while its backlog drains
    g = generate(GraphSpec.star_chain(2, 8))
    t = run(g, RunConfig(Protocol.PULL, seed=2))
    assert max(t.nearly_informed_counts) >= 1


# -- capacity ---------------------------------------------------------------

def test_capacity_drop_tail():
    g = star(8)
    t = run_buffered_python(g, RunConfig(Protocol.PULL, seed=1, buffer_capacity=2,
                                         max_rounds=200))
    assert t.max_buffer <= 2
    assert t.total_dropped > 0
    assert t.total_messages_sent == t.total_reads + t.final_buffered + t.total_dropped


def test_capacity_zero_only_direct_reads():
    g = star(3)
    t = run(g, RunConfig(Protocol.PULL, seed=5, buffer_capacity=0, max_rounds=500))
    assert t.max_buffer == 0
    assert t.completion_round is not None


# -- invariants (property based) --------------------------------------------

graphs = st.builds(
    lambda seed, n, extra: random_connected_graph(random.Random(seed), n, extra),
    st.integers(0, 2**32), st.integers(1, 24), st.integers(0, 40))


@settings(max_examples=150, deadline=None)
@given(graphs, st.sampled_from(list(Protocol)), st.sampled_from(list(TieBreak)),
       st.integers(0, 2**64 - 1), st.one_of(st.none(), st.integers(0, 4)),
       st.data())
def test_engine_invariants(g, protocol, tie_break, seed, capacity, data):
    source = data.draw(st.integers(0, g.node_count - 1))
    checked_run(g, protocol, tie_break, seed, source, capacity, rounds=40)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(list(Protocol)), st.integers(0, 2**64 - 1))
def test_engine_invariants_with_permuted_ports(gseed, protocol, seed):
    rng = random.Random(gseed)
    g = shuffled_ports(rng, random_connected_graph(rng, 12, 15))
    checked_run(g, protocol, TieBreak.PORT_ORDER, seed, rounds=40)


def test_fifo_with_sequence_numbers():
    # independent FIFO check: tag every append with a sequence number and make
    # sure buffer reads per node come out in increasing order
    g = generate(GraphSpec.star_chain(3, 5))
    states = initial_states(g, 0)
    tape = ChoiceTape(12)
    seq = {}
    last = {}
    counter = 0
    for rnd in range(1, 120):
        events = []
        step(g, states, rnd, tape, Protocol.PULL, TieBreak.UNIFORM_RANDOM, events)
        for ev in events:
            if ev[0] == "append":
                seq[id(ev[2]), ev[1]] = counter
                counter += 1
            elif ev[0] == "read" and ev[3] == "buffer":
                k = seq.pop((id(ev[2]), ev[1]))
                assert k > last.get(ev[1], -1)
                last[ev[1]] = k
    assert counter > 100


def test_classical_model_flag_dispatch():
    g = star(4)
    t = run(g, RunConfig(Protocol.PULL, model=Model.CLASSICAL))
    assert t.model is Model.CLASSICAL
    assert t.completion_round == 1


def test_node_state_queue():
    s = type(initial_states(star(1), 0)[0])(capacity=1)
    m = Message(MessageKind.RUMOR, 0, 1, 0)
    assert s.append(m) and not s.append(m)
    assert s.nearly_informed
    assert s.pop() is m and not s.nearly_informed
    assert s.buffer == deque()

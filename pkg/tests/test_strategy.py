import random
from fractions import Fraction as F

import pytest

from powercast.convergecast import compute_optimal_convergecast, emit_convergecast_strategy
from powercast.generators import gen_random_line
from powercast.model import EdgeLoc, LineLoc, NodeLoc
from powercast.strategy import (
    BudgetExceeded,
    InvalidStrategy,
    Strategy,
    TimedMove,
    dump_strategy,
    load_strategy,
    max_power_used,
    simulate,
    strategy_from_dict,
    strategy_to_dict,
    verify_broadcast,
    verify_convergecast,
)

from helpers import info_closure_brute, line, star


def lmove(agent, depart, a, b):
    return TimedMove(agent, F(depart), LineLoc(F(a)), LineLoc(F(b)))


def test_head_on_meeting():
    c = line(0, 10)
    s = Strategy((lmove(1, 0, 0, 5), lmove(2, 0, 10, 5)))
    trace = simulate(c, s, F(5))
    assert [(m.time, m.place.x, set(m.agents)) for m in trace.meetings] == [(5, 5, {1, 2})]
    assert verify_convergecast(trace) == (1, 5, LineLoc(F(5)))
    assert max_power_used(trace) == (5, [5, 5])


def test_crossing_meeting_counts():
    c = line(0, 10)
    s = Strategy((lmove(1, 0, 0, 10), lmove(2, 0, 10, 0)))
    trace = simulate(c, s, F(10))
    assert trace.meetings[0].time == 5 and trace.meetings[0].place.x == 5


def test_overtaking_tangency_counts():
    # both waiting at the same point for an instant counts as a meeting
    c = line(0, 4)
    s = Strategy((lmove(1, 0, 0, 2), lmove(2, 0, 4, 2), lmove(2, 2, 2, 4)))
    trace = simulate(c, s, F(10))
    assert any(m.place.x == 2 for m in trace.meetings)


def test_stationary_meeting_at_node():
    g = star([5, 7])
    s = Strategy((TimedMove(2, F(0), NodeLoc("l2"), NodeLoc("hub")),
                  TimedMove(2, F(7), NodeLoc("hub"), EdgeLoc("hub", "l1", F(2)))))
    trace = simulate(g, s, F(9))
    # nobody meets: agent 1 sits at its leaf, agent 2 stops inside the other edge
    assert trace.meetings == []
    s2 = Strategy((TimedMove(2, F(0), NodeLoc("l2"), NodeLoc("hub")),
                   TimedMove(2, F(7), NodeLoc("hub"), NodeLoc("l1"))))
    trace = simulate(g, s2, F(12))
    assert [(m.time, m.place) for m in trace.meetings] == [(12, NodeLoc("l1"))]
    assert verify_convergecast(trace) == (1, 12, NodeLoc("l1"))


def test_fixture_conv_strategy_meetings():
    c = line(0, 4, 8)
    res = compute_optimal_convergecast(c)
    strat = emit_convergecast_strategy(c, res.plan)
    trace = simulate(c, strat, F(3))
    # split 1 mirrors the split-2 plan: handoffs at x=5 (t=3) then x=3 (t=5)
    assert {(m.time, m.place.x) for m in trace.meetings} == {(3, 5), (5, 3)}
    assert trace.power == {1: 3, 2: 3, 3: 3}


def test_budget_exceeded_reports_first_crossing():
    c = line(0, 10)
    s = Strategy((lmove(1, 0, 0, 5), lmove(2, 0, 10, 5)))
    with pytest.raises(BudgetExceeded) as exc:
        simulate(c, s, F(4))
    assert exc.value.time == 4 and exc.value.agent in (1, 2)


def test_validation_errors():
    c = line(0, 10)
    with pytest.raises(InvalidStrategy):  # discontinuous path
        simulate(c, Strategy((lmove(1, 0, 0, 3), lmove(1, 5, 4, 6))), F(99))
    with pytest.raises(InvalidStrategy):  # overlapping moves
        simulate(c, Strategy((lmove(1, 0, 0, 3), lmove(1, 1, 3, 6))), F(99))
    with pytest.raises(InvalidStrategy):  # does not start at the initial position
        simulate(c, Strategy((lmove(1, 0, 2, 3),)), F(99))
    with pytest.raises(InvalidStrategy):  # unknown agent
        simulate(c, Strategy((lmove(7, 0, 0, 1),)), F(99))
    g = star([1, 2])
    with pytest.raises(InvalidStrategy):  # move off the network
        simulate(g, Strategy((TimedMove(1, F(0), NodeLoc("l1"), NodeLoc("l2")),)), F(9))
    with pytest.raises(InvalidStrategy):  # offset beyond the edge
        simulate(g, Strategy((TimedMove(1, F(0), NodeLoc("l1"), EdgeLoc("hub", "l1", F(5))),)), F(9))


def test_meeting_symmetry_and_closure():
    rng = random.Random(4)
    for seed in range(15):
        c = gen_random_line(rng.randint(2, 8), seed + 40)
        res = compute_optimal_convergecast(c)
        strat = emit_convergecast_strategy(c, res.plan)
        trace = simulate(c, strat, res.power)
        # conservation: propagated info equals the brute-force closure
        assert info_closure_brute(trace.agents, trace.meetings) == trace.info


def test_determinism():
    c = gen_random_line(9, 123)
    res = compute_optimal_convergecast(c)
    strat = emit_convergecast_strategy(c, res.plan)
    t1 = simulate(c, strat, res.power)
    t2 = simulate(c, strat, res.power)
    assert t1.meetings == t2.meetings and t1.info == t2.info and t1.power == t2.power


def test_zero_duration_relay_chain():
    # three agents coincide pairwise at the same instant at different points:
    # the unions at one timestamp propagate to a fixpoint
    c = line(0, 2, 4)
    s = Strategy((lmove(1, 0, 0, 1), lmove(2, 0, 2, 1), lmove(3, 0, 4, 3),
                  lmove(2, 1, 1, 3)))
    trace = simulate(c, s, F(4))
    # meetings at (1, x=1) and (3, x=3): after t=3 agent 2 and 3 share {1,2,3}
    assert trace.info[2] == frozenset({1, 2, 3})
    assert trace.info[3] == frozenset({1, 2, 3})
    assert trace.info[1] == frozenset({1, 2})


def test_json_round_trip():
    c = line(0, 4, 8)
    res = compute_optimal_convergecast(c)
    strat = emit_convergecast_strategy(c, res.plan)
    again = load_strategy(dump_strategy(strat))
    assert again == strat
    g = star([1, 2, 3])
    s = Strategy((TimedMove(1, F(1, 3), NodeLoc("l1"), EdgeLoc("hub", "l1", F(1, 2))),))
    assert strategy_from_dict(strategy_to_dict(s)) == s


def test_single_agent_trivial():
    c = line(5)
    trace = simulate(c, Strategy(()), F(0))
    assert verify_convergecast(trace) == (1, 0, LineLoc(F(5)))
    assert not verify_broadcast(trace, 1)
    assert max_power_used(trace) == (0, [0])


def test_broadcast_failure_lists_uninformed():
    c = line(0, 4, 8)
    # agent 3 never moves and nobody reaches it
    s = Strategy((lmove(1, 0, 0, 3), lmove(2, 0, 4, 3)))
    trace = simulate(c, s, F(3))
    assert verify_broadcast(trace, 2) == frozenset({3})

import random
from fractions import Fraction as F

import pytest

from powercast.disttree import (
    competitive_report,
    run_distributed_broadcast,
    run_unknown_tree,
)
from powercast.generators import gen_random_tree
from powercast.graphs import separation
from powercast.model import InvariantError, WeightedTree

from helpers import discretized_unknown_tree, star


def path_tree(length) -> WeightedTree:
    return WeightedTree(("a", "b"), (("a", "b", F(length)),), {1: "a", 2: "b"})


def caterpillar() -> WeightedTree:
    # spine u-v of weight 2; u carries two unit leaves, v one leaf of weight 3
    nodes = ("u", "v", "a", "b", "c")
    edges = (("u", "v", F(2)), ("u", "a", F(1)), ("u", "b", F(1)), ("v", "c", F(3)))
    return WeightedTree(nodes, edges, {1: "a", 2: "b", 3: "c"})


def test_path_meets_in_the_middle():
    out = run_unknown_tree(path_tree(10), F(10))
    assert out.achieved
    assert out.power == {1: 5, 2: 5}
    assert out.completion == 5
    assert out.meeting_point == ("edge", "a", "b", 5)


def test_star_event_trace():
    # the protocol dispatches the least-used agent as soon as one port is free:
    # agent 1 leaves the hub at t=2 and meets agent 3 inside the long arm
    out = run_unknown_tree(star([1, 2, 3]), F(4))
    assert out.achieved
    assert out.power == {1: F(3, 2), 2: 2, 3: F(5, 2)}
    assert out.completion == F(5, 2)
    assert out.meeting_point == ("edge", "hub", "l3", F(1, 2))
    assert max(out.power.values()) <= separation(star([1, 2, 3])) == 4
    kinds = [e["kind"] for e in out.events]
    assert kinds.count("dispatch") == 1 and "gathered" in kinds


def test_caterpillar_trace():
    # hand-derived: ferries from the unit leaves reach u at t=1, agent 1 is
    # dispatched down the spine and arrives at v together with agent 3
    t = caterpillar()
    out = run_unknown_tree(t, separation(t))
    assert out.achieved
    assert out.power == {1: 3, 2: 1, 3: 3}
    assert out.completion == 3
    assert out.meeting_point == ("node", "v")


@pytest.mark.parametrize("tree", [path_tree(10), star([1, 2, 3]), caterpillar(), star([2, 2, 2, 2])])
def test_matches_discretized_reference(tree):
    budget = separation(tree)
    exact = run_unknown_tree(tree, budget)
    approx_achieved, approx_power = discretized_unknown_tree(tree, budget)
    assert exact.achieved == approx_achieved
    for aid, used in exact.power.items():
        assert abs(float(used) - approx_power[aid]) < 0.05


def test_distributed_broadcast_path():
    out = run_distributed_broadcast(path_tree(10), 1, F(20))
    assert out.achieved
    assert out.power == {1: 10, 2: 10}
    assert all(info == frozenset({1, 2}) for info in out.info.values())


def test_distributed_broadcast_star():
    t = star([1, 2, 3])
    d = separation(t)
    out = run_distributed_broadcast(t, 1, 2 * d)
    assert out.achieved
    assert out.power == {1: 3, 2: 4, 3: 5}
    assert max(out.power.values()) <= 2 * d
    assert any(e["kind"] == "activate" and e["agent"] == 2 for e in out.events)


def test_single_edge_tree_broadcast():
    out = run_distributed_broadcast(path_tree(6), 2, F(12))
    assert out.achieved and out.power == {1: 6, 2: 6}


def test_budget_starvation_strands():
    out = run_unknown_tree(path_tree(10), F(2))
    assert not out.achieved
    assert out.power == {1: 2, 2: 2}
    assert any(e["kind"] == "strand" for e in out.events)


def test_determinism():
    t = gen_random_tree(40, 11)
    d = separation(t)
    a = run_unknown_tree(t, d)
    b = run_unknown_tree(t, d)
    assert a.events == b.events and a.power == b.power


def test_port_relabeling_keeps_bound():
    rng = random.Random(14)
    for _ in range(6):
        t = gen_random_tree(rng.randint(4, 30), rng.randint(0, 10**6))
        d = separation(t)
        for relabel in range(10):
            out = run_unknown_tree(t, d, port_seed=relabel)
            assert out.achieved
            assert max(out.power.values()) <= d


def test_bounds_on_random_trees():
    rng = random.Random(15)
    for _ in range(40):
        t = gen_random_tree(rng.randint(2, 60), rng.randint(0, 10**6))
        d = separation(t)
        out = run_unknown_tree(t, d)
        assert out.achieved
        assert max(out.power.values()) <= d
        source = min(t.agents)
        bout = run_distributed_broadcast(t, source, 2 * d)
        assert bout.achieved
        assert max(bout.power.values()) <= 2 * d
        assert all(source in info for info in bout.info.values())


def test_no_entry_past_stopped_agents():
    # once an agent stops inside an edge, nobody later walks past it towards
    # the side it came from
    rng = random.Random(16)
    for _ in range(15):
        t = gen_random_tree(rng.randint(3, 25), rng.randint(0, 10**6))
        out = run_unknown_tree(t, separation(t))
        stops = {}
        for e in out.events:
            if e["kind"] in ("meet", "strand") and "edge" in e["at"]:
                u, v = e["at"]["edge"]
                stops.setdefault(frozenset((u, v)), []).append(e)
        for e in out.events:
            if e["kind"] != "dispatch":
                continue
        # meetings freeze both parties: no further dispatch enters a saturated edge
        for edge_key, evts in stops.items():
            first = min(F(e["time"]) for e in evts)
            later_entries = [
                e
                for e in out.events
                if e["kind"] == "dispatch"
                and frozenset((e["frm"], e["to"])) == edge_key
                and F(e["time"]) > first
            ]
            assert later_entries == []


def test_requires_agents_at_leaves():
    bad = WeightedTree(("a", "b", "c"), (("a", "b", F(1)), ("b", "c", F(1))), {1: "a"})
    with pytest.raises(InvariantError):
        run_unknown_tree(bad, F(5))


def test_competitive_report_fixtures():
    rep = competitive_report(path_tree(8))
    assert rep == {
        "achieved": True,
        "max_power": 4,
        "separation": 8,
        "ratio_vs_lower_bound": 1,
    }
    rep = competitive_report(star([1, 2, 3]))
    assert rep["achieved"] and rep["separation"] == 4
    assert rep["max_power"] == F(5, 2) and rep["ratio_vs_lower_bound"] == F(5, 4)


def test_tie_heavy_trees():
    # small integer weights force many simultaneous arrivals and equal-power
    # ties; the bound and determinism must survive them
    rng = random.Random(17)
    for trial in range(40):
        n = rng.randint(3, 24)
        names = [f"v{i}" for i in range(n)]
        edges = []
        for i in range(1, n):
            parent = rng.randrange(i)
            edges.append((names[parent], names[i], F(rng.randint(1, 3))))
        degree = {u: 0 for u in names}
        for u, v, _ in edges:
            degree[u] += 1
            degree[v] += 1
        leaves = [u for u in names if degree[u] == 1]
        tree = WeightedTree(tuple(names), tuple(edges), {i + 1: l for i, l in enumerate(leaves)})
        d = separation(tree)
        out = run_unknown_tree(tree, d)
        assert out.achieved, trial
        assert max(out.power.values()) <= d, trial
        again = run_unknown_tree(tree, d)
        assert out.events == again.events
        bout = run_distributed_broadcast(tree, 1, 2 * d)
        assert bout.achieved and max(bout.power.values()) <= 2 * d, trial


def test_symmetric_spider_saturates_without_dispatch():
    # all arms identical: every arrival at the hub is simultaneous, all ports
    # fill in one instant and the protocol ends right there
    t = star([2, 2, 2, 2])
    out = run_unknown_tree(t, separation(t))
    assert out.achieved
    assert out.power == {1: 2, 2: 2, 3: 2, 4: 2}
    assert out.meeting_point == ("node", "hub")
    assert not [e for e in out.events if e["kind"] == "dispatch"]


def test_tied_power_dispatch_breaks_by_port():
    # three simultaneous equal-power arrivals, one unused port: the port-1
    # arrival moves
    t = star([2, 2, 2, 5])
    out = run_unknown_tree(t, separation(t))
    assert out.achieved
    dispatch = [e for e in out.events if e["kind"] == "dispatch"]
    assert dispatch and dispatch[0]["agent"] == 1 and dispatch[0]["to"] == "l4"
    # agent 1 walks on towards the long arm and meets agent 4 inside it
    assert out.meeting_point[0] == "edge"
    assert max(out.power.values()) <= separation(t)

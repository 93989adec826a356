import json
from fractions import Fraction

import pytest

from powercast.model import (
    InvariantError,
    LineConfig,
    ParseError,
    WeightedTree,
    dump_configuration,
    load_configuration,
    validate_tree_for_distributed,
)

from helpers import line, star


def test_load_line():
    cfg = load_configuration('{"kind":"line","positions":["0","4","8"]}')
    assert isinstance(cfg, LineConfig)
    assert cfg.n == 3
    assert cfg.positions == (0, 4, 8)


def test_load_line_rejects_unsorted():
    with pytest.raises(InvariantError):
        load_configuration('{"kind":"line","positions":["4","0"]}')


def test_load_star_tree():
    doc = {
        "kind": "tree",
        "nodes": ["c", "l1", "l2", "l3"],
        "edges": [
            {"u": "c", "v": "l1", "w": "1"},
            {"u": "c", "v": "l2", "w": "2"},
            {"u": "c", "v": "l3", "w": "3"},
        ],
        "agents": [{"id": 1, "node": "l1"}, {"id": 2, "node": "l2"}, {"id": 3, "node": "l3"}],
    }
    cfg = load_configuration(json.dumps(doc))
    assert isinstance(cfg, WeightedTree)
    assert sorted(cfg.leaves()) == ["l1", "l2", "l3"]


@pytest.mark.parametrize(
    "mutate",
    [
        lambda d: d["edges"].append({"u": "l1", "v": "l1", "w": "1"}),  # self-loop
        lambda d: d["edges"].__setitem__(0, {"u": "c", "v": "l1", "w": "0"}),  # zero weight
        lambda d: d["agents"].__setitem__(1, {"id": 2, "node": "l1"}),  # shared start
        lambda d: d["agents"].__setitem__(1, {"id": 5, "node": "l2"}),  # sparse ids
        lambda d: d["edges"].pop(),  # disconnected
    ],
)
def test_graph_invariants(mutate):
    doc = {
        "kind": "graph",
        "nodes": ["c", "l1", "l2", "l3"],
        "edges": [
            {"u": "c", "v": "l1", "w": "1"},
            {"u": "c", "v": "l2", "w": "2"},
            {"u": "c", "v": "l3", "w": "3"},
        ],
        "agents": [{"id": 1, "node": "l1"}, {"id": 2, "node": "l2"}],
    }
    mutate(doc)
    with pytest.raises(InvariantError):
        load_configuration(json.dumps(doc))


def test_tree_needs_tree_shape():
    doc = {
        "kind": "tree",
        "nodes": ["a", "b", "c"],
        "edges": [
            {"u": "a", "v": "b", "w": "1"},
            {"u": "b", "v": "c", "w": "1"},
            {"u": "a", "v": "c", "w": "1"},
        ],
        "agents": [],
    }
    with pytest.raises(InvariantError):
        load_configuration(json.dumps(doc))


def test_parse_errors():
    with pytest.raises(ParseError):
        load_configuration("{nope")
    with pytest.raises(ParseError):
        load_configuration('{"kind":"circle"}')
    with pytest.raises(ParseError):
        load_configuration('{"kind":"line"}')


def test_round_trip_exact():
    cfg = LineConfig((Fraction(1, 3), Fraction(29, 10), Fraction(7)))
    again = load_configuration(dump_configuration(cfg))
    assert again == cfg
    tree = star([Fraction(1, 7), 2, 3], source=2)
    again = load_configuration(dump_configuration(tree))
    assert again == tree
    assert isinstance(again, WeightedTree)


def test_validate_tree_for_distributed():
    path_ok = WeightedTree(("a", "b", "c"), (("a", "b", Fraction(1)), ("b", "c", Fraction(1))), {1: "a", 2: "c"})
    validate_tree_for_distributed(path_ok)
    path_bad = WeightedTree(("a", "b", "c"), (("a", "b", Fraction(1)), ("b", "c", Fraction(1))), {1: "a"})
    with pytest.raises(InvariantError, match="leaves without agents: c"):
        validate_tree_for_distributed(path_bad)
    validate_tree_for_distributed(star([1, 2, 3]))


def test_reflection():
    cfg = line(0, 1, 8)
    assert cfg.reflected().positions == (-8, -1, 0)
    assert cfg.reflected().reflected() == cfg

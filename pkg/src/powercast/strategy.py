"""Timed strategies and their continuous-time verification.

A strategy is a finite list of unit-speed moves, each within one edge (or on
the line's axis).  The simulator reconstructs every agent's piecewise-linear
trajectory, detects all meetings -- crossings, overtaking, co-waiting and node
co-presence all count -- propagates information through them, and accounts for
power as exact path length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .model import EdgeLoc, LineConfig, LineLoc, Location, NodeLoc, WeightedGraph
from .rational import format_scalar, parse_scalar

ZERO = Fraction(0)


class InvalidStrategy(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, agent: int, time: Fraction):
        super().__init__(f"agent {agent} runs out of power at t={format_scalar(time)}")
        self.agent = agent
        self.time = time


@dataclass(frozen=True)
class TimedMove:
    agent: int
    depart: Fraction
    src: Location
    dst: Location


@dataclass(frozen=True)
class Strategy:
    moves: tuple[TimedMove, ...]


@dataclass(frozen=True)
class Meeting:
    time: Fraction
    place: Location
    agents: frozenset[int]


@dataclass
class Trace:
    meetings: list[Meeting]
    power: dict[int, Fraction]
    info: dict[int, frozenset[int]]
    acquired: dict[int, list[tuple[Fraction, frozenset[int]]]]
    agents: tuple[int, ...]
    witness: tuple[int, Fraction, Location] | None = field(default=None)


# --- geometry helpers --------------------------------------------------------

# A trajectory piece: (t0, t1, locus, x0, x1); position is linear in time.
# locus is "line" for line networks or a canonically oriented edge (u, v) with
# u < v; node waits become zero-length pieces on a pseudo locus ("node", u).


def _canon_edge_point(net: WeightedGraph, loc: Location) -> tuple[tuple, Fraction]:
    if isinstance(loc, NodeLoc):
        return ("node", loc.node), ZERO
    if isinstance(loc, EdgeLoc):
        w = net.edge_weight(loc.u, loc.v)
        if not 0 <= loc.offset <= w:
            raise InvalidStrategy(f"offset {format_scalar(loc.offset)} outside edge ({loc.u},{loc.v})")
        if loc.offset == 0:
            return ("node", loc.u), ZERO
        if loc.offset == w:
            return ("node", loc.v), ZERO
        u, v = sorted((loc.u, loc.v))
        off = loc.offset if u == loc.u else w - loc.offset
        return (u, v), off
    raise InvalidStrategy("graph strategies use node/edge locations")


def _move_locus(net: WeightedGraph, src: Location, dst: Location) -> tuple[tuple, Fraction, Fraction]:
    """Canonical edge of a single-edge move plus endpoint offsets on it."""
    ends = []
    for loc in (src, dst):
        if isinstance(loc, EdgeLoc):
            ends.append((sorted((loc.u, loc.v)), loc))
        elif not isinstance(loc, NodeLoc):
            raise InvalidStrategy("graph strategies use node/edge locations")
        else:
            ends.append((None, loc))
    edges = [tuple(e) for e, _ in ends if e is not None]
    if edges:
        if len(edges) == 2 and edges[0] != edges[1]:
            raise InvalidStrategy("move endpoints lie on different edges")
        u, v = edges[0]
    else:  # node-to-node move: must be an existing edge
        u, v = sorted((src.node, dst.node))  # type: ignore[union-attr]
    try:
        w = net.edge_weight(u, v)
    except KeyError as exc:
        raise InvalidStrategy(str(exc)) from exc
    offs = []
    for _, loc in ends:
        if isinstance(loc, NodeLoc):
            if loc.node == u:
                offs.append(ZERO)
            elif loc.node == v:
                offs.append(w)
            else:
                raise InvalidStrategy(f"node {loc.node} not an endpoint of edge ({u},{v})")
        else:
            if not 0 <= loc.offset <= w:
                raise InvalidStrategy(f"offset outside edge ({u},{v})")
            offs.append(loc.offset if sorted((loc.u, loc.v))[0] == loc.u else w - loc.offset)
    return (u, v), offs[0], offs[1]


def _initial_positions(net: WeightedGraph | LineConfig) -> dict[int, Location]:
    if isinstance(net, LineConfig):
        return {i: LineLoc(net.pos(i)) for i in range(1, net.n + 1)}
    return {aid: NodeLoc(node) for aid, node in net.agents.items()}


def _pieces_for_agent(
    net: WeightedGraph | LineConfig,
    start: Location,
    moves: list[TimedMove],
    horizon: Fraction,
) -> tuple[list, Fraction]:
    """Trajectory pieces plus total path length; validates contiguity/timing."""
    pieces = []
    cur = start
    t = ZERO
    used = ZERO
    line = isinstance(net, LineConfig)
    for mv in moves:
        if mv.depart < t:
            raise InvalidStrategy(f"agent {mv.agent}: overlapping moves at t={format_scalar(mv.depart)}")
        if mv.src != cur:
            raise InvalidStrategy(f"agent {mv.agent}: move does not start where the previous ended")
        if line:
            if not isinstance(mv.src, LineLoc) or not isinstance(mv.dst, LineLoc):
                raise InvalidStrategy("line strategies use coordinate locations")
            locus, x0, x1 = "line", mv.src.x, mv.dst.x
        else:
            locus, x0, x1 = _move_locus(net, mv.src, mv.dst)
        if mv.depart > t:
            _append_wait(pieces, net, cur, t, mv.depart)
        length = abs(x1 - x0)
        pieces.append((mv.depart, mv.depart + length, locus, x0, x1))
        used += length
        t = mv.depart + length
        cur = mv.dst
    if horizon > t or not moves:
        _append_wait(pieces, net, cur, t, max(horizon, t))
    return pieces, used


def _append_wait(pieces: list, net, loc: Location, t0: Fraction, t1: Fraction) -> None:
    if isinstance(loc, LineLoc):
        pieces.append((t0, t1, "line", loc.x, loc.x))
    elif isinstance(loc, NodeLoc):
        pieces.append((t0, t1, ("node", loc.node), ZERO, ZERO))
    else:
        locus, off = _canon_edge_point(net, loc)
        pieces.append((t0, t1, locus, off, off))


def simulate(
    net: WeightedGraph | LineConfig, strategy: Strategy, budget: Fraction | None = None
) -> Trace:
    """Run a strategy, detect every meeting, and account power exactly.

    Raises BudgetExceeded at the first instant an agent's path length passes
    the budget; meetings are instantaneous full information exchanges.
    """
    start = _initial_positions(net)
    agents = tuple(sorted(start))
    per_agent: dict[int, list[TimedMove]] = {a: [] for a in agents}
    for mv in strategy.moves:
        if mv.agent not in per_agent:
            raise InvalidStrategy(f"unknown agent {mv.agent}")
        per_agent[mv.agent].append(mv)
    for a in agents:
        per_agent[a].sort(key=lambda m: m.depart)

    horizon = ZERO
    lengths: dict[int, Fraction] = {}
    for a in agents:
        t = ZERO
        for mv in per_agent[a]:
            if isinstance(net, LineConfig):
                step = abs(mv.dst.x - mv.src.x)  # type: ignore[union-attr]
            else:
                _, x0, x1 = _move_locus(net, mv.src, mv.dst)
                step = abs(x1 - x0)
            t = max(t, mv.depart) + step
        horizon = max(horizon, t)

    pieces: dict[int, list] = {}
    first_violation: tuple[Fraction, int] | None = None
    for a in agents:
        pieces[a], lengths[a] = _pieces_for_agent(net, start[a], per_agent[a], horizon)
        if budget is not None and lengths[a] > budget:
            t_cross = _budget_cross_time(per_agent[a], net, budget)
            if first_violation is None or t_cross < first_violation[0]:
                first_violation = (t_cross, a)
    if first_violation is not None:
        raise BudgetExceeded(first_violation[1], first_violation[0])

    raw = _collect_meetings(net, agents, pieces)
    return _propagate(net, agents, raw, lengths, start)


def _budget_cross_time(moves: list[TimedMove], net, budget: Fraction) -> Fraction:
    used = ZERO
    for mv in moves:
        if isinstance(mv.src, LineLoc):
            step = abs(mv.dst.x - mv.src.x)  # type: ignore[union-attr]
        else:
            _, x0, x1 = _move_locus(net, mv.src, mv.dst)
            step = abs(x1 - x0)
        if used + step > budget:
            return mv.depart + (budget - used)
        used += step
    raise AssertionError("budget crossing requested without overuse")


def _collect_meetings(net, agents, pieces) -> dict[tuple[Fraction, tuple], set[int]]:
    """All co-location instants, grouped by (time, place key)."""
    found: dict[tuple[Fraction, tuple], set[int]] = {}

    def record(t: Fraction, key: tuple, a: int, b: int):
        found.setdefault((t, key), set()).update((a, b))

    for ia, a in enumerate(agents):
        for b in agents[ia + 1 :]:
            for pa in pieces[a]:
                for pb in pieces[b]:
                    _meet_pieces(net, a, b, pa, pb, record)
    return found


def _piece_place_key(net, locus, x: Fraction) -> tuple:
    if locus == "line":
        return (0, x)
    if locus[0] == "node":
        return (1, locus[1])
    u, v = locus
    w = net.edge_weight(u, v)
    if x == 0:
        return (1, u)
    if x == w:
        return (1, v)
    return (2, u, v, x)


def _meet_pieces(net, a, b, pa, pb, record) -> None:
    ta0, ta1, la, xa0, xa1 = pa
    tb0, tb1, lb, xb0, xb1 = pb
    t0 = max(ta0, tb0)
    t1 = min(ta1, tb1)
    if t0 > t1:
        return
    same = la == lb
    node_pairs = []
    if not same:
        # an edge endpoint coincides with a node wait, or two edges share a node
        na = _piece_nodes(net, pa)
        nb = _piece_nodes(net, pb)
        for t_a, node_a in na:
            for t_b, node_b in nb:
                if node_a == node_b:
                    lo = max(t_a[0], t_b[0])
                    hi = min(t_a[1], t_b[1])
                    if lo <= hi:
                        node_pairs.append((lo, node_a))
        for t, node in node_pairs:
            record(t, (1, node), a, b)
        return
    # same locus: positions are linear, meet where they coincide
    fa0 = _pos_at(pa, t0)
    fb0 = _pos_at(pb, t0)
    fa1 = _pos_at(pa, t1)
    fb1 = _pos_at(pb, t1)
    d0 = fa0 - fb0
    d1 = fa1 - fb1
    if d0 == 0:
        record(t0, _piece_place_key(net, la, fa0), a, b)
        return
    if d1 == 0:
        record(t1, _piece_place_key(net, la, fa1), a, b)
        return
    if (d0 < 0) != (d1 < 0):
        t_star = t0 + (t1 - t0) * d0 / (d0 - d1)
        x_star = _pos_at(pa, t_star)
        record(t_star, _piece_place_key(net, la, x_star), a, b)


def _pos_at(piece, t: Fraction) -> Fraction:
    t0, t1, _, x0, x1 = piece
    if t1 == t0:
        return x0
    return x0 + (x1 - x0) * (t - t0) / (t1 - t0)


def _piece_nodes(net, piece) -> list[tuple[tuple[Fraction, Fraction], str]]:
    """Node presence windows of a piece: ((t_from, t_to), node)."""
    t0, t1, locus, x0, x1 = piece
    if locus == "line":
        return []
    if locus[0] == "node":
        return [((t0, t1), locus[1])]
    u, v = locus
    w = net.edge_weight(u, v)
    out = []
    for node, target in ((u, ZERO), (v, w)):
        if x0 == x1:
            if x0 == target:
                out.append(((t0, t1), node))
        elif min(x0, x1) <= target <= max(x0, x1):
            if t1 == t0:
                out.append(((t0, t0), node))
            else:
                t = t0 + (t1 - t0) * (target - x0) / (x1 - x0)
                out.append(((t, t), node))
    return out


def _place_from_key(net, key) -> Location:
    if key[0] == 0:
        return LineLoc(key[1])
    if key[0] == 1:
        return NodeLoc(key[1])
    return EdgeLoc(key[1], key[2], key[3])


def _propagate(net, agents, raw, lengths, start) -> Trace:
    info = {a: frozenset([a]) for a in agents}
    acquired = {a: [(ZERO, frozenset([a]))] for a in agents}
    meetings: list[Meeting] = []
    full = frozenset(agents)
    witness: tuple[int, Fraction, Location] | None = None
    if len(agents) == 1:
        witness = (agents[0], ZERO, start[agents[0]])

    events = sorted(raw.items(), key=lambda kv: (kv[0][0], kv[0][1]))
    i = 0
    while i < len(events):
        t = events[i][0][0]
        group = []
        while i < len(events) and events[i][0][0] == t:
            group.append(events[i])
            i += 1
        # same-timestamp events: union per place, iterate to fixpoint so that
        # zero-duration relay chains propagate
        changed = True
        while changed:
            changed = False
            for (tt, key), members in group:
                union = frozenset().union(*(info[m] for m in members))
                for m in members:
                    if info[m] != union:
                        info[m] = union
                        acquired[m].append((t, union))
                        changed = True
        for (tt, key), members in group:
            place = _place_from_key(net, key)
            meetings.append(Meeting(t, place, frozenset(members)))
            if witness is None:
                for m in sorted(members):
                    if info[m] == full:
                        witness = (m, t, place)
                        break
    return Trace(meetings, dict(lengths), info, acquired, agents, witness)


def verify_convergecast(trace: Trace) -> tuple[int, Fraction, Location] | None:
    """Earliest (agent, time, place) with full information, or None."""
    return trace.witness


def verify_broadcast(trace: Trace, source: int) -> frozenset[int]:
    """Agents that never learn the source's information (empty set = ok)."""
    return frozenset(a for a in trace.agents if source not in trace.info[a])


def max_power_used(trace: Trace) -> tuple[Fraction, list[Fraction]]:
    per = [trace.power[a] for a in trace.agents]
    return (max(per) if per else ZERO, per)


# --- JSON wire format --------------------------------------------------------


def location_to_dict(loc: Location) -> dict:
    if isinstance(loc, LineLoc):
        return {"x": format_scalar(loc.x)}
    if isinstance(loc, NodeLoc):
        return {"node": loc.node}
    return {"edge": [loc.u, loc.v], "offset": format_scalar(loc.offset)}


def location_from_dict(doc: dict) -> Location:
    if "x" in doc:
        return LineLoc(parse_scalar(doc["x"]))
    if "node" in doc:
        return NodeLoc(str(doc["node"]))
    if "edge" in doc:
        u, v = doc["edge"]
        return EdgeLoc(str(u), str(v), parse_scalar(doc["offset"]))
    raise InvalidStrategy(f"unknown location {doc!r}")


def strategy_to_dict(s: Strategy) -> dict:
    return {
        "moves": [
            {
                "agent": mv.agent,
                "depart": format_scalar(mv.depart),
                "from": location_to_dict(mv.src),
                "to": location_to_dict(mv.dst),
            }
            for mv in s.moves
        ]
    }


def strategy_from_dict(doc: dict) -> Strategy:
    try:
        moves = tuple(
            TimedMove(
                int(m["agent"]),
                parse_scalar(m["depart"]),
                location_from_dict(m["from"]),
                location_from_dict(m["to"]),
            )
            for m in doc["moves"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStrategy(f"malformed strategy document: {exc}") from exc
    return Strategy(moves)


def load_strategy(text: str) -> Strategy:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidStrategy(f"invalid JSON: {exc}") from exc
    return strategy_from_dict(doc)


def dump_strategy(s: Strategy) -> str:
    return json.dumps(strategy_to_dict(s))

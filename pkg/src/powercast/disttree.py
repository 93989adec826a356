"""Distributed gathering and broadcast on trees with agents at every leaf.

Agents are anonymous, know nothing of the tree, and see only local port
numbers.  Every leaf agent walks to its neighbour; at a node an agent waits
until at most one incident port has not delivered an agent, then the present
agent that has used the least power continues through the unused port until it
meets somebody or reaches the next node.  A meeting inside an edge, or a node
whose ports have all delivered, ends the protocol with the meeting group
holding everything.  Broadcast replays every path backwards, activating the
agents it passes.

Event times are exact rationals; identical trees with identical port
numberings produce identical event logs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .model import WeightedTree, validate_tree_for_distributed
from .rational import format_scalar

ZERO = Fraction(0)

# A point is ("node", u) or ("edge", u, v, offset-from-u) with u < v.
Point = tuple
Weights = dict[frozenset, Fraction]


def _canon_point(u: str, v: str, off: Fraction, w: Fraction) -> Point:
    if off == 0:
        return ("node", u)
    if off == w:
        return ("node", v)
    if u < v:
        return ("edge", u, v, off)
    return ("edge", v, u, w - off)


@dataclass
class _Agent:
    ident: int
    start: str
    info: frozenset[int]
    mode: str = "moving"  # moving | waiting | stopped | stranded
    used: Fraction = ZERO
    node: str | None = None  # current node when not inside an edge
    point: Point | None = None  # resting point once stopped
    last_port: int | None = None
    arrived: Fraction = ZERO
    # while moving:
    frm: str | None = None
    to: str | None = None
    depart: Fraction = ZERO
    used_at_depart: Fraction = ZERO
    path: list[tuple[Fraction, Point]] = field(default_factory=list)


@dataclass
class DistOutcome:
    achieved: bool
    power: dict[int, Fraction]
    completion: Fraction | None
    events: list[dict]
    info: dict[int, frozenset[int]]
    group: tuple[int, ...] = ()
    meeting_point: Point | None = None


def port_map(tree: WeightedTree, seed: int | None = None) -> dict[str, list[str]]:
    """Neighbour order per node; port p of u leads to ports[u][p-1].

    The default order sorts neighbours by id; a seed shuffles each node's
    order reproducibly (tie-breaks may change, the power guarantee may not).
    """
    ports = {u: sorted(v for v, _ in nbrs) for u, nbrs in tree.adjacency().items()}
    if seed is not None:
        for u in ports:
            random.Random(f"{seed}:{u}").shuffle(ports[u])
    return ports


def _point_doc(pt: Point) -> dict:
    if pt[0] == "node":
        return {"node": pt[1]}
    return {"edge": [pt[1], pt[2]], "offset": format_scalar(pt[3])}


class _TreeRun:
    def __init__(self, tree: WeightedTree, budget: Fraction, ports: dict[str, list[str]]):
        validate_tree_for_distributed(tree)
        self.tree = tree
        self.budget = budget
        self.ports = ports
        self.weights: Weights = {frozenset((u, v)): w for u, v, w in tree.edges}
        self.agents = {
            aid: _Agent(aid, node, frozenset([aid])) for aid, node in tree.agents.items()
        }
        self.port_used: dict[str, set[int]] = {u: set() for u in tree.nodes}
        # occupancy indices so candidate events cost O(edge occupants)
        self.on_edge: dict[frozenset, set[int]] = {}
        self.at_node: dict[str, set[int]] = {u: set() for u in tree.nodes}
        self.cand: dict[int, Fraction] = {}
        self.dirty: set[frozenset] = set()
        self.events: list[dict] = []
        self.achieved = False
        self.completion: Fraction | None = None
        self.group: tuple[int, ...] = ()
        self.meeting_point: Point | None = None

    def weight(self, u: str, v: str) -> Fraction:
        return self.weights[frozenset((u, v))]

    def log(self, time: Fraction, kind: str, **data) -> None:
        entry = {"time": format_scalar(time), "kind": kind}
        entry.update(data)
        self.events.append(entry)

    def _check_success(self, members: list[_Agent], t: Fraction, where: Point) -> None:
        if self.achieved or not members:
            return
        union = frozenset().union(*(a.info for a in members))
        if union == frozenset(self.agents):
            self.achieved = True
            self.completion = t
            self.group = tuple(sorted(a.ident for a in members))
            self.meeting_point = where
            self.log(t, "gathered", agents=list(self.group), at=_point_doc(where))

    def _union_at_node(self, node: str, t: Fraction) -> None:
        members = [self.agents[aid] for aid in sorted(self.at_node[node])]
        if len(members) < 2:
            return
        union = frozenset().union(*(a.info for a in members))
        if any(a.info != union for a in members):
            for a in members:
                a.info = union
            self.log(t, "meet", agents=sorted(a.ident for a in members), at=_point_doc(("node", node)))
        self._check_success(members, t, ("node", node))

    def _launch(self, a: _Agent, frm: str, to: str, t: Fraction) -> None:
        a.mode = "moving"
        a.frm, a.to = frm, to
        a.depart, a.used_at_depart = t, a.used
        a.node = None
        key = frozenset((frm, to))
        self.on_edge.setdefault(key, set()).add(a.ident)
        self.dirty.add(key)

    def run(self) -> None:
        for aid in sorted(self.agents):
            a = self.agents[aid]
            nbr = self.ports[a.start][0]  # leaves have exactly one neighbour
            a.path.append((ZERO, ("node", a.start)))
            self._launch(a, a.start, nbr, ZERO)
            self.log(ZERO, "depart", agent=a.ident, frm=a.start, to=nbr)
        while True:
            for key in self.dirty:
                for aid in self.on_edge.get(key, ()):
                    a = self.agents[aid]
                    if a.mode == "moving":
                        self.cand[aid] = self._candidate(a)
            self.dirty.clear()
            if not self.cand:
                break
            self._step(min(self.cand.values()))

    def _candidate(self, a: _Agent) -> Fraction:
        """Next event time for a mover against the current edge occupancy."""
        w = self.weight(a.frm, a.to)
        best = a.depart + w  # arrival at the far node
        remaining = self.budget - a.used_at_depart
        if remaining < w:
            best = min(best, a.depart + remaining)  # power runs out inside the edge
        key = frozenset((a.frm, a.to))
        for bid in self.on_edge.get(key, ()):
            if bid == a.ident:
                continue
            b = self.agents[bid]
            if b.mode == "moving":
                if b.frm == a.to:  # head-on
                    t = (a.depart + b.depart + w) / 2
                    if t >= max(a.depart, b.depart):
                        best = min(best, t)
            else:
                off = b.point[3] if b.point[1] == a.frm else w - b.point[3]
                if off > 0:
                    best = min(best, a.depart + off)
        return best

    def _step(self, t: Fraction) -> None:
        arrivals: list[_Agent] = []
        stops: list[tuple[_Agent, Point]] = []
        for aid in sorted(self.cand):
            if self.cand[aid] != t:
                continue
            a = self.agents[aid]
            w = self.weight(a.frm, a.to)
            offset = t - a.depart
            if offset == w:
                arrivals.append(a)
            else:
                stops.append((a, _canon_point(a.frm, a.to, offset, w)))
        # register all simultaneous arrivals before any node is evaluated
        touched: set[str] = set()
        for a in arrivals:
            del self.cand[a.ident]
            self.on_edge[frozenset((a.frm, a.to))].discard(a.ident)
            self.dirty.add(frozenset((a.frm, a.to)))
            a.used = a.used_at_depart + self.weight(a.frm, a.to)
            a.node = a.to
            a.last_port = self.ports[a.to].index(a.frm) + 1
            a.arrived = t
            a.mode = "waiting"
            a.frm = a.to = None
            a.path.append((t, ("node", a.node)))
            self.port_used[a.node].add(a.last_port)
            self.at_node[a.node].add(a.ident)
            touched.add(a.node)
            self.log(t, "arrive", agent=a.ident, node=a.node, port=a.last_port)
        by_point: dict[Point, list[_Agent]] = {}
        for a, pt in stops:
            del self.cand[a.ident]
            a.used = a.used_at_depart + (t - a.depart)
            if pt[0] == "node":  # power ran out exactly at a node
                self.dirty.add(frozenset((a.frm, a.to)))
                self.on_edge[frozenset((a.frm, a.to))].discard(a.ident)
                a.mode = "stranded"
                a.node = pt[1]
                a.point = pt
                a.frm = a.to = None
                a.path.append((t, pt))
                self.at_node[pt[1]].add(a.ident)
                touched.add(pt[1])
                self.log(t, "strand", agents=[a.ident], at=_point_doc(pt))
                continue
            by_point.setdefault(pt, []).append(a)
        for pt, group in sorted(by_point.items()):
            edge_key = frozenset((pt[1], pt[2]))
            self.dirty.add(edge_key)
            resting = [
                self.agents[bid]
                for bid in sorted(self.on_edge.get(edge_key, ()))
                if self.agents[bid].mode in ("stopped", "stranded")
                and self.agents[bid].point == pt
            ]
            met = len(group) > 1 or bool(resting)
            for a in group:
                a.mode = "stopped" if met else "stranded"
                a.point = pt
                a.frm = a.to = None
                a.path.append((t, pt))
            members = group + resting
            union = frozenset().union(*(b.info for b in members))
            for b in members:
                b.info = union
            self.log(
                t,
                "meet" if met else "strand",
                agents=sorted(b.ident for b in members),
                at=_point_doc(pt),
            )
            if met:
                self._check_success(members, t, pt)
        for node in sorted(touched):
            self._union_at_node(node, t)
        for node in sorted(touched):
            self._evaluate_node(node, t)

    def _evaluate_node(self, node: str, t: Fraction) -> None:
        present = [self.agents[aid] for aid in sorted(self.at_node[node])]
        waiting = [a for a in present if a.mode == "waiting"]
        if not waiting:
            return
        unused = [p for p in range(1, len(self.ports[node]) + 1) if p not in self.port_used[node]]
        if len(unused) > 1:
            return
        if not unused:
            for a in waiting:
                a.mode = "stopped"
                a.point = ("node", node)
            self.log(t, "saturate", node=node, agents=sorted(a.ident for a in present))
            self._check_success(present, t, ("node", node))
            return

        def rank(a: _Agent):
            return (a.used, a.last_port if a.last_port is not None else 0, a.arrived)

        chosen = min(present, key=rank)
        for a in waiting:
            if a is chosen:
                continue
            a.mode = "stopped"
            a.point = ("node", node)
            self.log(t, "halt", agent=a.ident, node=node)
        if chosen.mode != "waiting":
            return  # an already-stopped agent holds the minimum: nobody moves
        port = unused[0]
        nbr = self.ports[node][port - 1]
        self.at_node[node].discard(chosen.ident)
        self._launch(chosen, node, nbr, t)
        self.log(t, "dispatch", agent=chosen.ident, frm=node, to=nbr, port=port)


def run_unknown_tree(
    tree: WeightedTree, budget: Fraction, port_seed: int | None = None
) -> DistOutcome:
    """Execute the distributed gathering protocol until no agent can act."""
    validate_tree_for_distributed(tree)
    if len(tree.agents) == 1:
        aid = next(iter(tree.agents))
        return DistOutcome(
            True, {aid: ZERO}, ZERO, [], {aid: frozenset([aid])}, (aid,),
            ("node", tree.agents[aid]),
        )
    run = _TreeRun(tree, budget, port_map(tree, port_seed))
    run.run()
    return DistOutcome(
        run.achieved,
        {a.ident: a.used for a in run.agents.values()},
        run.completion,
        run.events,
        {a.ident: a.info for a in run.agents.values()},
        run.group,
        run.meeting_point,
    )


# --- distributed broadcast (gather + retrace) ---------------------------------


def _edge_offset(pt: Point, u: str, v: str, weights: Weights) -> Fraction | None:
    """Offset of a point from u along edge (u, v), if the point lies on it."""
    if pt[0] == "node":
        if pt[1] == u:
            return ZERO
        if pt[1] == v:
            return weights[frozenset((u, v))]
        return None
    if (pt[1], pt[2]) == (u, v):
        return pt[3]
    if (pt[1], pt[2]) == (v, u):
        return weights[frozenset((u, v))] - pt[3]
    return None


def _gap(p: Point, q: Point, weights: Weights) -> Fraction:
    """Distance between consecutive path breakpoints (they share an edge)."""
    if p == q:
        return ZERO
    if p[0] == "node" and q[0] == "node":
        return weights[frozenset((p[1], q[1]))]
    e = p if p[0] == "edge" else q
    a = _edge_offset(p, e[1], e[2], weights)
    b = _edge_offset(q, e[1], e[2], weights)
    return abs(a - b)


def _reverse_track(
    a: _Agent, t0: Fraction, remaining: Fraction, weights: Weights
) -> list[tuple[Fraction, Point]]:
    """Timed breakpoints of the agent's backtracked path, cut at its budget."""
    pts = [pt for _, pt in a.path]
    pts.reverse()
    track = [(t0, pts[0])]
    t = t0
    for p, q in zip(pts, pts[1:]):
        d = _gap(p, q, weights)
        if d == 0:
            continue
        if t + d - t0 <= remaining:
            t += d
            track.append((t, q))
            continue
        cut = remaining - (t - t0)
        if cut > 0:
            e_nodes = (p[1], q[1]) if p[0] == "node" and q[0] == "node" else None
            if e_nodes is None:
                e = p if p[0] == "edge" else q
                u, v = e[1], e[2]
            else:
                u, v = e_nodes
            oa = _edge_offset(p, u, v, weights)
            ob = _edge_offset(q, u, v, weights)
            off = oa + (cut if ob > oa else -cut)
            track.append((t + cut, _canon_point(u, v, off, weights[frozenset((u, v))])))
        break
    return track


def _track_hits(
    track: list[tuple[Fraction, Point]], spot: Point, weights: Weights
) -> Fraction | None:
    """Earliest time the track passes the (static) spot, if it does."""
    for (t0, p), (t1, q) in zip(track, track[1:]):
        if p == spot:
            return t0
        if q == spot:
            return t1
        if spot[0] == "edge":
            u, v = spot[1], spot[2]
            oa = _edge_offset(p, u, v, weights)
            ob = _edge_offset(q, u, v, weights)
            if oa is None or ob is None or oa == ob:
                continue
            if min(oa, ob) <= spot[3] <= max(oa, ob):
                return t0 + (t1 - t0) * abs(spot[3] - oa) / abs(ob - oa)
    if track and track[0][1] == spot:
        return track[0][0]
    return None


def _final_point(a: _Agent) -> Point:
    if a.point is not None:
        return a.point
    return ("node", a.node)


def run_distributed_broadcast(
    tree: WeightedTree, source: int, budget: Fraction, port_seed: int | None = None
) -> DistOutcome:
    """Gather, then let the informed group retrace and activate everyone.

    Agents holding the total information walk their gathering paths backwards
    to their leaves; every agent they pass becomes informed and does the same.
    Per-agent power is at most twice the gathering cost.
    """
    if source not in tree.agents:
        raise ValueError(f"unknown source agent {source}")
    run = _TreeRun(tree, budget, port_map(tree, port_seed))
    run.run()
    agents = run.agents
    weights = run.weights
    events = list(run.events)
    if not run.achieved:
        return DistOutcome(
            False,
            {a.ident: a.used for a in agents.values()},
            None,
            events,
            {a.ident: a.info for a in agents.values()},
        )
    full = frozenset(agents)
    tracks: dict[int, list[tuple[Fraction, Point]]] = {}
    activated: dict[int, Fraction] = {}
    t0 = run.completion
    for aid in run.group:
        a = agents[aid]
        tracks[aid] = _reverse_track(a, t0, budget - a.used, weights)
        activated[aid] = t0
        a.info = full
    pending = {aid for aid in agents if aid not in tracks}
    while pending:
        best = None
        for aid in sorted(pending):
            spot = _final_point(agents[aid])
            for src_id, track in tracks.items():
                t_hit = _track_hits(track, spot, weights)
                if t_hit is not None and (best is None or (t_hit, aid) < best[:2]):
                    best = (t_hit, aid, src_id)
        if best is None:
            break  # someone is out of reach (insufficient budget)
        t_hit, aid, src_id = best
        a = agents[aid]
        a.info = full
        activated[aid] = t_hit
        tracks[aid] = _reverse_track(a, t_hit, budget - a.used, weights)
        pending.discard(aid)
        events.append(
            {
                "time": format_scalar(t_hit),
                "kind": "activate",
                "agent": aid,
                "by": src_id,
                "at": _point_doc(_final_point(a)),
            }
        )
    power: dict[int, Fraction] = {}
    completion = t0
    for aid, a in agents.items():
        extra = ZERO
        if aid in tracks:
            track = tracks[aid]
            extra = track[-1][0] - track[0][0]
            completion = max(completion, track[-1][0])
        power[aid] = a.used + extra
    achieved = not pending
    info = {aid: agents[aid].info for aid in agents}
    return DistOutcome(achieved, power, completion if achieved else None, events, info)


def competitive_report(tree: WeightedTree, port_seed: int | None = None) -> dict:
    """Run gathering at the separation budget and report the competitive margin."""
    from .graphs import separation

    d = separation(tree)
    outcome = run_unknown_tree(tree, d, port_seed)
    max_power = max(outcome.power.values()) if outcome.power else ZERO
    return {
        "achieved": outcome.achieved,
        "max_power": max_power,
        "separation": d,
        "ratio_vs_lower_bound": max_power / (d / 2) if d else ZERO,
    }

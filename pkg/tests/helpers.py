"""Shared test fixtures: instance builders and independent reference oracles."""

from __future__ import annotations

import random
from fractions import Fraction

from powercast.convergecast import decide_convergecast, reach_list_lr
from powercast.disttree import port_map
from powercast.model import LineConfig, WeightedTree

F = Fraction


def line(*xs) -> LineConfig:
    return LineConfig(tuple(F(x) for x in xs))


def star(weights, source=None) -> WeightedTree:
    nodes = ["hub"] + [f"l{i}" for i in range(1, len(weights) + 1)]
    edges = tuple(("hub", f"l{i}", F(w)) for i, w in enumerate(weights, 1))
    agents = {i: f"l{i}" for i in range(1, len(weights) + 1)}
    return WeightedTree(tuple(nodes), edges, agents, source)


def random_rational(rng: random.Random, lo=0, hi=100, den=8) -> Fraction:
    return F(rng.randint(lo * den, hi * den), den)


def bisect_convergecast(c: LineConfig, tol=F(1, 10**12)) -> tuple[Fraction, Fraction]:
    """Bracket the optimal convergecast power using only the decision procedure."""
    hi = c.pos(c.n) - c.pos(1)
    if hi == 0:
        hi = F(1)
    while decide_convergecast(c, hi) is None:
        hi *= 2
    lo = F(0)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if decide_convergecast(c, mid) is None:
            lo = mid
        else:
            hi = mid
    return lo, hi


def threshold_by_bisection(c: LineConfig, p: int, tol=F(1, 10**12)) -> tuple[Fraction, Fraction]:
    """Bracket TH_lr(p) = least power at which reach_lr(p-1) passes Pos[p]."""

    def reaches(power: Fraction) -> bool:
        val = reach_list_lr(c, power)[p - 2]
        return val is not None and val >= c.pos(p)

    hi = F(1)
    while not reaches(hi):
        hi *= 2
    lo = F(0)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if reaches(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi


def info_closure_brute(agents, meetings):
    """Reference information propagation: transitive closure over the meeting
    graph restricted to meetings at times <= t, recomputed from scratch."""
    info = {a: {a} for a in agents}
    ordered = sorted(meetings, key=lambda m: m.time)
    i = 0
    while i < len(ordered):
        t = ordered[i].time
        batch = []
        while i < len(ordered) and ordered[i].time == t:
            batch.append(ordered[i])
            i += 1
        changed = True
        while changed:
            changed = False
            for m in batch:
                union = set()
                for a in m.agents:
                    union |= info[a]
                for a in m.agents:
                    if info[a] != union:
                        info[a] = set(union)
                        changed = True
    return {a: frozenset(s) for a, s in info.items()}


def discretized_unknown_tree(tree: WeightedTree, budget: Fraction, dt: float = 2**-8):
    """Small-step re-implementation of the distributed gathering protocol.

    Positions advance by dt per tick and meetings fire when occupants of an
    edge come within a step of each other, so powers are only accurate to a
    few dt; used to cross-check the exact event-driven engine on small trees.
    """
    ports = port_map(tree)
    weights = {frozenset((u, v)): float(w) for u, v, w in tree.edges}
    budget_f = float(budget)
    agents = {}
    for aid, leaf in tree.agents.items():
        agents[aid] = {
            "pos": ("edge", leaf, ports[leaf][0], 0.0),
            "used": 0.0,
            "mode": "moving",
            "last_port": None,
            "arrived": 0.0,
            "info": {aid},
        }
    port_used = {u: set() for u in tree.nodes}
    t = 0.0
    horizon = 4 * sum(weights.values()) + 1.0
    achieved = False
    while t < horizon:
        t += dt
        # advance movers
        for a in agents.values():
            if a["mode"] != "moving":
                continue
            _, u, v, off = a["pos"]
            w = weights[frozenset((u, v))]
            step = min(dt, w - off, budget_f - a["used"])
            if step <= 1e-15:
                a["mode"] = "stranded"
                continue
            off += step
            a["used"] += step
            a["pos"] = ("edge", u, v, off)
            if off >= w - 1e-12:
                a["pos"] = ("node", v)
                a["mode"] = "waiting"
                a["last_port"] = ports[v].index(u) + 1
                a["arrived"] = t
                port_used[v].add(a["last_port"])
        # meetings inside edges
        ids = sorted(agents)
        for i, x in enumerate(ids):
            for y in ids[i + 1 :]:
                a, b = agents[x], agents[y]
                if a["pos"][0] != "edge" or b["pos"][0] != "edge":
                    continue
                ea = frozenset(a["pos"][1:3])
                eb = frozenset(b["pos"][1:3])
                if ea != eb:
                    continue
                w = weights[ea]
                oa = a["pos"][3] if a["pos"][1] == min(ea) else w - a["pos"][3]
                ob = b["pos"][3] if b["pos"][1] == min(ea) else w - b["pos"][3]
                opposite = a["pos"][1] != b["pos"][1] or a["mode"] != "moving" or b["mode"] != "moving"
                if abs(oa - ob) <= 1.5 * dt and opposite and (a["mode"] == "moving" or b["mode"] == "moving"):
                    union = a["info"] | b["info"]
                    a["info"] = set(union)
                    b["info"] = set(union)
                    for z in (a, b):
                        if z["mode"] == "moving":
                            z["mode"] = "stopped"
                    if union == set(agents):
                        achieved = True
        # node unions and evaluation
        for node in tree.nodes:
            here = [a for a in agents.values() if a["pos"] == ("node", node) and a["mode"] != "moving"]
            if len(here) >= 2:
                union = set()
                for a in here:
                    union |= a["info"]
                for a in here:
                    a["info"] = set(union)
                if union == set(agents):
                    achieved = True
            waiting = [a for a in here if a["mode"] == "waiting"]
            if not waiting:
                continue
            unused = [p for p in range(1, len(ports[node]) + 1) if p not in port_used[node]]
            if len(unused) > 1:
                continue
            if not unused:
                for a in waiting:
                    a["mode"] = "stopped"
                continue
            chosen = min(here, key=lambda a: (a["used"], a["last_port"] or 0, a["arrived"]))
            for a in waiting:
                if a is not chosen:
                    a["mode"] = "stopped"
            if chosen["mode"] != "waiting":
                continue
            nbr = ports[node][unused[0] - 1]
            chosen["mode"] = "moving"
            chosen["pos"] = ("edge", node, nbr, 0.0)
        if achieved or all(a["mode"] in ("stopped", "stranded", "waiting") for a in agents.values()):
            if achieved or not any(a["mode"] == "moving" for a in agents.values()):
                break
    return achieved, {aid: a["used"] for aid, a in agents.items()}

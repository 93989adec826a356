"""Shortest paths, agent separation, and the graph approximation strategies.

The separation D of an agent set is the largest over bipartitions of the
minimum cross distance; it equals the bottleneck edge of a minimum spanning
tree over the agents' metric closure.  Gathering agents greedily along that
structure costs each agent at most D, which is within a factor 2 of optimal;
replaying the gather in reverse broadcasts within 2D.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import LineConfig, NodeLoc, WeightedGraph
from .strategy import Strategy, TimedMove

ZERO = Fraction(0)


@dataclass(frozen=True)
class DistanceMatrix:
    dist: dict[str, dict[str, Fraction]]
    parent: dict[str, dict[str, str | None]]

    def distance(self, u: str, v: str) -> Fraction:
        return self.dist[u][v]

    def path(self, u: str, v: str) -> list[str]:
        """Node sequence of a shortest u-v path."""
        out = [v]
        cur = v
        while cur != u:
            cur = self.parent[u][cur]
            if cur is None:
                raise KeyError(f"{v} unreachable from {u}")
            out.append(cur)
        out.reverse()
        return out


def _sssp(adj, src: str) -> tuple[dict[str, Fraction], dict[str, str | None]]:
    """Dijkstra with deterministic tie-breaking on (distance, predecessor id)."""
    import heapq

    d: dict[str, Fraction] = {src: ZERO}
    par: dict[str, str | None] = {src: None}
    done: set[str] = set()
    heap: list[tuple[Fraction, str]] = [(ZERO, src)]
    while heap:
        du, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, w in sorted(adj[u]):
            nd = du + w
            if v not in d or nd < d[v] or (nd == d[v] and v not in done and u < par[v]):
                d[v] = nd
                par[v] = u
                heapq.heappush(heap, (nd, v))
    return d, par


def _tree_sssp(adj, src: str) -> tuple[dict[str, Fraction], dict[str, str | None]]:
    """Single traversal; paths in a tree are unique, so no relaxation is needed."""
    d: dict[str, Fraction] = {src: ZERO}
    par: dict[str, str | None] = {src: None}
    stack = [src]
    while stack:
        u = stack.pop()
        for v, w in adj[u]:
            if v not in d:
                d[v] = d[u] + w
                par[v] = u
                stack.append(v)
    return d, par


def apsp(g: WeightedGraph) -> DistanceMatrix:
    """Exact all-pairs shortest paths (Dijkstra per node, deterministic ties)."""
    return sources_matrix(g, g.nodes)


def sources_matrix(g: WeightedGraph, sources) -> DistanceMatrix:
    """Shortest paths out of the given sources only."""
    adj = g.adjacency()
    solve = _tree_sssp if len(g.edges) == len(g.nodes) - 1 else _sssp
    dist: dict[str, dict[str, Fraction]] = {}
    parent: dict[str, dict[str, str | None]] = {}
    for src in sources:
        d, par = solve(adj, src)
        if len(d) != len(g.nodes):
            raise ValueError("graph is not connected")
        dist[src] = d
        parent[src] = par
    return DistanceMatrix(dist, parent)


def brute_force_separation(g: WeightedGraph, dm: DistanceMatrix | None = None) -> Fraction:
    """Direct max-min over all bipartitions of the agent set; |A| <= 20."""
    nodes = g.agent_nodes()
    if len(nodes) < 2:
        raise ValueError("separation needs at least two agents")
    if len(nodes) > 20:
        raise ValueError("brute force limited to 20 agents")
    dm = dm or sources_matrix(g, nodes)
    rest = nodes[1:]
    best = ZERO
    for mask in range(2 ** len(rest) - 1):
        side = {nodes[0]} | {rest[i] for i in range(len(rest)) if mask >> i & 1}
        other = [u for u in nodes if u not in side]
        cross = min(dm.distance(u, v) for u in side for v in other)
        best = max(best, cross)
    return best


def separation(g: WeightedGraph, dm: DistanceMatrix | None = None) -> Fraction:
    """D(g, agents): bottleneck edge weight of an MST over the agent metric closure."""
    nodes = g.agent_nodes()
    if len(nodes) < 2:
        raise ValueError("separation needs at least two agents")
    dm = dm or sources_matrix(g, nodes)
    in_tree = {nodes[0]}
    best_edge: dict[str, Fraction] = {v: dm.distance(nodes[0], v) for v in nodes[1:]}
    bottleneck = ZERO
    while best_edge:
        v = min(best_edge, key=lambda u: (best_edge[u], u))
        bottleneck = max(bottleneck, best_edge[v])
        in_tree.add(v)
        del best_edge[v]
        for u in best_edge:
            d = dm.distance(v, u)
            if d < best_edge[u]:
                best_edge[u] = d
    return bottleneck


def _walk_moves(g: WeightedGraph, agent: int, nodes: list[str], depart: Fraction) -> list[TimedMove]:
    moves = []
    t = depart
    for u, v in zip(nodes, nodes[1:]):
        moves.append(TimedMove(agent, t, NodeLoc(u), NodeLoc(v)))
        t += g.edge_weight(u, v)
    return moves


@dataclass(frozen=True)
class GatherResult:
    strategy: Strategy
    collector: int
    max_power: Fraction
    legs: tuple[tuple[str, str], ...]  # (mover start node, destination) in replay order


def known_graph_convergecast(g: WeightedGraph, dm: DistanceMatrix | None = None) -> GatherResult:
    """Greedy accretion gather: every agent moves at most once, within D(g, A).

    Nodes join the collected set nearest-first; the recorded legs replay in
    reverse so each mover departs only after everything behind it arrived.
    """
    nodes = g.agent_nodes()
    if not nodes:
        raise ValueError("no agents")
    agent_at = {node: aid for aid, node in g.agents.items()}
    dm = dm or sources_matrix(g, nodes)
    collected = [nodes[0]]
    stack: list[tuple[str, str]] = []
    remaining = set(nodes[1:])
    max_power = ZERO
    while remaining:
        pick = min(
            ((dm.distance(u, v), u, v) for u in collected for v in remaining),
            key=lambda t: t,
        )
        d, u, v = pick
        stack.append((v, u))
        collected.append(v)
        remaining.remove(v)
        max_power = max(max_power, d)
    moves: list[TimedMove] = []
    t = ZERO
    legs = []
    for v, u in reversed(stack):
        moves.extend(_walk_moves(g, agent_at[v], dm.path(v, u), t))
        t += dm.distance(v, u)
        legs.append((v, u))
    return GatherResult(Strategy(tuple(moves)), agent_at[nodes[0]], max_power, tuple(legs))


def graph_broadcast_4approx(
    g: WeightedGraph, source: int, dm: DistanceMatrix | None = None
) -> tuple[Strategy, Fraction]:
    """Gather then replay in reverse; per-agent power is at most 2 D(g, A)."""
    if source not in g.agents:
        raise ValueError(f"unknown source agent {source}")
    dm = dm or sources_matrix(g, g.agent_nodes())
    gather = known_graph_convergecast(g, dm)
    agent_at = {node: aid for aid, node in g.agents.items()}
    moves = list(gather.strategy.moves)
    t = sum((dm.distance(v, u) for v, u in gather.legs), ZERO)
    for v, u in reversed(gather.legs):
        moves.extend(_walk_moves(g, agent_at[v], dm.path(u, v), t))
        t += dm.distance(u, v)
    return Strategy(tuple(moves)), 2 * gather.max_power


def line_as_path_graph(c: LineConfig) -> WeightedGraph:
    """Path-graph embedding of a line configuration, for cross-checks."""
    names = [f"p{i}" for i in range(1, c.n + 1)]
    edges = tuple(
        (names[i], names[i + 1], c.positions[i + 1] - c.positions[i]) for i in range(c.n - 1)
    )
    agents = {i + 1: names[i] for i in range(c.n)}
    return WeightedGraph(tuple(names), edges, agents)

"""Instance generators: hard star families, witness strategies, the
distributed lower-bound line family, and seeded random instances."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .model import EdgeLoc, LineConfig, NodeLoc, WeightedTree
from .strategy import Strategy, TimedMove

ZERO = Fraction(0)
HUB = "hub"


@dataclass(frozen=True)
class ThreePartitionInstance:
    """Multiset of 3m positive integers, each strictly between R/4 and R/2."""

    m: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m < 1 or len(self.values) != 3 * self.m:
            raise ValueError("need exactly 3m values")
        if any(v <= 0 for v in self.values):
            raise ValueError("values must be positive")
        r = self.target
        for v in self.values:
            if not (r / 4 < v < r / 2):
                raise ValueError(f"value {v} outside (R/4, R/2) for R={r}")

    @property
    def target(self) -> Fraction:
        return Fraction(sum(self.values), self.m)


@dataclass(frozen=True)
class StarInstance:
    tree: WeightedTree
    power: Fraction
    b_agents: tuple[int, ...]  # agents on the value-encoding edges, in value order
    a_agents: tuple[int, ...]
    c_agents: tuple[int, ...]


def _build_star(leaf_weights: list[Fraction], source: int | None = None) -> WeightedTree:
    names = [f"l{i}" for i in range(1, len(leaf_weights) + 1)]
    nodes = (HUB, *names)
    edges = tuple((HUB, name, w) for name, w in zip(names, leaf_weights))
    agents = {i + 1: names[i] for i in range(len(names))}
    return WeightedTree(nodes, edges, agents, source)


def gen_3p_convergecast_star(inst: ThreePartitionInstance) -> StarInstance:
    """Star whose gathering at budget 2R+1 succeeds iff the multiset 3-partitions.

    m+1 unit edges (ferries), 3m edges of weight 2R+1+x (value encoders), one
    edge of weight 4R+1 (the far witness).
    """
    r = inst.target
    m = inst.m
    weights = [Fraction(1)] * (m + 1)
    weights += [2 * r + 1 + x for x in inst.values]
    weights += [4 * r + 1]
    tree = _build_star(weights)
    a = tuple(range(1, m + 2))
    b = tuple(range(m + 2, m + 2 + 3 * m))
    c = (4 * m + 2,)
    return StarInstance(tree, 2 * r + 1, b, a, c)


def gen_3p_broadcast_star(inst: ThreePartitionInstance) -> StarInstance:
    """Broadcast twin: m unit edges, 3m of weight 4R+1+x, m of weight 6R+1; source
    is the first unit-edge agent and the budget is 4R+1."""
    r = inst.target
    m = inst.m
    weights = [Fraction(1)] * m
    weights += [4 * r + 1 + x for x in inst.values]
    weights += [6 * r + 1] * m
    tree = _build_star(weights, source=1)
    a = tuple(range(1, m + 1))
    b = tuple(range(m + 1, m + 1 + 3 * m))
    c = tuple(range(4 * m + 1, 5 * m + 1))
    return StarInstance(tree, 4 * r + 1, b, a, c)


def _validate_partition(inst: ThreePartitionInstance, parts: list[list[int]]) -> None:
    if len(parts) != inst.m or any(len(p) != 3 for p in parts):
        raise ValueError("partition must consist of m triples")
    if sorted(x for p in parts for x in p) != sorted(inst.values):
        raise ValueError("partition does not cover the multiset")
    r = inst.target
    for p in parts:
        if sum(p) != r:
            raise ValueError(f"triple {p} sums to {sum(p)} != {r}")


def partition_strategy(
    inst: ThreePartitionInstance,
    star: StarInstance,
    parts: list[list[int]],
    mode: str,
) -> Strategy:
    """Witness strategy for a valid partition; spends exactly the star's budget.

    Value agents and far agents walk inwards until empty; ferry agents meet the
    hub, shuttle out to their triple's resting agents, and finally walk out to
    a far agent.
    """
    _validate_partition(inst, parts)
    if mode not in ("convergecast", "broadcast"):
        raise ValueError("mode must be convergecast or broadcast")
    tree = star.tree
    power = star.power
    rest = {}  # agent id -> resting offset from hub
    moves: list[TimedMove] = []

    def leaf(agent: int) -> str:
        return tree.agents[agent]

    def wt(agent: int) -> Fraction:
        return tree.edge_weight(HUB, leaf(agent))

    for agent in star.b_agents + star.c_agents:
        offset = wt(agent) - power
        rest[agent] = offset
        moves.append(TimedMove(agent, ZERO, NodeLoc(leaf(agent)), EdgeLoc(HUB, leaf(agent), offset)))

    # value agents come to rest exactly when their battery dies
    rest_time = power

    # map each value x to a distinct value-agent (value order is preserved)
    pool: dict[int, list[int]] = {}
    for agent, x in zip(star.b_agents, inst.values):
        pool.setdefault(x, []).append(agent)

    far = list(star.c_agents)
    for i, triple in enumerate(parts):
        ferry = star.a_agents[i]
        t = wt(ferry)  # ferries reach the hub at t = 1
        moves.append(TimedMove(ferry, ZERO, NodeLoc(leaf(ferry)), NodeLoc(HUB)))
        for x in triple:
            target = pool[x].pop(0)
            out = EdgeLoc(HUB, leaf(target), rest[target])
            moves.append(TimedMove(ferry, t, NodeLoc(HUB), out))
            t += rest[target]
            back = max(t, rest_time)
            moves.append(TimedMove(ferry, back, out, NodeLoc(HUB)))
            t = back + rest[target]
        if mode == "broadcast":
            target = far[i]
            moves.append(TimedMove(ferry, t, NodeLoc(HUB), EdgeLoc(HUB, leaf(target), rest[target])))
    if mode == "convergecast":
        ferry = star.a_agents[-1]
        moves.append(TimedMove(ferry, ZERO, NodeLoc(leaf(ferry)), NodeLoc(HUB)))
        # departs only after every shuttle is back with its triple's information
        t_go = max(
            (mv.depart + abs_edge_len(tree, mv) for mv in moves if mv.agent in star.a_agents[:-1]),
            default=wt(ferry),
        )
        t_go = max(t_go, wt(ferry))
        target = far[0]
        moves.append(
            TimedMove(ferry, t_go, NodeLoc(HUB), EdgeLoc(HUB, leaf(target), rest[target]))
        )
    moves.sort(key=lambda m: (m.agent, m.depart))
    return Strategy(tuple(moves))


def abs_edge_len(tree: WeightedTree, mv: TimedMove) -> Fraction:
    a = ZERO if isinstance(mv.src, NodeLoc) else mv.src.offset
    b = ZERO if isinstance(mv.dst, NodeLoc) else mv.dst.offset
    if isinstance(mv.src, NodeLoc) and isinstance(mv.dst, NodeLoc):
        return tree.edge_weight(mv.src.node, mv.dst.node)
    if isinstance(mv.src, NodeLoc):
        return mv.dst.offset if mv.src.node == mv.dst.u else tree.edge_weight(mv.dst.u, mv.dst.v) - mv.dst.offset
    if isinstance(mv.dst, NodeLoc):
        return mv.src.offset if mv.dst.node == mv.src.u else tree.edge_weight(mv.src.u, mv.src.v) - mv.src.offset
    return abs(a - b)


def simple_star_convergecast_check(star: StarInstance, power: Fraction) -> bool:
    """Feasibility of the restricted two-phase shape on an m=1 star.

    Gathering phase first (everyone walks inward until empty or at the hub),
    then one ferry collects the three resting value agents while the other
    walks out to the far agent.  This mirrors the structure forced on any
    successful strategy for these stars; it is not a general tree solver.
    """
    if star.a_agents != (1, 2) or len(star.b_agents) != 3 or len(star.c_agents) != 1:
        raise ValueError("checker is restricted to m=1 convergecast stars")
    tree = star.tree

    def wt(agent: int) -> Fraction:
        return tree.edge_weight(HUB, tree.agents[agent])

    ferry_budget = power - 1  # both unit edges must be walked to the hub
    if ferry_budget < 0:
        return False
    rest_b = [max(ZERO, wt(b) - power) for b in star.b_agents]
    rest_c = max(ZERO, wt(star.c_agents[0]) - power)
    collect = 2 * sum(rest_b, ZERO)
    return collect <= ferry_budget and rest_c <= ferry_budget


@dataclass(frozen=True)
class LowerBoundFamily:
    """Line family on which no distributed strategy can stay below twice optimal."""

    delta: Fraction
    power: Fraction
    epsilon: Fraction
    sigma: Fraction
    levels: int  # l: number of agent groups per side
    group_size: int  # k agents per group
    n: int
    config: LineConfig


def gen_lower_bound_line(delta: Fraction, power: Fraction) -> LowerBoundFamily:
    """Two lonely end agents separated by 2l tight clusters of k agents each.

    The segment endpoints follow s_i = (2P - 3*sigma)*i - sigma and
    s'_i = (2P - 3*sigma)*i; cluster agents sit strictly inside [s_i, s'_i],
    uniformly spaced.
    """
    delta = Fraction(delta)
    power = Fraction(power)
    if not 0 < delta < 2:
        raise ValueError("delta must be in (0, 2)")
    if power <= 0:
        raise ValueError("power must be positive")
    eps = delta * power / 4
    sigma = eps / 2
    levels = 0
    while 2 ** (levels + 1) <= 8 / delta:  # floor(log2(8/delta))
        levels += 1
    k = levels + 2
    n = 2 * levels * k + 2
    step = 2 * power - 3 * sigma
    positions = [ZERO]
    for i in range(1, 2 * levels + 1):
        s_i = step * i - sigma
        for j in range(1, k + 1):
            positions.append(s_i + sigma * j / (k + 1))
    positions.append(step * (2 * levels + 1) - sigma)
    cfg = LineConfig(tuple(positions), source=1)
    assert cfg.n == n
    return LowerBoundFamily(delta, power, eps, sigma, levels, k, n, cfg)


def gen_random_line(n: int, seed: int, span: int = 1000) -> LineConfig:
    """Strictly increasing random rational positions, reproducible from the seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(f"line:{n}:{seed}")
    x = Fraction(rng.randint(0, 8), rng.randint(1, 8))
    positions = [x]
    for _ in range(n - 1):
        x += Fraction(rng.randint(1, span), rng.randint(1, 8))
        positions.append(x)
    return LineConfig(tuple(positions))


def gen_random_tree(n: int, seed: int) -> WeightedTree:
    """Random tree on n nodes with rational weights in (0, 100), agents at all leaves."""
    if n < 2:
        raise ValueError("a tree instance needs at least 2 nodes")
    rng = random.Random(f"tree:{n}:{seed}")
    names = [f"v{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        parent = rng.randrange(i)
        w = Fraction(rng.randint(1, 799), 8)
        edges.append((names[parent], names[i], w))
    degree = {u: 0 for u in names}
    for u, v, _ in edges:
        degree[u] += 1
        degree[v] += 1
    leaves = [u for u in names if degree[u] == 1]
    agents = {i + 1: leaf for i, leaf in enumerate(leaves)}
    return WeightedTree(tuple(names), tuple(edges), agents)

"""Optimal-power broadcast from a source agent on a line.

Agents left of the source k form a relay chain handing the information down to
agent 1, the right side mirrors it.  ``pickup_lr(i, P)`` (the chain frontier)
is the rightmost point from which agents 1..i can pick the information up and
still ferry it all the way back to agent 1.  Above its activation budget every
frontier moves with slope exactly 1 in P, so each side is summarised by two
numbers: the activation budget and the frontier anchored there.

The source must visit a point at or left of the left frontier and a point at
or right of the right frontier; visits on the source's own side of a frontier
cost nothing because the chain may equally pick up anywhere short of its
frontier.  The optimum solves required_travel(P) = P exactly on the at most
three linear pieces of that travel function and is cross-checked against
rational bisection over the O(1) decision procedure.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .model import LineConfig

ZERO = Fraction(0)


@dataclass(frozen=True)
class ActivationProfile:
    """Per-index activation budget and the frontier anchored at it.

    ``lr[i]`` describes agents 1..i as the left chain, ``rl[i]`` agents i..n
    as the right chain (1-based indices; entries outside the side are None).
    """

    lr: tuple[tuple[Fraction, Fraction] | None, ...]
    rl: tuple[tuple[Fraction, Fraction] | None, ...]


@lru_cache(maxsize=128)
def _sweep_lr(c: LineConfig) -> tuple[tuple[Fraction, Fraction], ...]:
    """(activation, frontier-at-activation) for prefixes 1..n."""
    out = []
    act, frontier = ZERO, c.pos(1)
    out.append((act, frontier))
    for i in range(2, c.n + 1):
        pos = c.pos(i)
        if pos - act <= frontier:
            frontier = (pos + act + frontier) / 2
        else:
            act += (pos - act - frontier) / 2
            frontier = pos
        out.append((act, frontier))
    return tuple(out)


@lru_cache(maxsize=128)
def _sweep_rl(c: LineConfig) -> tuple[tuple[Fraction, Fraction], ...]:
    out: list[tuple[Fraction, Fraction]] = [None] * c.n  # type: ignore[list-item]
    act, frontier = ZERO, c.pos(c.n)
    out[c.n - 1] = (act, frontier)
    for i in range(c.n - 1, 0, -1):
        pos = c.pos(i)
        if pos + act >= frontier:
            frontier = (pos - act + frontier) / 2
        else:
            act += (frontier - act - pos) / 2
            frontier = pos
        out[i - 1] = (act, frontier)
    return tuple(out)


def activation_profiles(c: LineConfig, k: int) -> ActivationProfile:
    """Chain profiles for source k: left side 1..k-1, right side k+1..n."""
    if not 1 <= k <= c.n:
        raise ValueError(f"source {k} out of range")
    lr = _sweep_lr(c)
    rl = _sweep_rl(c)
    return ActivationProfile(
        tuple(lr[i] if i < k - 1 else None for i in range(c.n)),
        tuple(rl[i] if i > k - 1 else None for i in range(c.n)),
    )


def pickup_lr(c: LineConfig, i: int, power: Fraction) -> Fraction | None:
    """Left-chain frontier at the given budget; None below activation."""
    act, frontier = _sweep_lr(c)[i - 1]
    return None if power < act else frontier + (power - act)


def pickup_rl(c: LineConfig, i: int, power: Fraction) -> Fraction | None:
    act, frontier = _sweep_rl(c)[i - 1]
    return None if power < act else frontier - (power - act)


@dataclass(frozen=True)
class _SideSummary:
    """Slope-1 frontier data needed by the decision and the optimiser."""

    left: tuple[Fraction, Fraction] | None  # (activation, frontier anchor) of 1..k-1
    right: tuple[Fraction, Fraction] | None  # of k+1..n


def _sides(c: LineConfig, k: int) -> _SideSummary:
    if not 1 <= k <= c.n:
        raise ValueError(f"source {k} out of range")
    left = _sweep_lr(c)[k - 2] if k > 1 else None
    right = _sweep_rl(c)[k] if k < c.n else None
    return _SideSummary(left, right)


def _required_travel(c: LineConfig, k: int, sides: _SideSummary, power: Fraction) -> Fraction | None:
    """Least distance the source must walk at this budget; None if a chain is dead."""
    pos = c.pos(k)
    lo = pos
    hi = pos
    if sides.left is not None:
        act, anchor = sides.left
        if power < act:
            return None
        lo = min(anchor + (power - act), pos)
    if sides.right is not None:
        act, anchor = sides.right
        if power < act:
            return None
        hi = max(anchor - (power - act), pos)
    return (hi - lo) + min(pos - lo, hi - pos)


def decide_broadcast(c: LineConfig, k: int, power: Fraction) -> bool:
    """Can the source's information reach everyone with per-agent budget ``power``?"""
    if power < 0:
        return False
    need = _required_travel(c, k, _sides(c, k), power)
    return need is not None and need <= power


@dataclass(frozen=True)
class BroadcastPlan:
    """Wait/carry points of an executable broadcast strategy.

    pickups[i] is where agent i waits for the information, handoffs[i] where
    it carries it to (equal when the agent only receives).  For the source,
    pickups[k] and handoffs[k] are its first and second visit targets.
    """

    power: Fraction
    source: int
    first_left: bool
    pickups: tuple[Fraction, ...]
    handoffs: tuple[Fraction, ...]


@dataclass(frozen=True)
class BroadcastResult:
    power: Fraction
    plan: BroadcastPlan


def compute_optimal_broadcast(c: LineConfig, k: int) -> BroadcastResult:
    """Exact optimal budget for source k, solved on the travel function's pieces."""
    sides = _sides(c, k)
    if sides.left is None and sides.right is None:
        return BroadcastResult(ZERO, broadcast_plan(c, k, ZERO))
    base = ZERO
    if sides.left is not None:
        base = max(base, sides.left[0])
    if sides.right is not None:
        base = max(base, sides.right[0])
    pos = c.pos(k)
    cuts = {base}
    if sides.left is not None:
        act, anchor = sides.left
        hit = act + (pos - anchor)  # budget at which the left frontier reaches the source
        if hit > base:
            cuts.add(hit)
    if sides.right is not None:
        act, anchor = sides.right
        hit = act + (anchor - pos)
        if hit > base:
            cuts.add(hit)
    best: Fraction | None = None
    ordered = sorted(cuts)
    for j, p0 in enumerate(ordered):
        p1 = ordered[j + 1] if j + 1 < len(ordered) else None
        g0 = _required_travel(c, k, sides, p0) - p0
        if g0 <= 0:
            best = p0
            break
        if p1 is not None:
            g1 = _required_travel(c, k, sides, p1) - p1
            if g1 > 0:
                continue
            probe = (p0 + p1) / 2
        else:
            probe = p0 + 1
        gp = _required_travel(c, k, sides, probe) - probe
        slope = (gp - g0) / (probe - p0)
        root = p0 - g0 / slope
        if p1 is None or root <= p1:
            best = root
            break
    assert best is not None, "required travel decreases strictly, a crossing exists"
    return BroadcastResult(best, broadcast_plan(c, k, best))


def bisection_oracle_broadcast(
    c: LineConfig, k: int, tol: Fraction
) -> tuple[Fraction, Fraction]:
    """Bracket the optimal budget to width <= tol using only decide_broadcast."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if decide_broadcast(c, k, ZERO):
        return (ZERO, ZERO)
    sides = _sides(c, k)  # reused across probes; decide itself is O(n)
    hi = Fraction(1)
    span = c.pos(c.n) - c.pos(1)
    if span > 0:
        hi = span
    while True:
        need = _required_travel(c, k, sides, hi)
        if need is not None and need <= hi:
            break
        hi *= 2
    lo = ZERO
    while hi - lo > tol:
        mid = (lo + hi) / 2
        need = _required_travel(c, k, sides, mid)
        if need is not None and need <= mid:
            hi = mid
        else:
            lo = mid
    return (lo, hi)


def broadcast_plan(c: LineConfig, k: int, power: Fraction) -> BroadcastPlan:
    """Executable plan at a feasible budget (pickups clamped to the source side)."""
    if not decide_broadcast(c, k, power):
        raise ValueError("broadcast infeasible at this budget")
    n = c.n
    pos = c.pos(k)
    sides = _sides(c, k)
    pickups = [ZERO] * (n + 1)
    handoffs = [ZERO] * (n + 1)
    pickups[k] = handoffs[k] = pos
    lo = pos
    hi = pos
    if sides.left is not None:
        act, anchor = sides.left
        lo = min(anchor + (power - act), pos)
        w = lo
        for i in range(k - 1, 0, -1):
            pickups[i] = w
            if i > 1:
                handoffs[i] = w - (power - abs(c.pos(i) - w))
                w = max(handoffs[i], c.pos(i - 1) - power)
            else:
                handoffs[i] = w
    if sides.right is not None:
        act, anchor = sides.right
        hi = max(anchor - (power - act), pos)
        w = hi
        for i in range(k + 1, n + 1):
            pickups[i] = w
            if i < n:
                handoffs[i] = w + (power - abs(c.pos(i) - w))
                w = min(handoffs[i], c.pos(i + 1) + power)
            else:
                handoffs[i] = w
    if sides.right is None:
        first_left = True
    elif sides.left is None:
        first_left = False
    else:
        first_left = pos - lo <= hi - pos
    if first_left:
        pickups[k] = lo
        handoffs[k] = hi if sides.right is not None else lo
    else:
        pickups[k] = hi
        handoffs[k] = lo if sides.left is not None else hi
    return BroadcastPlan(power, k, first_left, tuple(pickups[1:]), tuple(handoffs[1:]))


def emit_broadcast_strategy(c: LineConfig, plan: BroadcastPlan) -> "Strategy":
    """Timed moves realising a plan.

    Every agent walks to its pickup point at t=0 and waits.  The source visits
    its first target, waits there for that side's pickup agent, then walks to
    the second; each chain agent departs the instant the information sweeps
    past its pickup point.
    """
    from .model import LineLoc
    from .strategy import Strategy, TimedMove

    k = plan.source
    n = c.n
    pos = c.pos(k)
    moves: list[TimedMove] = []

    def walk(agent: int, depart: Fraction, a: Fraction, b: Fraction) -> Fraction:
        if a != b:
            moves.append(TimedMove(agent, depart, LineLoc(a), LineLoc(b)))
        return depart + abs(b - a)

    first, second = plan.pickups[k - 1], plan.handoffs[k - 1]

    def pickup_arrival(idx: int) -> Fraction:
        return abs(c.pos(idx) - plan.pickups[idx - 1])

    order = ["left", "right"] if plan.first_left else ["right", "left"]
    s1 = walk(k, ZERO, pos, first)
    wait1 = s1
    if order[0] == "left" and k > 1:
        wait1 = max(s1, pickup_arrival(k - 1))
    elif order[0] == "right" and k < n:
        wait1 = max(s1, pickup_arrival(k + 1))
    s2 = walk(k, wait1, first, second)
    wait2 = s2
    if order[1] == "left" and k > 1:
        wait2 = max(s2, pickup_arrival(k - 1))
    elif order[1] == "right" and k < n:
        wait2 = max(s2, pickup_arrival(k + 1))

    left_informed = wait1 if plan.first_left else wait2
    right_informed = wait2 if plan.first_left else wait1

    if k > 1:
        t = left_informed
        for i in range(k - 1, 0, -1):
            walk(i, ZERO, c.pos(i), plan.pickups[i - 1])
            if plan.handoffs[i - 1] != plan.pickups[i - 1]:
                walk(i, t, plan.pickups[i - 1], plan.handoffs[i - 1])
            if i > 1:
                t = t + (plan.pickups[i - 1] - plan.pickups[i - 2])
    if k < n:
        t = right_informed
        for i in range(k + 1, n + 1):
            walk(i, ZERO, c.pos(i), plan.pickups[i - 1])
            if plan.handoffs[i - 1] != plan.pickups[i - 1]:
                walk(i, t, plan.pickups[i - 1], plan.handoffs[i - 1])
            if i < n:
                t = t + (plan.pickups[i] - plan.pickups[i - 1])
    moves.sort(key=lambda m: (m.agent, m.depart))
    return Strategy(tuple(moves))

"""Relay ("carry") strategies moving information between two points of a line.

A carry plan assigns every agent a back point b_i and a forward point f_i with
the full budget spent: |Pos[i]-b_i| + (f_i-b_i) = P.  The pull plan anchors at
the target and is computed from the last agent backwards; the push plan
anchors at the start and runs forwards.  Reverse-direction queries are served
by reflecting the line.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

from .model import LineConfig
from .rational import format_scalar

Direction = Literal["forward", "reverse"]


@dataclass(frozen=True)
class CarryPlan:
    direction: Direction
    power: Fraction
    back: tuple[Fraction, ...]
    forward: tuple[Fraction, ...]


@dataclass(frozen=True)
class Infeasible:
    """Carry impossible at this budget; ``reason`` names the failed constraint."""

    reason: str

    def __bool__(self) -> bool:
        return False


def _check_span(c: LineConfig, s: Fraction | None, t: Fraction | None, power: Fraction) -> None:
    # Boundary |s - Pos[1]| = P is admitted: the plan degenerates but stays valid.
    if s is not None and abs(s - c.pos(1)) > power:
        raise ValueError("require |s - Pos[1]| <= P")
    if t is not None and abs(t - c.pos(c.n)) > power:
        raise ValueError("require |t - Pos[n]| <= P")


def _reflect_args(c: LineConfig, s: Fraction, t: Fraction) -> tuple[LineConfig, Fraction, Fraction]:
    return c.reflected(), -s, -t


def _reflect_plan(plan: CarryPlan) -> CarryPlan:
    return CarryPlan(
        "reverse",
        plan.power,
        tuple(-b for b in reversed(plan.back)),
        tuple(-f for f in reversed(plan.forward)),
    )


def pull_carry(
    c: LineConfig, s: Fraction, t: Fraction, power: Fraction, direction: Direction = "forward"
) -> CarryPlan | Infeasible:
    """Target-anchored plan: f_n = t, b_i = f_{i-1}, f_i = P + 2 b_i - Pos[i]."""
    if direction == "reverse":
        rc, rs, rt = _reflect_args(c, s, t)
        out = pull_carry(rc, rs, rt, power)
        return out if isinstance(out, Infeasible) else _reflect_plan(out)
    if s == t:
        return _degenerate_point_plan(c, s, power)
    if s > t:
        raise ValueError("forward carry needs s < t (use direction='reverse')")
    _check_span(c, s, t, power)
    n = c.n
    back = [Fraction(0)] * n
    fwd = [Fraction(0)] * n
    f = t
    for i in range(n, 0, -1):
        fwd[i - 1] = f
        b = (f + c.pos(i) - power) / 2  # inverts f = P + 2b - Pos[i]
        back[i - 1] = b
        if f < b:
            return Infeasible(f"agent {i}: forward point {format_scalar(f)} < back point")
        if b > c.pos(i):
            return Infeasible(f"agent {i}: back point beyond start position")
        f = b
    if back[0] > s:
        return Infeasible(f"agent 1: back point {format_scalar(back[0])} > s")
    return CarryPlan("forward", power, tuple(back), tuple(fwd))


def push_carry(
    c: LineConfig, s: Fraction, t: Fraction, power: Fraction, direction: Direction = "forward"
) -> CarryPlan | Infeasible:
    """Start-anchored plan: b_1 = min(Pos[1], s), b_i = min(f_{i-1}, Pos[i])."""
    if direction == "reverse":
        rc, rs, rt = _reflect_args(c, s, t)
        out = push_carry(rc, rs, rt, power)
        return out if isinstance(out, Infeasible) else _reflect_plan(out)
    if s == t:
        return _degenerate_point_plan(c, s, power)
    if s > t:
        raise ValueError("forward carry needs s < t (use direction='reverse')")
    _check_span(c, s, t, power)
    plan = _push_plan(c, s, power)
    if isinstance(plan, Infeasible):
        return plan
    if plan.forward[-1] < t:
        return Infeasible(
            f"last agent reaches {format_scalar(plan.forward[-1])} < t = {format_scalar(t)}"
        )
    return plan


def _push_plan(c: LineConfig, s: Fraction, power: Fraction) -> CarryPlan | Infeasible:
    back: list[Fraction] = []
    fwd: list[Fraction] = []
    prev_f: Fraction | None = None
    for i in range(1, c.n + 1):
        b = min(c.pos(i), s) if prev_f is None else min(prev_f, c.pos(i))
        f = power + 2 * b - c.pos(i)
        if f < b:
            return Infeasible(f"agent {i}: cannot reach the relay point at this budget")
        back.append(b)
        fwd.append(f)
        prev_f = f
    return CarryPlan("forward", power, tuple(back), tuple(fwd))


def _degenerate_point_plan(c: LineConfig, s: Fraction, power: Fraction) -> CarryPlan | Infeasible:
    # s = t: no transport needed, some agent must just reach the point.
    if min(abs(c.pos(i) - s) for i in range(1, c.n + 1)) <= power:
        pts = tuple(c.positions)
        return CarryPlan("forward", power, pts, pts)
    return Infeasible("no agent can reach the point")


def min_feasible_source(
    c: LineConfig, t: Fraction, power: Fraction, direction: Direction = "forward"
) -> Fraction | Infeasible:
    """Extremal s admitting a carry to t: the pull plan's b_1.

    Forward direction gives the smallest s; reverse (leftward transport) the
    largest.
    """
    if direction == "reverse":
        out = min_feasible_source(c.reflected(), -t, power)
        return out if isinstance(out, Infeasible) else -out
    _check_span(c, None, t, power)
    n = c.n
    f = t
    b = t
    for i in range(n, 0, -1):
        b = (f + c.pos(i) - power) / 2
        if f < b:
            return Infeasible(f"agent {i}: forward point < back point")
        if b > c.pos(i):
            return Infeasible(f"agent {i}: back point beyond start position")
        f = b
    return b


def max_feasible_target(
    c: LineConfig, s: Fraction, power: Fraction, direction: Direction = "forward"
) -> Fraction | Infeasible:
    """Extremal t admitting a carry from s: the push plan's f_n.

    Forward direction gives the largest t; reverse the smallest.
    """
    if direction == "reverse":
        out = max_feasible_target(c.reflected(), -s, power)
        return out if isinstance(out, Infeasible) else -out
    _check_span(c, s, None, power)
    plan = _push_plan(c, s, power)
    return plan if isinstance(plan, Infeasible) else plan.forward[-1]

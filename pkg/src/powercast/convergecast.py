"""Optimal-power convergecast on a line.

Information has to flow from both ends towards a meeting point: agents 1..p
relay the left end's information rightwards (the LR chain), agents p+1..n
relay the right end's leftwards (RL).  ``reach_lr(i, P)`` is the furthest
point the first i agents can push their combined information to with per-agent
budget P; feasibility at P means reach_lr(j, P) >= reach_rl(j+1, P) for some
split j.

The optimum is computed three independent ways: a linear-time stack sweep
(``compute_optimal_convergecast``), a quadratic construction of the full
piecewise-linear reach functions (``quadratic_oracle_convergecast``), and the
O(n) decision procedure combined with rational bisection (tests only).  All
arithmetic is exact; the reach coefficients 2^(q-p+1)-1 grow too fast for
floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .model import LineConfig

ZERO = Fraction(0)


class UnreachableError(ValueError):
    """Information of the end agent cannot reach agent ``index`` at this budget."""

    def __init__(self, index: int):
        super().__init__(f"agent {index} cannot be reached at this budget")
        self.index = index


class PrefixSums:
    """Doubling prefix sums and a power-of-two table, 1-based.

    slr[q] = sum_{i=2..q} 2^(q-i) Pos[i]   (weighted from the left end)
    srl[q] = sum_{i=q..n-1} 2^(i-q) Pos[i] (weighted from the right end)
    so that the partial sums factor as slr[q] - 2^(q-p) slr[p].
    """

    def __init__(self, c: LineConfig):
        n = c.n
        self.pow2 = [1] * (n + 1)
        for i in range(1, n + 1):
            self.pow2[i] = self.pow2[i - 1] * 2
        self.slr = [ZERO] * (n + 1)
        for i in range(2, n + 1):
            self.slr[i] = 2 * self.slr[i - 1] + c.pos(i)
        self.srl = [ZERO] * (n + 2)
        for i in range(n - 1, 0, -1):
            self.srl[i] = 2 * self.srl[i + 1] + c.pos(i)

    def sum_lr(self, p: int, q: int) -> Fraction:
        return self.slr[q] - self.pow2[q - p] * self.slr[p]

    def sum_rl(self, p: int, q: int) -> Fraction:
        return self.srl[q] - self.pow2[p - q] * self.srl[p]


def _reach_lr_piece(c: LineConfig, ps: PrefixSums, p: int, q: int, power: Fraction) -> Fraction:
    """reach_lr(q, power) when p is the last agent that need not move back."""
    c2 = ps.pow2[q - p]
    return c2 * c.pos(p) + (2 * c2 - 1) * power - ps.sum_lr(p, q)


def _reach_rl_piece(c: LineConfig, ps: PrefixSums, p: int, q: int, power: Fraction) -> Fraction:
    c2 = ps.pow2[p - q]
    return c2 * c.pos(p) - (2 * c2 - 1) * power - ps.sum_rl(p, q)


def reach_list_lr(c: LineConfig, power: Fraction) -> list[Fraction | None]:
    """f_i of the LR chain for i = 1..n; None once the relay breaks."""
    vals: list[Fraction | None] = []
    f: Fraction | None = None
    for i in range(1, c.n + 1):
        if i == 1:
            f = c.pos(1) + power
        elif f is not None:
            b = min(f, c.pos(i))
            nf = 2 * b + power - c.pos(i)
            f = nf if nf >= b else None
        vals.append(f)
    return vals


def reach_list_rl(c: LineConfig, power: Fraction) -> list[Fraction | None]:
    vals: list[Fraction | None] = [None] * c.n
    f: Fraction | None = None
    for i in range(c.n, 0, -1):
        if i == c.n:
            f = c.pos(i) - power
        elif f is not None:
            b = max(f, c.pos(i))
            nf = 2 * b - power - c.pos(i)
            f = nf if nf <= b else None
        vals[i - 1] = f
    return vals


def reach_lr(c: LineConfig, i: int, power: Fraction) -> Fraction:
    if not 1 <= i <= c.n:
        raise ValueError(f"index {i} out of range")
    val = reach_list_lr(c, power)[i - 1]
    if val is None:
        raise UnreachableError(i)
    return val


def reach_rl(c: LineConfig, i: int, power: Fraction) -> Fraction:
    if not 1 <= i <= c.n:
        raise ValueError(f"index {i} out of range")
    val = reach_list_rl(c, power)[i - 1]
    if val is None:
        raise UnreachableError(i)
    return val


def decide_convergecast(c: LineConfig, power: Fraction) -> int | None:
    """Smallest split j with reach_lr(j) >= reach_rl(j+1), or None."""
    lr = reach_list_lr(c, power)
    rl = reach_list_rl(c, power)
    for j in range(1, c.n):
        a, b = lr[j - 1], rl[j]
        if a is not None and b is not None and a >= b:
            return j
    return None


class OpCounter:
    """Counts stack pushes and pops; the sweep must stay linear in n."""

    __slots__ = ("ops",)

    def __init__(self) -> None:
        self.ops = 0


class _Stack:
    def __init__(self, counter: OpCounter | None):
        self.items: list[tuple[int, Fraction]] = []
        self.counter = counter

    def push(self, item: tuple[int, Fraction]) -> None:
        if self.counter is not None:
            self.counter.ops += 1
        self.items.append(item)

    def pop(self) -> tuple[int, Fraction]:
        if self.counter is not None:
            self.counter.ops += 1
        return self.items.pop()


def threshold_stack_lr(
    c: LineConfig, r: int, ps: PrefixSums | None = None, counter: OpCounter | None = None
) -> list[tuple[int, Fraction]]:
    """Breakpoint stack [(p, TH_lr(p))] for reach_lr(r, .), increasing bottom to top.

    TH_lr(p) is the least budget at which agent p need not move back, i.e.
    reach_lr(p-1, P) = Pos[p].  Only the indices that stay dominant up to r
    survive; they are exactly the slope breakpoints of reach_lr(r, .).
    """
    if not 1 <= r <= c.n:
        raise ValueError(f"index {r} out of range")
    ps = ps or PrefixSums(c)
    stack = _Stack(counter)
    stack.push((1, ZERO))
    for q in range(1, r):
        p, power = stack.pop()
        while _reach_lr_piece(c, ps, p, q, power) >= c.pos(q + 1):
            p, power = stack.pop()
        stack.push((p, power))
        c2 = ps.pow2[q - p]
        th = (c.pos(q + 1) + ps.sum_lr(p, q) - c2 * c.pos(p)) / (2 * c2 - 1)
        stack.push((q + 1, th))
    return stack.items


def threshold_stack_rl(
    c: LineConfig, r: int, ps: PrefixSums | None = None, counter: OpCounter | None = None
) -> list[tuple[int, Fraction]]:
    if not 1 <= r <= c.n:
        raise ValueError(f"index {r} out of range")
    ps = ps or PrefixSums(c)
    stack = _Stack(counter)
    stack.push((c.n, ZERO))
    for q in range(c.n, r, -1):
        p, power = stack.pop()
        while _reach_rl_piece(c, ps, p, q, power) <= c.pos(q - 1):
            p, power = stack.pop()
        stack.push((p, power))
        c2 = ps.pow2[p - q]
        th = (c2 * c.pos(p) - ps.sum_rl(p, q) - c.pos(q - 1)) / (2 * c2 - 1)
        stack.push((q - 1, th))
    return stack.items


def _solve_split(c: LineConfig, ps: PrefixSums, p: int, q: int, r: int) -> Fraction:
    """Unique P with reach_lr(r, P) = reach_rl(r+1, P) on pieces p (LR) and q (RL)."""
    c2l = ps.pow2[r - p]
    c2r = ps.pow2[q - r - 1]
    num = c2r * c.pos(q) - ps.sum_rl(q, r + 1) - c2l * c.pos(p) + ps.sum_lr(p, r)
    return num / (2 * c2l + 2 * c2r - 2)


def optimal_at_index(c: LineConfig, r: int, ps: PrefixSums | None = None) -> Fraction:
    """Least budget making split r feasible: reach_lr(r, P) = reach_rl(r+1, P)."""
    if not 1 <= r < c.n:
        raise ValueError(f"split {r} out of range 1..{c.n - 1}")
    ps = ps or PrefixSums(c)
    left = threshold_stack_lr(c, r, ps)
    right = threshold_stack_rl(c, r + 1, ps)
    p, plr = left.pop()
    q, prl = right.pop()
    power = max(plr, prl)
    while _reach_lr_piece(c, ps, p, r, power) >= _reach_rl_piece(c, ps, q, r + 1, power):
        if plr >= prl:
            p, plr = left.pop()
        else:
            q, prl = right.pop()
        power = max(plr, prl)
    return _solve_split(c, ps, p, q, r)


@dataclass(frozen=True)
class ConvergecastPlan:
    """Back/forward intervals of a regular convergecast strategy."""

    power: Fraction
    split: int
    back: tuple[Fraction, ...]
    forward: tuple[Fraction, ...]


@dataclass(frozen=True)
class ConvergecastResult:
    power: Fraction
    split: int | None
    plan: ConvergecastPlan | None
    stack_ops: int = field(default=0, compare=False)


def convergecast_plan(c: LineConfig, power: Fraction, split: int) -> ConvergecastPlan:
    """Concrete (b_i, f_i) intervals for a feasible budget and split."""
    if not 1 <= split < c.n:
        raise ValueError(f"split {split} out of range")
    back: list[Fraction] = [ZERO] * c.n
    fwd: list[Fraction] = [ZERO] * c.n
    f: Fraction | None = None
    for i in range(1, split + 1):
        b = c.pos(i) if f is None else min(f, c.pos(i))
        f = 2 * b + power - c.pos(i)
        if f < b:
            raise UnreachableError(i)
        back[i - 1], fwd[i - 1] = b, f
    f_lr = f
    f = None
    for i in range(c.n, split, -1):
        b = c.pos(i) if f is None else max(f, c.pos(i))
        f = 2 * b - power - c.pos(i)
        if f > b:
            raise UnreachableError(i)
        back[i - 1], fwd[i - 1] = b, f
    if f_lr is None or f_lr < fwd[split]:
        raise ValueError("split infeasible at this budget: chains do not overlap")
    return ConvergecastPlan(power, split, tuple(back), tuple(fwd))


def compute_optimal_convergecast(c: LineConfig) -> ConvergecastResult:
    """Optimal budget, smallest optimal split and a witness plan, in O(n).

    Sweeps the split left to right, maintaining the breakpoint stacks of both
    reach functions restricted to thresholds below the current best budget.
    Each iteration first improves the budget if the current split beats it,
    then absorbs agent r+1 into the LR stack.
    """
    if c.n == 1:
        return ConvergecastResult(ZERO, None, None)
    ps = PrefixSums(c)
    counter = OpCounter()
    right = _Stack(counter)
    right.items = threshold_stack_rl(c, 1, ps, counter)
    left = _Stack(counter)
    q, prl = right.pop()
    best = prl  # all-RL budget: everything is brought to agent 1
    best_r = 1
    q, prl = right.pop()
    p, plr = 1, ZERO
    for r in range(1, c.n):
        if _reach_lr_piece(c, ps, p, r, best) > _reach_rl_piece(c, ps, q, r + 1, best):
            power = max(plr, prl)
            while _reach_lr_piece(c, ps, p, r, power) >= _reach_rl_piece(c, ps, q, r + 1, power):
                if plr >= prl:
                    p, plr = left.pop()
                else:
                    q, prl = right.pop()
                power = max(plr, prl)
            best = _solve_split(c, ps, p, q, r)
            best_r = r
        if q == r + 1:
            break
        if _reach_lr_piece(c, ps, p, r, best) >= c.pos(r + 1):
            while _reach_lr_piece(c, ps, p, r, plr) >= c.pos(r + 1):
                p, plr = left.pop()
            left.push((p, plr))
            c2 = ps.pow2[r - p]
            plr = (c.pos(r + 1) + ps.sum_lr(p, r) - c2 * c.pos(p)) / (2 * c2 - 1)
            p = r + 1
    plan = convergecast_plan(c, best, best_r)
    return ConvergecastResult(best, best_r, plan, counter.ops)


# --- quadratic oracle -------------------------------------------------------

# A piecewise-linear function is a list of pieces (P0, a, b): value a + b*P on
# [P0, next piece's P0); the first P0 is the left end of the domain.
_PL = list[tuple[Fraction, Fraction, Fraction]]


def _pl_eval(pieces: _PL, x: Fraction) -> Fraction:
    lo, a, b = pieces[0]
    for p0, pa, pb in pieces:
        if p0 > x:
            break
        a, b = pa, pb
    return a + b * x


def _pl_first_crossing(pieces: _PL, extra_slope: int, target: Fraction) -> Fraction:
    """Least P with f(P) + extra_slope*P = target; LHS must be increasing."""
    for j, (p0, a, b) in enumerate(pieces):
        slope = b + extra_slope
        val_lo = a + slope * p0
        p1 = pieces[j + 1][0] if j + 1 < len(pieces) else None
        if val_lo >= target:
            return p0
        if p1 is None or a + slope * p1 >= target:
            return (target - a) / slope
    raise AssertionError("increasing function never crosses target")


def _pl_reach_lr_functions(c: LineConfig) -> list[_PL]:
    """reach_lr(i, .) as a PL function of the budget, for every prefix i."""
    funcs: list[_PL] = []
    cur: _PL = [(ZERO, c.pos(1), Fraction(1))]
    funcs.append(cur)
    for i in range(2, c.n + 1):
        pos = c.pos(i)
        ac = _pl_first_crossing(cur, 1, pos)  # activation: reach + P hits Pos[i]
        th = _pl_first_crossing(cur, 0, pos)  # threshold: reach hits Pos[i]
        nxt: _PL = []
        for j, (p0, a, b) in enumerate(cur):
            p1 = cur[j + 1][0] if j + 1 < len(cur) else None
            if p1 is not None and p1 <= ac:
                continue
            if p0 >= th:
                break
            nxt.append((max(p0, ac), 2 * a - pos, 2 * b + 1))
        nxt.append((th, pos, Fraction(1)))
        funcs.append(nxt)
        cur = nxt
    return funcs


def _pl_intersect_increasing(f: _PL, g: _PL) -> Fraction:
    """Unique zero of the increasing difference f - g, above both domains."""
    lo = max(f[0][0], g[0][0])
    cuts = sorted({lo} | {p0 for p0, _, _ in f if p0 > lo} | {p0 for p0, _, _ in g if p0 > lo})
    for j, x0 in enumerate(cuts):
        x1 = cuts[j + 1] if j + 1 < len(cuts) else None
        d0 = _pl_eval(f, x0) - _pl_eval(g, x0)
        if d0 >= 0:
            return x0
        if x1 is not None and _pl_eval(f, x1) - _pl_eval(g, x1) < 0:
            continue
        # linear on [x0, x1): reconstruct the active pieces via two evaluations
        probe = x0 + 1 if x1 is None else (x0 + x1) / 2
        d1 = _pl_eval(f, probe) - _pl_eval(g, probe)
        slope = (d1 - d0) / (probe - x0)
        root = x0 - d0 / slope
        if x1 is None or root <= x1:
            return root
    raise AssertionError("difference never crosses zero")


def quadratic_oracle_convergecast(c: LineConfig) -> Fraction:
    """Optimal budget via explicit piecewise-linear reach functions, O(n^2)."""
    if c.n == 1:
        return ZERO
    lr = _pl_reach_lr_functions(c)
    rl_mirror = _pl_reach_lr_functions(c.reflected())
    best: Fraction | None = None
    for r in range(1, c.n):
        f = lr[r - 1]
        g: _PL = [(p0, -a, -b) for p0, a, b in rl_mirror[c.n - r - 1]]
        power = _pl_intersect_increasing(f, g)
        if best is None or power < best:
            best = power
    assert best is not None
    return best


def emit_convergecast_strategy(c: LineConfig, plan: ConvergecastPlan) -> "Strategy":
    """Timed moves realising a plan: out to b_i at t=0, onward once informed.

    The information wavefront of each side is the earliest carrier arrival,
    accumulated along the chain; agents wait at b_i until it reaches them.
    """
    from .model import LineLoc
    from .strategy import Strategy, TimedMove

    moves: list[TimedMove] = []

    def side(indices: list[int]) -> None:
        wavefront: Fraction | None = None
        prev_b: Fraction | None = None
        for i in indices:
            b = plan.back[i - 1]
            f = plan.forward[i - 1]
            arrive = abs(c.pos(i) - b)
            if wavefront is None:
                depart = arrive
            else:
                depart = max(arrive, wavefront + abs(b - prev_b))
            if b != c.pos(i):
                moves.append(TimedMove(i, ZERO, LineLoc(c.pos(i)), LineLoc(b)))
            if f != b:
                moves.append(TimedMove(i, depart, LineLoc(b), LineLoc(f)))
            wavefront = depart
            prev_b = b

    side(list(range(1, plan.split + 1)))
    side(list(range(c.n, plan.split, -1)))
    moves.sort(key=lambda m: (m.agent, m.depart))
    return Strategy(tuple(moves))

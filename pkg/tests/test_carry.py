import random
from fractions import Fraction as F

import pytest

from powercast.carry import (
    CarryPlan,
    Infeasible,
    max_feasible_target,
    min_feasible_source,
    pull_carry,
    push_carry,
)

from helpers import line, random_rational


def test_pull_examples():
    plan = pull_carry(line(2), F(0), F(3), F(5))
    assert plan.back == (0,) and plan.forward == (3,)
    assert isinstance(pull_carry(line(2), F(0), F(3), F(4)), Infeasible)
    plan = pull_carry(line(0), F(0), F(5), F(5))  # single agent at s reaching t = P
    assert plan.back == (0,) and plan.forward == (5,)


def test_push_examples():
    plan = push_carry(line(0, 6), F(0), F(8), F(5))
    assert plan.back == (0, 5) and plan.forward == (5, 9)
    plan = push_carry(line(2), F(0), F(3), F(5))
    assert plan.back == (0,) and plan.forward == (3,)
    bad = push_carry(line(0, 6), F(0), F(8), F(4))
    assert isinstance(bad, Infeasible)


def test_full_power_identity():
    plan = push_carry(line(0, 6), F(0), F(8), F(5))
    for b, f, pos in zip(plan.back, plan.forward, (0, 6)):
        assert (pos - b) + (f - b) == plan.power


def test_min_feasible_source_examples():
    assert min_feasible_source(line(2), F(3), F(5)) == 0
    assert min_feasible_source(line(2), F(3), F(4)) == F(1, 2)
    assert min_feasible_source(line(0), F(1), F(1)) == 0


def test_max_feasible_target_examples():
    assert max_feasible_target(line(0, 6), F(0), F(5)) == 9
    assert max_feasible_target(line(0), F(0), F(7)) == 7
    assert max_feasible_target(line(0, 6), F(0), F(4)) == 6


def test_span_precondition():
    with pytest.raises(ValueError):
        pull_carry(line(0), F(5), F(9), F(3))  # t far beyond the last agent's range


def test_degenerate_point():
    plan = pull_carry(line(2), F(1), F(1), F(1))
    assert isinstance(plan, CarryPlan)
    assert isinstance(pull_carry(line(2), F(0), F(0), F(1)), Infeasible)


def test_duality():
    # a feasible pull from the minimal source pushes back past the target
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(1, 30)
        xs = sorted({random_rational(rng, 0, 50) for _ in range(n)})
        if not xs:
            continue
        c = line(*xs)
        power = random_rational(rng, 1, 30)
        t = xs[-1] + random_rational(rng, 0, 20, den=4) % power
        s = min_feasible_source(c, t, power)
        if isinstance(s, Infeasible):
            continue
        reach = max_feasible_target(c, s, power)
        assert not isinstance(reach, Infeasible)
        assert reach >= t


def test_reflection_equivalence():
    # mirroring an instance turns a rightward carry into the reverse-direction
    # one: plans coincide point for point under x -> -x
    rng = random.Random(13)
    checked = 0
    while checked < 200:
        n = rng.randint(1, 12)
        xs = sorted({random_rational(rng, 0, 40) for _ in range(n)})
        if not xs:
            continue
        c = line(*xs)
        power = random_rational(rng, 2, 20)
        s = xs[0] - power / 2
        t = xs[-1] + power / 2
        for op in (pull_carry, push_carry):
            fwd = op(c, s, t, power)
            mirrored = op(c.reflected(), -s, -t, power, direction="reverse")
            assert isinstance(fwd, Infeasible) == isinstance(mirrored, Infeasible)
            if not isinstance(fwd, Infeasible):
                assert tuple(-b for b in reversed(mirrored.back)) == fwd.back
                assert tuple(-f for f in reversed(mirrored.forward)) == fwd.forward
        checked += 1


def test_reverse_direction_plumbing():
    # direction="reverse" is exactly the computation on the mirrored line
    c = line(-6, 0)
    plan = push_carry(c, F(0), -F(8), F(5), direction="reverse")
    assert plan.direction == "reverse"
    assert plan.back == (-5, 0) and plan.forward == (-9, -5)
    assert max_feasible_target(c, F(0), F(5), direction="reverse") == -9
    # largest source from which both agents can relay information down to -3
    assert min_feasible_source(c, -F(3), F(5), direction="reverse") == F(3, 2)


def test_monotone_in_power():
    rng = random.Random(99)
    for _ in range(100):
        n = rng.randint(1, 10)
        xs = sorted({random_rational(rng, 0, 30) for _ in range(n)})
        if not xs:
            continue
        c = line(*xs)
        power = random_rational(rng, 1, 15)
        t = xs[-1] + power / 3
        s = xs[0] - power / 3
        if isinstance(pull_carry(c, s, t, power), CarryPlan):
            assert isinstance(pull_carry(c, s, t, power + 1), CarryPlan)

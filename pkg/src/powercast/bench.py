"""Seeded property sweeps and scaling measurements, exposed via CLI and service."""

from __future__ import annotations

import random
import time
from concurrent.futures import ProcessPoolExecutor

from .convergecast import compute_optimal_convergecast, quadratic_oracle_convergecast
from .disttree import run_distributed_broadcast, run_unknown_tree
from .generators import gen_random_line, gen_random_tree
from .graphs import separation
from .rational import format_scalar

SUITES = ("oracle-equivalence", "distributed-bounds", "scaling")


def oracle_equivalence_case(seed: int) -> dict:
    rng = random.Random(f"bench-oracle:{seed}")
    n = rng.randint(2, 60)
    line = gen_random_line(n, seed)
    fast = compute_optimal_convergecast(line).power
    slow = quadratic_oracle_convergecast(line)
    return {
        "seed": seed,
        "n": n,
        "optimal": format_scalar(fast),
        "oracle": format_scalar(slow),
        "ok": fast == slow,
    }


def distributed_bounds_case(seed: int) -> dict:
    rng = random.Random(f"bench-dist:{seed}")
    n = rng.randint(2, 120)
    tree = gen_random_tree(n, seed)
    if len(tree.agents) < 2:
        return {"seed": seed, "n": n, "ok": True, "skipped": True}
    d = separation(tree)
    gather = run_unknown_tree(tree, d)
    ok = gather.achieved and max(gather.power.values()) <= d
    source = min(tree.agents)
    bcast = run_distributed_broadcast(tree, source, 2 * d)
    ok = ok and bcast.achieved and max(bcast.power.values()) <= 2 * d
    return {
        "seed": seed,
        "n": n,
        "agents": len(tree.agents),
        "separation": format_scalar(d),
        "gather_max": format_scalar(max(gather.power.values())),
        "broadcast_max": format_scalar(max(bcast.power.values())),
        "ok": ok,
    }


def scaling_case(size: int) -> dict:
    line = gen_random_line(size, 48879)
    t0 = time.perf_counter()
    res = compute_optimal_convergecast(line)
    dt = time.perf_counter() - t0
    return {
        "n": size,
        "seconds": round(dt, 4),
        "stack_ops": res.stack_ops,
        "ops_per_agent": round(res.stack_ops / size, 3),
        "ok": True,
    }


def run_suite(suite: str, seeds: int = 100, jobs: int = 1) -> dict:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    t0 = time.perf_counter()
    if suite == "scaling":
        rows = [scaling_case(n) for n in (100, 1000, 5000)]
    else:
        case = oracle_equivalence_case if suite == "oracle-equivalence" else distributed_bounds_case
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                rows = list(pool.map(case, range(seeds)))
        else:
            rows = [case(s) for s in range(seeds)]
    failures = sum(1 for r in rows if not r.get("ok", False))
    return {
        "suite": suite,
        "rows": rows,
        "failures": failures,
        "seconds": round(time.perf_counter() - t0, 3),
    }

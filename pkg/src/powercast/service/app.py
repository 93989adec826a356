"""FastAPI service wrapping the planners, simulators and generators.

Every handler is a plain function over the pydantic models so the CLI can call
them in-process; the FastAPI app is a thin routing layer on top.
"""

from __future__ import annotations

from fractions import Fraction

from fastapi import FastAPI, HTTPException

from .. import bench
from ..broadcast import compute_optimal_broadcast, decide_broadcast, emit_broadcast_strategy
from ..convergecast import (
    compute_optimal_convergecast,
    decide_convergecast,
    emit_convergecast_strategy,
)
from ..disttree import run_distributed_broadcast, run_unknown_tree
from ..generators import (
    ThreePartitionInstance,
    gen_3p_broadcast_star,
    gen_3p_convergecast_star,
    gen_lower_bound_line,
    gen_random_line,
    gen_random_tree,
    partition_strategy,
)
from ..graphs import graph_broadcast_4approx, known_graph_convergecast, separation
from ..model import (
    ConfigError,
    LineConfig,
    WeightedGraph,
    WeightedTree,
    configuration_from_dict,
    configuration_to_dict,
)
from ..rational import format_scalar, parse_scalar
from ..strategy import (
    BudgetExceeded,
    InvalidStrategy,
    Strategy,
    max_power_used,
    simulate,
    strategy_from_dict,
    strategy_to_dict,
    verify_broadcast,
    verify_convergecast,
)
from . import schemas as sc


class RequestFault(ValueError):
    """Client-side error: malformed instance or unusable parameters."""


def _load_instance(doc) -> LineConfig | WeightedGraph:
    try:
        return configuration_from_dict(doc.model_dump(exclude_none=True))
    except ConfigError as exc:
        raise RequestFault(str(exc)) from exc


def _need_line(doc) -> LineConfig:
    cfg = _load_instance(doc)
    if not isinstance(cfg, LineConfig):
        raise RequestFault("this operation needs a line instance")
    return cfg


def _need_tree(doc) -> WeightedTree:
    cfg = _load_instance(doc)
    if not isinstance(cfg, WeightedTree):
        raise RequestFault("this operation needs a tree instance")
    return cfg


def _need_graph(doc) -> WeightedGraph:
    cfg = _load_instance(doc)
    if isinstance(cfg, LineConfig):
        raise RequestFault("this operation needs a graph or tree instance")
    return cfg


def _scalar(text: str, name: str) -> Fraction:
    try:
        return parse_scalar(text)
    except ValueError as exc:
        raise RequestFault(f"bad {name}: {exc}") from exc


def _strategy_doc(strategy: Strategy) -> sc.StrategyDoc:
    return sc.StrategyDoc.model_validate(strategy_to_dict(strategy))


def line_convergecast(req: sc.LineConvergecastRequest) -> sc.LineConvergecastResponse:
    cfg = _need_line(req.instance)
    res = compute_optimal_convergecast(cfg)
    plan_doc = None
    strat_doc = None
    if res.plan is not None:
        plan_doc = sc.IntervalPlanDoc(
            back=[format_scalar(b) for b in res.plan.back],
            forward=[format_scalar(f) for f in res.plan.forward],
        )
        if req.emit_strategy:
            strat_doc = _strategy_doc(emit_convergecast_strategy(cfg, res.plan))
    return sc.LineConvergecastResponse(
        optimal_power=format_scalar(res.power),
        split=res.split,
        plan=plan_doc,
        strategy=strat_doc,
        stack_ops=res.stack_ops,
    )


def line_broadcast(req: sc.LineBroadcastRequest) -> sc.LineBroadcastResponse:
    cfg = _need_line(req.instance)
    source = req.source if req.source is not None else cfg.source
    if source is None:
        raise RequestFault("broadcast needs a source agent (request or instance)")
    if not 1 <= source <= cfg.n:
        raise RequestFault(f"source {source} out of range 1..{cfg.n}")
    res = compute_optimal_broadcast(cfg, source)
    strat_doc = _strategy_doc(emit_broadcast_strategy(cfg, res.plan)) if req.emit_strategy else None
    return sc.LineBroadcastResponse(
        optimal_power=format_scalar(res.power),
        source=source,
        first_left=res.plan.first_left,
        pickups=[format_scalar(x) for x in res.plan.pickups],
        handoffs=[format_scalar(x) for x in res.plan.handoffs],
        strategy=strat_doc,
    )


def decide(req: sc.DecideRequest) -> sc.DecideResponse:
    cfg = _need_line(req.instance)
    power = _scalar(req.power, "power")
    if req.mode == "conv":
        split = decide_convergecast(cfg, power)
        return sc.DecideResponse(feasible=split is not None, mode="conv", split=split)
    source = req.source if req.source is not None else cfg.source
    if source is None:
        raise RequestFault("broadcast decision needs a source agent")
    ok = decide_broadcast(cfg, source, power)
    return sc.DecideResponse(feasible=ok, mode="bcast", source=source)


def graph_approx(req: sc.GraphApproxRequest) -> sc.GraphApproxResponse:
    g = _need_graph(req.instance)
    if len(g.agents) < 2:
        raise RequestFault("graph approximation needs at least two agents")
    d = separation(g)
    if req.mode == "conv":
        gather = known_graph_convergecast(g)
        strategy, bound, collector = gather.strategy, gather.max_power, gather.collector
    else:
        source = req.source if req.source is not None else g.source
        if source is None:
            raise RequestFault("broadcast needs a source agent")
        strategy, bound = graph_broadcast_4approx(g, source)
        collector = None
    trace = simulate(g, strategy, bound)
    if req.mode == "conv":
        verified = verify_convergecast(trace) is not None
    else:
        verified = not verify_broadcast(trace, source)
    return sc.GraphApproxResponse(
        mode=req.mode,
        separation=format_scalar(d),
        power_bound=format_scalar(bound),
        max_power_used=format_scalar(max_power_used(trace)[0]),
        collector=collector,
        verified=verified,
        strategy=_strategy_doc(strategy),
    )


def dist_simulate(req: sc.DistSimulateRequest) -> sc.DistSimulateResponse:
    tree = _need_tree(req.instance)
    budget = _scalar(req.budget, "budget")
    if req.algorithm == "unknown-tree":
        out = run_unknown_tree(tree, budget, req.port_seed)
    else:
        source = req.source if req.source is not None else tree.source
        if source is None:
            raise RequestFault("distributed broadcast needs a source agent")
        out = run_distributed_broadcast(tree, source, budget, req.port_seed)
    powers = {a: format_scalar(p) for a, p in sorted(out.power.items())}
    max_power = format_scalar(max(out.power.values())) if out.power else "0"
    d = separation(tree) if len(tree.agents) >= 2 else None
    return sc.DistSimulateResponse(
        achieved=out.achieved,
        powers=powers,
        max_power=max_power,
        completion=None if out.completion is None else format_scalar(out.completion),
        separation=None if d is None else format_scalar(d),
        events=out.events if req.trace else None,
    )


def _trace_doc(trace) -> sc.TraceDoc:
    from ..strategy import location_to_dict

    return sc.TraceDoc(
        meetings=[
            sc.MeetingDoc(
                time=format_scalar(m.time),
                place=location_to_dict(m.place),
                agents=sorted(m.agents),
            )
            for m in trace.meetings
        ],
        powers={a: format_scalar(trace.power[a]) for a in trace.agents},
        info={a: sorted(trace.info[a]) for a in trace.agents},
        acquired={
            a: [
                {"time": format_scalar(t), "known": sorted(known)}
                for t, known in trace.acquired[a]
            ]
            for a in trace.agents
        },
    )


def verify(req: sc.VerifyRequest) -> sc.VerifyResponse:
    cfg = _load_instance(req.instance)
    budget = _scalar(req.budget, "budget")
    try:
        strategy = strategy_from_dict(req.strategy.model_dump(by_alias=True))
        trace = simulate(cfg, strategy, budget)
    except BudgetExceeded as exc:
        return sc.VerifyResponse(
            ok=False, mode=req.mode, max_power="", powers={}, error=str(exc)
        )
    except InvalidStrategy as exc:
        raise RequestFault(str(exc)) from exc
    mx, _ = max_power_used(trace)
    powers = {a: format_scalar(trace.power[a]) for a in trace.agents}
    trace_doc = _trace_doc(trace) if req.include_trace else None
    if req.mode == "conv":
        witness = verify_convergecast(trace)
        wdoc = None
        if witness is not None:
            agent, t, place = witness
            from ..strategy import location_to_dict

            wdoc = {"agent": agent, "time": format_scalar(t), "place": location_to_dict(place)}
        return sc.VerifyResponse(
            ok=witness is not None,
            mode="conv",
            max_power=format_scalar(mx),
            powers=powers,
            witness=wdoc,
            trace=trace_doc,
        )
    source = req.source if req.source is not None else cfg.source
    if source is None:
        raise RequestFault("broadcast verification needs a source agent")
    missing = sorted(verify_broadcast(trace, source))
    return sc.VerifyResponse(
        ok=not missing,
        mode="bcast",
        max_power=format_scalar(mx),
        powers=powers,
        uninformed=missing,
        trace=trace_doc,
    )


def gen_3p_star(req: sc.Gen3pStarRequest) -> sc.GenResponse:
    values = tuple(req.multiset)
    if len(values) % 3:
        raise RequestFault("multiset size must be a multiple of 3")
    try:
        inst = ThreePartitionInstance(len(values) // 3, values)
    except ValueError as exc:
        raise RequestFault(str(exc)) from exc
    star = gen_3p_convergecast_star(inst) if req.mode == "convergecast" else gen_3p_broadcast_star(inst)
    witness = None
    if req.emit_witness:
        if req.partition is None:
            raise RequestFault("emitting a witness needs a partition")
        try:
            strat = partition_strategy(inst, star, req.partition, req.mode)
        except ValueError as exc:
            raise RequestFault(str(exc)) from exc
        witness = _strategy_doc(strat)
    return sc.GenResponse(
        instance=configuration_to_dict(star.tree),
        power=format_scalar(star.power),
        witness=witness,
    )


def gen_lowerbound(req: sc.GenLowerBoundRequest) -> sc.GenResponse:
    try:
        fam = gen_lower_bound_line(_scalar(req.delta, "delta"), _scalar(req.power, "power"))
    except ValueError as exc:
        raise RequestFault(str(exc)) from exc
    # the family is built to be centrally solvable at P; whether the stretched
    # budget (2-delta)P also suffices centrally is reported, not asserted --
    # the family's point is distributed hardness
    stretched = (2 - fam.delta) * fam.power
    return sc.GenResponse(
        instance=configuration_to_dict(fam.config),
        power=format_scalar(fam.power),
        constants={
            "epsilon": format_scalar(fam.epsilon),
            "sigma": format_scalar(fam.sigma),
            "levels": str(fam.levels),
            "group_size": str(fam.group_size),
            "n": str(fam.n),
            "feasible_at_power": str(decide_convergecast(fam.config, fam.power) is not None).lower(),
            "feasible_at_stretched_power": str(
                decide_convergecast(fam.config, stretched) is not None
            ).lower(),
        },
    )


def gen_random_line_doc(req: sc.GenRandomLineRequest) -> sc.GenResponse:
    try:
        cfg = gen_random_line(req.n, req.seed)
    except ValueError as exc:
        raise RequestFault(str(exc)) from exc
    return sc.GenResponse(instance=configuration_to_dict(cfg))


def gen_random_tree_doc(req: sc.GenRandomTreeRequest) -> sc.GenResponse:
    try:
        tree = gen_random_tree(req.n, req.seed)
    except ValueError as exc:
        raise RequestFault(str(exc)) from exc
    return sc.GenResponse(instance=configuration_to_dict(tree))


def run_bench(req: sc.BenchRequest) -> sc.BenchResponse:
    out = bench.run_suite(req.suite, req.seeds, req.jobs)
    return sc.BenchResponse(**out)


def create_app() -> FastAPI:
    app = FastAPI(title="powercast", version="0.1.0")

    def guarded(handler, req):
        try:
            return handler(req)
        except RequestFault as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/line/convergecast", response_model=sc.LineConvergecastResponse)
    def _line_conv(req: sc.LineConvergecastRequest):
        return guarded(line_convergecast, req)

    @app.post("/line/broadcast", response_model=sc.LineBroadcastResponse)
    def _line_bcast(req: sc.LineBroadcastRequest):
        return guarded(line_broadcast, req)

    @app.post("/decide", response_model=sc.DecideResponse)
    def _decide(req: sc.DecideRequest):
        return guarded(decide, req)

    @app.post("/graph/approx", response_model=sc.GraphApproxResponse)
    def _graph(req: sc.GraphApproxRequest):
        return guarded(graph_approx, req)

    @app.post("/simulate/distributed", response_model=sc.DistSimulateResponse)
    def _sim(req: sc.DistSimulateRequest):
        return guarded(dist_simulate, req)

    @app.post("/verify", response_model=sc.VerifyResponse)
    def _verify(req: sc.VerifyRequest):
        return guarded(verify, req)

    @app.post("/gen/3p-star", response_model=sc.GenResponse)
    def _gen_star(req: sc.Gen3pStarRequest):
        return guarded(gen_3p_star, req)

    @app.post("/gen/lowerbound", response_model=sc.GenResponse)
    def _gen_lb(req: sc.GenLowerBoundRequest):
        return guarded(gen_lowerbound, req)

    @app.post("/gen/random-line", response_model=sc.GenResponse)
    def _gen_line(req: sc.GenRandomLineRequest):
        return guarded(gen_random_line_doc, req)

    @app.post("/gen/random-tree", response_model=sc.GenResponse)
    def _gen_tree(req: sc.GenRandomTreeRequest):
        return guarded(gen_random_tree_doc, req)

    @app.post("/bench", response_model=sc.BenchResponse)
    def _bench(req: sc.BenchRequest):
        return guarded(run_bench, req)

    return app


app = create_app()

"""Pydantic request/response models for the HTTP service and the CLI.

Scalars travel as exact strings ("3", "29/10"); instance documents mirror the
on-disk JSON schemas.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class LineDoc(BaseModel):
    kind: Literal["line"]
    positions: list[str]
    source: int | None = None


class EdgeDoc(BaseModel):
    u: str
    v: str
    w: str


class AgentDoc(BaseModel):
    id: int
    node: str


class GraphDoc(BaseModel):
    kind: Literal["graph", "tree"]
    nodes: list[str]
    edges: list[EdgeDoc]
    agents: list[AgentDoc] = Field(default_factory=list)
    source: int | None = None


InstanceDoc = LineDoc | GraphDoc


class MoveDoc(BaseModel):
    agent: int
    depart: str
    from_: dict = Field(alias="from")
    to: dict

    model_config = {"populate_by_name": True}


class StrategyDoc(BaseModel):
    moves: list[MoveDoc]


class IntervalPlanDoc(BaseModel):
    """Back/forward points per agent, exact strings."""

    back: list[str]
    forward: list[str]


class LineConvergecastRequest(BaseModel):
    instance: InstanceDoc
    emit_strategy: bool = True


class LineConvergecastResponse(BaseModel):
    optimal_power: str
    split: int | None
    plan: IntervalPlanDoc | None = None
    strategy: StrategyDoc | None = None
    stack_ops: int = 0


class LineBroadcastRequest(BaseModel):
    instance: InstanceDoc
    source: int | None = None
    emit_strategy: bool = True


class LineBroadcastResponse(BaseModel):
    optimal_power: str
    source: int
    first_left: bool
    pickups: list[str]
    handoffs: list[str]
    strategy: StrategyDoc | None = None


class DecideRequest(BaseModel):
    instance: InstanceDoc
    power: str
    mode: Literal["conv", "bcast"] = "conv"
    source: int | None = None


class DecideResponse(BaseModel):
    feasible: bool
    mode: Literal["conv", "bcast"]
    split: int | None = None
    source: int | None = None


class GraphApproxRequest(BaseModel):
    instance: InstanceDoc
    mode: Literal["conv", "bcast"] = "conv"
    source: int | None = None


class GraphApproxResponse(BaseModel):
    mode: Literal["conv", "bcast"]
    separation: str
    power_bound: str
    max_power_used: str
    collector: int | None = None
    verified: bool
    strategy: StrategyDoc


class DistSimulateRequest(BaseModel):
    instance: InstanceDoc
    algorithm: Literal["unknown-tree", "dist-broadcast"]
    budget: str
    source: int | None = None
    port_seed: int | None = None
    trace: bool = False


class DistSimulateResponse(BaseModel):
    achieved: bool
    powers: dict[int, str]
    max_power: str
    completion: str | None
    separation: str | None = None
    events: list[dict] | None = None


class VerifyRequest(BaseModel):
    instance: InstanceDoc
    strategy: StrategyDoc
    budget: str
    mode: Literal["conv", "bcast"] = "conv"
    source: int | None = None
    include_trace: bool = False


class MeetingDoc(BaseModel):
    time: str
    place: dict
    agents: list[int]


class TraceDoc(BaseModel):
    meetings: list[MeetingDoc]
    powers: dict[int, str]
    info: dict[int, list[int]]
    acquired: dict[int, list[dict]]


class VerifyResponse(BaseModel):
    ok: bool
    mode: Literal["conv", "bcast"]
    max_power: str
    powers: dict[int, str]
    witness: dict | None = None
    uninformed: list[int] = Field(default_factory=list)
    error: str | None = None
    trace: TraceDoc | None = None


class Gen3pStarRequest(BaseModel):
    mode: Literal["convergecast", "broadcast"]
    multiset: list[int]
    emit_witness: bool = False
    partition: list[list[int]] | None = None


class GenLowerBoundRequest(BaseModel):
    delta: str
    power: str


class GenRandomLineRequest(BaseModel):
    n: int
    seed: int


class GenRandomTreeRequest(BaseModel):
    n: int
    seed: int


class GenResponse(BaseModel):
    instance: dict
    power: str | None = None
    constants: dict[str, str] | None = None
    witness: StrategyDoc | None = None


class BenchRequest(BaseModel):
    suite: Literal["oracle-equivalence", "distributed-bounds", "scaling"]
    seeds: int = 100
    jobs: int = 1


class BenchResponse(BaseModel):
    suite: str
    rows: list[dict]
    failures: int
    seconds: float

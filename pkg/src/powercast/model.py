"""Network models: agent configurations on lines, weighted graphs and trees.

Instances are immutable after construction and validated eagerly.  Agent ids
are dense integers 1..k; on lines the id equals the sorted position index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .rational import format_scalar, parse_scalar


class ConfigError(ValueError):
    """Base error for malformed instance documents."""


class ParseError(ConfigError):
    """Document is not valid JSON or misses required fields."""


class InvariantError(ConfigError):
    """Document parsed but violates a structural invariant."""


@dataclass(frozen=True)
class LineConfig:
    """Agents on a line, positions strictly increasing, agent i at positions[i-1]."""

    positions: tuple[Fraction, ...]
    source: int | None = None

    def __post_init__(self) -> None:
        if not self.positions:
            raise InvariantError("line needs at least one agent")
        for a, b in zip(self.positions, self.positions[1:]):
            if not a < b:
                raise InvariantError(
                    f"positions not strictly increasing: {format_scalar(a)} !< {format_scalar(b)}"
                )
        if self.source is not None and not 1 <= self.source <= len(self.positions):
            raise InvariantError(f"source {self.source} out of range 1..{len(self.positions)}")

    @property
    def n(self) -> int:
        return len(self.positions)

    def pos(self, i: int) -> Fraction:
        """Position of agent i, 1-based."""
        return self.positions[i - 1]

    def reflected(self) -> "LineConfig":
        """Mirror image: agent i maps to agent n+1-i."""
        pts = tuple(-x for x in reversed(self.positions))
        src = None if self.source is None else self.n + 1 - self.source
        return LineConfig(pts, src)


@dataclass(frozen=True)
class WeightedGraph:
    """Connected weighted graph with agents at distinct nodes."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str, Fraction], ...]
    agents: dict[int, str] = field(default_factory=dict)
    source: int | None = None

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise InvariantError("duplicate node ids")
        seen = set()
        for u, v, w in self.edges:
            if u == v:
                raise InvariantError(f"self-loop at {u}")
            if u not in node_set or v not in node_set:
                raise InvariantError(f"edge ({u},{v}) references unknown node")
            if w <= 0:
                raise InvariantError(f"edge ({u},{v}) weight must be positive")
            key = frozenset((u, v))
            if key in seen:
                raise InvariantError(f"parallel edge ({u},{v})")
            seen.add(key)
        if self.nodes and not self._connected():
            raise InvariantError("graph is not connected")
        used = set()
        for aid, node in self.agents.items():
            if node not in node_set:
                raise InvariantError(f"agent {aid} at unknown node {node}")
            if node in used:
                raise InvariantError(f"two agents share start node {node}")
            used.add(node)
        if self.agents and sorted(self.agents) != list(range(1, len(self.agents) + 1)):
            raise InvariantError("agent ids must be dense 1..k")
        if self.source is not None and self.source not in self.agents:
            raise InvariantError(f"source agent {self.source} not present")

    def _connected(self) -> bool:
        if not self.nodes:
            return True
        adj = self.adjacency()
        stack, seen = [self.nodes[0]], {self.nodes[0]}
        while stack:
            u = stack.pop()
            for v, _ in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self.nodes)

    def adjacency(self) -> dict[str, list[tuple[str, Fraction]]]:
        adj: dict[str, list[tuple[str, Fraction]]] = {u: [] for u in self.nodes}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def edge_weight(self, u: str, v: str) -> Fraction:
        for a, b, w in self.edges:
            if {a, b} == {u, v}:
                return w
        raise KeyError(f"no edge ({u},{v})")

    def agent_nodes(self) -> list[str]:
        """Start nodes ordered by agent id."""
        return [self.agents[i] for i in sorted(self.agents)]


class WeightedTree(WeightedGraph):
    """Acyclic connected graph; used by the distributed protocols."""

    def _validate(self) -> None:
        super()._validate()
        if len(self.edges) != len(self.nodes) - 1:
            raise InvariantError("tree must have exactly n-1 edges")

    def leaves(self) -> list[str]:
        adj = self.adjacency()
        return [u for u in self.nodes if len(adj[u]) == 1]


def validate_tree_for_distributed(tree: WeightedTree) -> None:
    """Require an agent at every leaf; raises listing offending leaves."""
    hosts = set(tree.agents.values())
    missing = [leaf for leaf in tree.leaves() if leaf not in hosts]
    if missing:
        raise InvariantError(f"leaves without agents: {', '.join(sorted(missing))}")


@dataclass(frozen=True)
class NodeLoc:
    node: str


@dataclass(frozen=True)
class EdgeLoc:
    """Interior point of edge (u,v) at ``offset`` from u; 0 < offset < weight."""

    u: str
    v: str
    offset: Fraction


@dataclass(frozen=True)
class LineLoc:
    x: Fraction


Location = NodeLoc | EdgeLoc | LineLoc


def load_configuration(text: str) -> LineConfig | WeightedGraph | WeightedTree:
    """Parse a JSON instance document into a validated configuration."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return configuration_from_dict(doc)


def configuration_from_dict(doc: object) -> LineConfig | WeightedGraph | WeightedTree:
    if not isinstance(doc, dict):
        raise ParseError("instance document must be a JSON object")
    kind = doc.get("kind")
    try:
        if kind == "line":
            positions = tuple(parse_scalar(p) for p in doc["positions"])
            return LineConfig(positions, doc.get("source"))
        if kind in ("graph", "tree"):
            nodes = tuple(str(u) for u in doc["nodes"])
            edges = tuple(
                (str(e["u"]), str(e["v"]), parse_scalar(e["w"])) for e in doc["edges"]
            )
            agents = {int(a["id"]): str(a["node"]) for a in doc.get("agents", [])}
            cls = WeightedTree if kind == "tree" else WeightedGraph
            return cls(nodes, edges, agents, doc.get("source"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ParseError(f"malformed {kind or 'instance'} document: {exc}") from exc
    raise ParseError(f"unknown instance kind {kind!r}")


def configuration_to_dict(cfg: LineConfig | WeightedGraph) -> dict:
    if isinstance(cfg, LineConfig):
        doc: dict = {"kind": "line", "positions": [format_scalar(p) for p in cfg.positions]}
    else:
        doc = {
            "kind": "tree" if isinstance(cfg, WeightedTree) else "graph",
            "nodes": list(cfg.nodes),
            "edges": [{"u": u, "v": v, "w": format_scalar(w)} for u, v, w in cfg.edges],
            "agents": [{"id": i, "node": cfg.agents[i]} for i in sorted(cfg.agents)],
        }
    if cfg.source is not None:
        doc["source"] = cfg.source
    return doc


def dump_configuration(cfg: LineConfig | WeightedGraph) -> str:
    return json.dumps(configuration_to_dict(cfg))

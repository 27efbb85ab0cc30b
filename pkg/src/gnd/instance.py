"""Instances: resources, the online request stream, reply collections, loads."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from gnd.costs import CostFunction, cost_from_dict, cost_to_dict
from gnd.errors import InstanceError, InvalidReply

LoadVector = Dict[str, float]


@dataclass(frozen=True)
class Graph:
    """Edge ids double as resource ids."""

    directed: bool
    nodes: tuple
    edges: Mapping[str, Tuple[str, str]]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", dict(self.edges))
        known = set(self.nodes)
        for eid, (u, v) in self.edges.items():
            if u not in known or v not in known:
                raise InstanceError(f"edge {eid!r} references unknown node")

    @cached_property
    def adjacency(self) -> Dict[str, list]:
        """node -> sorted [(edge id, neighbour)] following edge direction."""
        adj = {n: [] for n in self.nodes}
        for eid in sorted(self.edges):
            u, v = self.edges[eid]
            adj[u].append((eid, v))
            if not self.directed:
                adj[v].append((eid, u))
        return adj

    def reachable(self, start, edge_ids: Iterable[str], reverse: bool = False) -> set:
        allowed = set(edge_ids)
        out: Dict[str, list] = {}
        for eid in allowed:
            u, v = self.edges[eid]
            if reverse:
                u, v = v, u
            out.setdefault(u, []).append(v)
            if not self.directed:
                out.setdefault(v, []).append(u)
        seen = {start}
        todo = deque([start])
        while todo:
            n = todo.popleft()
            for m in out.get(n, ()):
                if m not in seen:
                    seen.add(m)
                    todo.append(m)
        return seen


@dataclass(frozen=True)
class ExplicitList:
    replies: tuple  # of frozensets

    def __post_init__(self):
        replies = tuple(frozenset(p) for p in self.replies)
        if not replies:
            raise InstanceError("explicit reply list must be nonempty")
        object.__setattr__(self, "replies", replies)

    @property
    def demand(self) -> Optional[float]:
        return None


@dataclass(frozen=True)
class RoutingPair:
    source: str
    sink: str
    demand: float = 1.0

    def __post_init__(self):
        if not self.demand >= 1:
            raise InstanceError(f"demand must be >= 1, got {self.demand!r}")


@dataclass(frozen=True)
class SetConnectivity:
    terminals: frozenset
    demand: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "terminals", frozenset(self.terminals))
        if not self.terminals:
            raise InstanceError("terminal set must be nonempty")
        if not self.demand >= 1:
            raise InstanceError(f"demand must be >= 1, got {self.demand!r}")


ReplySpec = Union[ExplicitList, RoutingPair, SetConnectivity]


@dataclass(frozen=True)
class Resource:
    id: str
    cost: CostFunction


@dataclass(frozen=True)
class Request:
    index: int
    replies: ReplySpec
    weights: Optional[Mapping[str, float]] = None

    def __post_init__(self):
        if self.weights is not None:
            object.__setattr__(self, "weights", dict(self.weights))
            for rid, w in self.weights.items():
                if not (math.isfinite(w) and w >= 1):
                    raise InstanceError(
                        f"request {self.index}: weight on {rid!r} is {w!r}, must be >= 1"
                    )
        if isinstance(self.replies, ExplicitList):
            if self.weights is None:
                raise InstanceError(f"request {self.index}: explicit replies need weights")
            missing = set().union(*self.replies.replies) - set(self.weights)
            if missing:
                raise InstanceError(
                    f"request {self.index}: no weight for {sorted(missing)}"
                )
        elif self.weights is not None:
            raise InstanceError(
                f"request {self.index}: graph requests use uniform demand weights"
            )

    def weight(self, rid: str) -> float:
        if self.weights is not None:
            return self.weights[rid]
        return float(self.replies.demand)

    def candidates(self, graph: Optional[Graph]) -> tuple:
        """Resources any reply of this request may use."""
        if isinstance(self.replies, ExplicitList):
            return tuple(sorted(set().union(*self.replies.replies)))
        return tuple(sorted(graph.edges))


@dataclass(frozen=True)
class Instance:
    resources: tuple
    requests: tuple
    graph: Optional[Graph] = None
    name: str = ""
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "resources", tuple(self.resources))
        object.__setattr__(self, "requests", tuple(self.requests))
        index = {}
        for r in self.resources:
            if r.id in index:
                raise InstanceError(f"duplicate resource id {r.id!r}")
            index[r.id] = r
        object.__setattr__(self, "_index", index)
        if self.graph is not None:
            extra = set(self.graph.edges) - set(index)
            if extra:
                raise InstanceError(f"graph edges without a resource: {sorted(extra)}")
        for req in self.requests:
            spec = req.replies
            if isinstance(spec, ExplicitList):
                unknown = set().union(*spec.replies) - set(index)
                if unknown:
                    raise InstanceError(
                        f"request {req.index}: unknown resources {sorted(unknown)}"
                    )
                continue
            if self.graph is None:
                raise InstanceError(f"request {req.index}: graph request without a graph")
            nodes = set(self.graph.nodes)
            ends = (
                {spec.source, spec.sink} if isinstance(spec, RoutingPair) else spec.terminals
            )
            if not ends <= nodes:
                raise InstanceError(f"request {req.index}: unknown nodes {sorted(ends - nodes)}")

    def __getitem__(self, rid: str) -> Resource:
        return self._index[rid]

    def cost(self, rid: str) -> CostFunction:
        return self._index[rid].cost

    @property
    def ids(self) -> tuple:
        return tuple(r.id for r in self.resources)

    def zero_loads(self) -> LoadVector:
        return {r.id: 0.0 for r in self.resources}

    def with_requests(self, requests) -> "Instance":
        return Instance(self.resources, tuple(requests), self.graph, self.name)


# ---------------------------------------------------------------------------
# load accounting


def validate_reply(request: Request, reply: Iterable[str], graph: Optional[Graph]) -> bool:
    reply = frozenset(reply)
    spec = request.replies
    if isinstance(spec, ExplicitList):
        return reply in spec.replies
    if graph is None or not reply <= set(graph.edges):
        return False
    if isinstance(spec, RoutingPair):
        if spec.source == spec.sink:
            return True
        return spec.sink in graph.reachable(spec.source, reply)
    terminals = spec.terminals
    if len(terminals) == 1:
        return True
    root = min(terminals)
    if not terminals <= graph.reachable(root, reply):
        return False
    if graph.directed:
        return terminals <= graph.reachable(root, reply, reverse=True)
    return True


def apply_reply(
    loads: Mapping[str, float],
    request: Request,
    reply: Iterable[str],
    graph: Optional[Graph] = None,
) -> LoadVector:
    reply = frozenset(reply)
    if not reply <= set(loads):
        raise InvalidReply(f"request {request.index}: unknown resources in reply")
    if not validate_reply(request, reply, graph):
        raise InvalidReply(f"request {request.index}: reply {sorted(reply)} is not admissible")
    out = dict(loads)
    for rid in reply:
        out[rid] = out[rid] + request.weight(rid)
    return out


def total_cost(loads: Mapping[str, float], resources: Iterable[Resource]) -> float:
    return math.fsum(r.cost(loads.get(r.id, 0.0)) for r in resources)


def reply_cost(reply: Iterable[str], d: Mapping[str, float]) -> float:
    # fsum: exactly rounded, so the value does not depend on iteration order
    return math.fsum(d[e] for e in reply)


# ---------------------------------------------------------------------------
# file format


def request_to_dict(req: Request) -> dict:
    spec = req.replies
    if isinstance(spec, ExplicitList):
        return {
            "weights": dict(sorted(req.weights.items())),
            "replies": [sorted(p) for p in spec.replies],
        }
    if isinstance(spec, RoutingPair):
        return {
            "demand": spec.demand,
            "replies": {"kind": "path", "source": spec.source, "sink": spec.sink},
        }
    return {
        "demand": spec.demand,
        "replies": {"kind": "connect", "terminals": sorted(spec.terminals)},
    }


def request_from_dict(i: int, d: dict) -> Request:
    replies = d["replies"]
    if isinstance(replies, list):
        weights = {str(k): float(v) for k, v in d["weights"].items()}
        return Request(i, ExplicitList(tuple(frozenset(map(str, p)) for p in replies)), weights)
    if "weights" in d:
        raise InstanceError(f"request {i}: graph requests take 'demand', not 'weights'")
    demand = float(d.get("demand", 1.0))
    kind = replies.get("kind")
    if kind == "path":
        return Request(i, RoutingPair(str(replies["source"]), str(replies["sink"]), demand))
    if kind == "connect":
        return Request(i, SetConnectivity(frozenset(map(str, replies["terminals"])), demand))
    raise InstanceError(f"request {i}: unknown reply kind {kind!r}")


def instance_to_dict(inst: Instance) -> dict:
    out = {
        "resources": [{"id": r.id, "cost": cost_to_dict(r.cost)} for r in inst.resources],
        "requests": [request_to_dict(r) for r in inst.requests],
    }
    if inst.graph is not None:
        out["graph"] = {
            "directed": inst.graph.directed,
            "nodes": list(inst.graph.nodes),
            "edges": [
                {"id": eid, "from": u, "to": v}
                for eid, (u, v) in sorted(inst.graph.edges.items())
            ],
        }
    if inst.name:
        out["name"] = inst.name
    return out


def instance_from_dict(d: dict) -> Instance:
    try:
        resources = []
        for r in d["resources"]:
            try:
                cost = cost_from_dict(r["cost"])
            except ValueError as exc:
                raise InstanceError(f"resource {r.get('id')!r}: {exc}") from exc
            resources.append(Resource(str(r["id"]), cost))
        graph = None
        if d.get("graph") is not None:
            g = d["graph"]
            graph = Graph(
                bool(g["directed"]),
                tuple(map(str, g["nodes"])),
                {str(e["id"]): (str(e["from"]), str(e["to"])) for e in g["edges"]},
            )
        requests = [request_from_dict(i, r) for i, r in enumerate(d["requests"])]
    except (KeyError, TypeError, AttributeError) as exc:
        raise InstanceError(f"malformed instance document: {exc!r}") from exc
    return Instance(tuple(resources), tuple(requests), graph, str(d.get("name", "")))


def load_instance(path: Union[str, Path]) -> Instance:
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise InstanceError(f"{path}: top level must be an object")
    return instance_from_dict(doc)


def save_instance(inst: Instance, path: Union[str, Path]) -> None:
    with open(path, "w") as fh:
        json.dump(instance_to_dict(inst), fh, indent=1)
        fh.write("\n")

"""Min-cost reply oracles.

An oracle is called as ``oracle(request, d, graph)`` with nonnegative finite
resource costs ``d`` and returns an :class:`OracleAnswer` whose cost is within
``oracle.tau`` of the cheapest reply.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, List, Mapping, Optional

from gnd.errors import BudgetExceeded, Disconnected, NoPath
from gnd.instance import (
    ExplicitList,
    Graph,
    Instance,
    Request,
    RoutingPair,
    SetConnectivity,
    reply_cost,
    validate_reply,
)

MAX_ENUM_EDGES = 16
MAX_ENUM_REPLIES = 200_000


@dataclass(frozen=True)
class OracleAnswer:
    reply: frozenset
    cost: float
    tau: float


def _check_costs(d: Mapping[str, float], ids: Iterable[str]) -> None:
    for e in ids:
        v = d[e]
        if not (math.isfinite(v) and v >= 0):
            raise ValueError(f"oracle cost on {e!r} must be finite and >= 0, got {v!r}")


def _reply_key(reply: frozenset, d: Mapping[str, float]):
    return (reply_cost(reply, d), len(reply), tuple(sorted(reply)))


# ---------------------------------------------------------------------------
# enumeration of reply collections (tiny instances only)


def _simple_paths(graph: Graph, s, t, limit: int) -> List[frozenset]:
    out: List[frozenset] = []
    stack = [(s, (), frozenset([s]))]
    while stack:
        node, path, seen = stack.pop()
        if node == t:
            out.append(frozenset(path))
            if len(out) > limit:
                raise BudgetExceeded(f"more than {limit} simple paths")
            continue
        for eid, nxt in graph.adjacency[node]:
            if nxt not in seen:
                stack.append((nxt, path + (eid,), seen | {nxt}))
    return out


def _is_steiner_tree(graph: Graph, edges: tuple, terminals: frozenset) -> bool:
    # Inclusion-minimal connecting edge sets in an undirected graph are
    # exactly the trees spanning the terminals whose leaves are terminals.
    deg = {}
    for eid in edges:
        u, v = graph.edges[eid]
        if u == v:
            return False
        deg[u] = deg.get(u, 0) + 1
        deg[v] = deg.get(v, 0) + 1
    if len(edges) != len(deg) - 1 or not terminals <= deg.keys():
        return False
    if any(k == 1 and n not in terminals for n, k in deg.items()):
        return False
    return len(graph.reachable(next(iter(terminals)), edges)) == len(deg)


def enumerate_replies(
    request: Request,
    graph: Optional[Graph] = None,
    max_edges: int = MAX_ENUM_EDGES,
    limit: int = MAX_ENUM_REPLIES,
) -> List[frozenset]:
    """All replies of ``request`` up to supersets.

    For graph requests only inclusion-minimal replies are produced; every other
    admissible reply contains one of them, so minima of nonnegative additive
    costs (and of nondecreasing load costs) are unaffected.
    """
    spec = request.replies
    if isinstance(spec, ExplicitList):
        return list(spec.replies)
    if isinstance(spec, RoutingPair):
        if spec.source == spec.sink:
            return [frozenset()]
        return _simple_paths(graph, spec.source, spec.sink, limit)
    terminals = spec.terminals
    if len(terminals) == 1:
        return [frozenset()]
    edges = sorted(graph.edges)
    if len(edges) > max_edges:
        raise BudgetExceeded(f"{len(edges)} edges exceeds enumeration cap {max_edges}")
    out: List[frozenset] = []
    if not graph.directed:
        for k in range(1, min(len(edges), len(graph.nodes) - 1) + 1):
            for sub in combinations(edges, k):
                if _is_steiner_tree(graph, sub, terminals):
                    out.append(frozenset(sub))
        return out
    for k in range(1, len(edges) + 1):
        for sub in combinations(edges, k):
            s = frozenset(sub)
            if validate_reply(request, s, graph) and not any(
                validate_reply(request, s - {e}, graph) for e in s
            ):
                out.append(s)
                if len(out) > limit:
                    raise BudgetExceeded(f"more than {limit} replies")
    return out


# ---------------------------------------------------------------------------
# oracles


class ExhaustiveOracle:
    """Exact oracle by scanning the reply collection; ties go to the first listed."""

    name = "exhaustive"
    tau = 1.0

    def __call__(self, request: Request, d: Mapping[str, float], graph=None) -> OracleAnswer:
        if not isinstance(request.replies, ExplicitList):
            return EnumerationOracle()(request, d, graph)
        replies = request.replies.replies
        _check_costs(d, set().union(*replies))
        best, best_cost = None, math.inf
        for p in replies:
            c = reply_cost(p, d)
            if c < best_cost:
                best, best_cost = p, c
        return OracleAnswer(best, best_cost, self.tau)


class EnumerationOracle:
    """Exact oracle for implicit reply collections on tiny graphs (exponential)."""

    name = "enumeration"
    tau = 1.0

    def __init__(self, max_edges: int = MAX_ENUM_EDGES):
        self.max_edges = max_edges

    def __call__(self, request: Request, d: Mapping[str, float], graph=None) -> OracleAnswer:
        replies = enumerate_replies(request, graph, self.max_edges)
        if not replies:
            if isinstance(request.replies, RoutingPair):
                raise NoPath(f"request {request.index}: sink unreachable")
            raise Disconnected(f"request {request.index}: terminals not connectable")
        _check_costs(d, set().union(*replies))
        best = min(replies, key=lambda p: _reply_key(p, d))
        return OracleAnswer(best, reply_cost(best, d), self.tau)


def dijkstra(graph: Graph, source, d: Mapping[str, float]) -> dict:
    """Node -> (cost, hops, edge-id path) of the preferred path from ``source``.

    Labels compare lexicographically, so among equal-cost paths fewer edges
    win, then the lexicographically smaller edge-id sequence.
    """
    best = {source: (0.0, 0, ())}
    heap = [(0.0, 0, (), source)]
    done = set()
    while heap:
        cost, hops, path, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        for eid, nxt in graph.adjacency[node]:
            if nxt in done:
                continue
            label = (cost + d[eid], hops + 1, path + (eid,))
            if nxt not in best or label < best[nxt]:
                best[nxt] = label
                heapq.heappush(heap, label + (nxt,))
    return best


class ShortestPathOracle:
    name = "shortest-path"
    tau = 1.0

    def __call__(self, request: Request, d: Mapping[str, float], graph: Graph) -> OracleAnswer:
        spec = request.replies
        if not isinstance(spec, RoutingPair):
            raise TypeError("shortest-path oracle needs a routing request")
        _check_costs(d, graph.edges)
        if spec.source == spec.sink:
            return OracleAnswer(frozenset(), 0.0, self.tau)
        labels = dijkstra(graph, spec.source, d)
        if spec.sink not in labels:
            raise NoPath(f"request {request.index}: {spec.sink!r} unreachable from {spec.source!r}")
        reply = frozenset(labels[spec.sink][2])
        return OracleAnswer(reply, reply_cost(reply, d), self.tau)


class SteinerOracle:
    """MST of the terminals' metric closure, expanded to graph edges (factor 2)."""

    name = "steiner"
    tau = 2.0

    def __call__(self, request: Request, d: Mapping[str, float], graph: Graph) -> OracleAnswer:
        spec = request.replies
        if not isinstance(spec, SetConnectivity) or graph.directed:
            raise TypeError("steiner oracle needs a set-connectivity request on an undirected graph")
        _check_costs(d, graph.edges)
        terminals = sorted(spec.terminals)
        if len(terminals) == 1:
            return OracleAnswer(frozenset(), 0.0, self.tau)
        closure = {t: dijkstra(graph, t, d) for t in terminals}
        for t in terminals[1:]:
            if t not in closure[terminals[0]]:
                raise Disconnected(f"request {request.index}: terminal {t!r} in another component")
        # Prim on the complete terminal graph
        in_tree = {terminals[0]}
        edges = set()
        while len(in_tree) < len(terminals):
            _, u, v = min(
                (closure[u][v][0], u, v)
                for u in sorted(in_tree)
                for v in terminals
                if v not in in_tree
            )
            in_tree.add(v)
            edges.update(closure[u][v][2])
        reply = frozenset(edges)
        return OracleAnswer(reply, reply_cost(reply, d), self.tau)


class AutoOracle:
    """Dispatch on the reply-collection type of each request."""

    name = "auto"

    def __init__(self, instance: Instance):
        self.exhaustive = ExhaustiveOracle()
        self.path = ShortestPathOracle()
        self.steiner = SteinerOracle()
        self.enum = EnumerationOracle()
        self.tau = max([self._pick(r, instance.graph).tau for r in instance.requests] or [1.0])

    def _pick(self, request: Request, graph):
        spec = request.replies
        if isinstance(spec, ExplicitList):
            return self.exhaustive
        if isinstance(spec, RoutingPair):
            return self.path
        return self.enum if graph.directed else self.steiner

    def __call__(self, request, d, graph=None):
        return self._pick(request, graph)(request, d, graph)


ORACLES = {
    "exhaustive": ExhaustiveOracle,
    "shortest-path": ShortestPathOracle,
    "steiner": SteinerOracle,
    "enumeration": EnumerationOracle,
}


def make_oracle(name: Optional[str], instance: Instance):
    if name is None or name == "auto":
        return AutoOracle(instance)
    try:
        return ORACLES[name]()
    except KeyError:
        raise ValueError(f"unknown oracle {name!r}; choose from {sorted(ORACLES)}") from None


def exact_min(request: Request, d: Mapping[str, float], graph=None) -> OracleAnswer:
    """Exact minimum by enumeration (explicit list or tiny graph)."""
    if isinstance(request.replies, ExplicitList):
        return ExhaustiveOracle()(request, d, graph)
    return EnumerationOracle()(request, d, graph)

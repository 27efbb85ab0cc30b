"""Lower-bound constructions and seeded random instance families."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

from gnd.costs import DoSCost, PowerCost, REPCost
from gnd.errors import AdversaryStuck
from gnd.instance import (
    ExplicitList,
    Graph,
    Instance,
    Request,
    Resource,
    RoutingPair,
    SetConnectivity,
    total_cost,
)

ALPHAS = (1.0, 1.5, 2.0, 3.0)


# ---------------------------------------------------------------------------
# binary-tree adversary


def _node(k: int) -> str:
    return f"n{k}"


@dataclass
class TreeAdversary:
    """Complete binary tree of depth ``q`` (heap-numbered, root ``n1``) with
    edges toward the root, plus a source ``s`` with an edge to every node.

    Source edges cost ``sigma + x^alpha`` with ``sigma = q^alpha``; tree edges
    are free.
    """

    q: int
    alpha: float = 1.0
    sinks: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 1:
            raise ValueError("tree depth q must be a positive integer")
        if self.alpha < 1:
            raise ValueError("alpha must be >= 1")
        self.sigma = float(self.q) ** self.alpha
        n = 2 ** (self.q + 1) - 1
        nodes = ["s"] + [_node(k) for k in range(1, n + 1)]
        edges, resources = {}, []
        for k in range(1, n + 1):
            eid = f"s>{_node(k)}"
            edges[eid] = ("s", _node(k))
            resources.append(Resource(eid, DoSCost(self.sigma, 1.0, self.alpha)))
        for k in range(2, n + 1):
            eid = f"{_node(k)}>{_node(k // 2)}"
            edges[eid] = (_node(k), _node(k // 2))
            resources.append(Resource(eid, PowerCost(0.0, 1.0)))
        self.graph = Graph(True, tuple(nodes), edges)
        self.instance = Instance(tuple(resources), (), self.graph, name=f"tree-q{self.q}")
        self.source_edges = frozenset(e for e in edges if e.startswith("s>"))

    @property
    def root(self) -> str:
        return _node(1)

    def children(self, node: str) -> tuple:
        k = int(node[1:])
        return _node(2 * k), _node(2 * k + 1)

    def request(self, i: int, sink: str) -> Request:
        return Request(i, RoutingPair("s", sink, 1.0))

    def next_sink(self, used_edges: Iterable[str]) -> str:
        """Next sink given the edges carrying load >= 1 so far."""
        if not self.sinks:
            return self.root
        prev = self.sinks[-1]
        if int(prev[1:]) >= 2**self.q:
            raise AdversaryStuck(f"sink {prev} is a leaf; depth exhausted")
        reach = self.graph.reachable("s", used_edges)
        for child in self.children(prev):
            if child not in reach:
                return child
        raise AdversaryStuck(f"both children of {prev} are reachable in the used edge set")

    def drive(self, solver, n_requests: Optional[int] = None) -> List[str]:
        """Run the adaptive sequence against anything with ``step`` and ``loads``."""
        for i in range(self.q if n_requests is None else n_requests):
            used = [e for e, x in solver.loads.items() if x >= 1]
            sink = self.next_sink(used)
            self.sinks.append(sink)
            solver.step(self.request(i, sink))
        return list(self.sinks)

    def requests(self) -> List[Request]:
        return [self.request(i, t) for i, t in enumerate(self.sinks)]

    def offline_solution(self, sinks: Optional[Sequence[str]] = None) -> List[frozenset]:
        sinks = list(self.sinks if sinks is None else sinks)
        return build_offline_tree_solution(sinks)

    def offline_cost(self, sinks: Optional[Sequence[str]] = None) -> float:
        sinks = list(self.sinks if sinks is None else sinks)
        loads = self.instance.zero_loads()
        for p in self.offline_solution(sinks):
            for e in p:
                loads[e] += 1.0
        return total_cost(loads, self.instance.resources)


def build_offline_tree_solution(sinks: Sequence[str]) -> List[frozenset]:
    """Route every request through the source edge into the deepest sink.

    Sinks must lie on one root-to-descendant path; request ``i`` then walks
    from the deepest sink up the tree to ``sinks[i]``.
    """
    if not sinks:
        return []
    deepest = sinks[-1]
    path = [f"s>{deepest}"]
    replies = [None] * len(sinks)
    replies[-1] = frozenset(path)
    for i in range(len(sinks) - 1, 0, -1):
        child, parent = sinks[i], sinks[i - 1]
        if int(child[1:]) // 2 != int(parent[1:]):
            raise ValueError(f"{child} is not a child of {parent}")
        path.append(f"{child}>{parent}")
        replies[i - 1] = frozenset(path)
    return replies


# ---------------------------------------------------------------------------
# restricted assignment


@dataclass(frozen=True)
class RestrictedAssignment:
    machines: int
    jobs: tuple  # of machine-index subsets
    p: float

    def __post_init__(self):
        object.__setattr__(self, "jobs", tuple(frozenset(j) for j in self.jobs))
        for j, allowed in enumerate(self.jobs):
            if not allowed or not all(0 <= m < self.machines for m in allowed):
                raise ValueError(f"job {j}: machine set must be a nonempty subset of range({self.machines})")

    def objective(self, assignment: Sequence[int]) -> float:
        loads = [0] * self.machines
        for m in assignment:
            loads[m] += 1
        return float(sum(x**self.p for x in loads))


def restricted_assignment_to_ssr(machines: int, jobs, p: float) -> Instance:
    """Single-source routing instance equivalent to ell_p restricted assignment."""
    ra = RestrictedAssignment(machines, tuple(jobs), p)
    nodes = ["s"] + [f"u{e}" for e in range(machines)] + [f"v{i}" for i in range(len(ra.jobs))]
    edges, resources = {}, []
    for e in range(machines):
        edges[f"s>u{e}"] = ("s", f"u{e}")
        resources.append(Resource(f"s>u{e}", PowerCost(1.0, float(p))))
    for i, allowed in enumerate(ra.jobs):
        for e in sorted(allowed):
            eid = f"u{e}>v{i}"
            edges[eid] = (f"u{e}", f"v{i}")
            resources.append(Resource(eid, PowerCost(0.0, 1.0)))
    graph = Graph(True, tuple(nodes), edges)
    requests = [Request(i, RoutingPair("s", f"v{i}", 1.0)) for i in range(len(ra.jobs))]
    return Instance(tuple(resources), tuple(requests), graph, name="restricted-assignment")


def assignment_route(assignment: Sequence[int]) -> List[frozenset]:
    return [frozenset({f"s>u{m}", f"u{m}>v{i}"}) for i, m in enumerate(assignment)]


# ---------------------------------------------------------------------------
# random families


def _log_uniform(rng: random.Random, lo: float = 0.1, hi: float = 10.0) -> float:
    return math.exp(rng.uniform(math.log(lo), math.log(hi)))


def random_cost(rng: random.Random, kind: str, alphas: Sequence[float] = ALPHAS, max_terms: int = 3):
    if kind == "power":
        return PowerCost(_log_uniform(rng), rng.choice(alphas))
    if kind == "dos":
        return DoSCost(_log_uniform(rng), _log_uniform(rng), rng.choice(alphas))
    if kind == "rep":
        k = rng.randint(1, max_terms)
        return REPCost(_log_uniform(rng), tuple((_log_uniform(rng), rng.choice(alphas)) for _ in range(k)))
    raise ValueError(f"unknown cost kind {kind!r}")


def _explicit(rng, m, n, max_replies, kind, alphas):
    ids = [f"r{k}" for k in range(m)]
    resources = [Resource(r, random_cost(rng, kind, alphas)) for r in ids]
    requests = []
    for i in range(n):
        k = rng.randint(1, max_replies)
        replies = []
        while len(replies) < k:
            p = frozenset(rng.sample(ids, rng.randint(1, min(3, m))))
            if p not in replies:
                replies.append(p)
            elif len(replies) >= 2 ** min(m, 3) - 1:
                break
        used = sorted(set().union(*replies))
        weights = {r: rng.uniform(1.0, 4.0) for r in used}
        requests.append(Request(i, ExplicitList(tuple(replies)), weights))
    return Instance(tuple(resources), tuple(requests))


def _routing(rng, nodes, n, max_edges, kind, alphas):
    names = [f"v{k}" for k in range(nodes)]
    pairs = [(a, b) for a in range(nodes) for b in range(a + 1, nodes)]
    chain = [(k, k + 1) for k in range(nodes - 1)]
    extra = [p for p in pairs if p not in chain]
    rng.shuffle(extra)
    chosen = chain + extra[: max(0, max_edges - len(chain))]
    edges = {f"e{k}": (names[a], names[b]) for k, (a, b) in enumerate(sorted(chosen))}
    graph = Graph(True, tuple(names), edges)
    resources = [Resource(e, random_cost(rng, kind, alphas)) for e in sorted(edges)]
    requests = []
    for i in range(n):
        a, b = sorted(rng.sample(range(nodes), 2))
        requests.append(Request(i, RoutingPair(names[a], names[b], float(rng.randint(1, 4)))))
    return Instance(tuple(resources), tuple(requests), graph)


def random_undirected_graph(rng: random.Random, nodes: int, max_edges: int) -> Graph:
    names = [f"v{k}" for k in range(nodes)]
    tree = [(rng.randrange(k), k) for k in range(1, nodes)]
    others = [(a, b) for a in range(nodes) for b in range(a + 1, nodes)]
    others = [p for p in others if p not in tree and (p[1], p[0]) not in tree]
    rng.shuffle(others)
    chosen = tree + others[: max(0, max_edges - len(tree))]
    edges = {f"e{k}": (names[a], names[b]) for k, (a, b) in enumerate(chosen)}
    return Graph(False, tuple(names), edges)


def _steiner(rng, nodes, n, max_edges, kind, alphas):
    graph = random_undirected_graph(rng, nodes, max_edges)
    resources = [Resource(e, random_cost(rng, kind, alphas)) for e in sorted(graph.edges)]
    requests = []
    for i in range(n):
        k = rng.randint(2, min(3, nodes))
        terms = frozenset(rng.sample(list(graph.nodes), k))
        requests.append(Request(i, SetConnectivity(terms, float(rng.randint(1, 4)))))
    return Instance(tuple(resources), tuple(requests), graph)


def random_instance(seed: int, family: str = "explicit", m: int = 4, n: int = 3, k: int = 3,
                    kind: str = "power", alphas: Sequence[float] = ALPHAS) -> Instance:
    """Reproducible random instance.

    ``explicit``: ``m`` resources, ``n`` requests with at most ``k`` replies.
    ``routing``: DAG on ``m`` nodes (a spanning chain guarantees paths) with at
    most ``k`` edges.  ``steiner``: connected undirected graph on ``m`` nodes
    with at most ``k`` edges.
    """
    rng = random.Random(seed)
    if family == "explicit":
        inst = _explicit(rng, m, n, k, kind, alphas)
    elif family == "routing":
        inst = _routing(rng, m, n, max(k, m - 1), kind, alphas)
    elif family == "steiner":
        inst = _steiner(rng, m, n, max(k, m - 1), kind, alphas)
    else:
        raise ValueError(f"unknown family {family!r}")
    return Instance(inst.resources, inst.requests, inst.graph, name=f"{family}-{kind}-{seed}")

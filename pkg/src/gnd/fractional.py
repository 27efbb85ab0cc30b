"""Discretized fractional primal-dual algorithm for the convex relaxation.

For each request the algorithm spends one unit of continuous time raising the
fraction on the oracle's current reply.  Instead of re-querying continuously
it holds the reply until its cost under live loads has grown by a factor
``1 + epsilon``; the crossing time is located by a bracketed root search, so
no fixed time step is involved.  All loads start at ``eta`` instead of zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from scipy.optimize import brentq

from gnd.instance import ExplicitList, Instance, Request, reply_cost
from gnd.online import PowerModel, power_model

DEFAULT_EPSILON = 0.01
ROOT_RTOL = 1e-10


def eta_formula(m: int, alpha: float, B: float, epsilon: float) -> float:
    return epsilon / (m ** (1 + alpha) * B)


def query_bound(alpha: float, m: int, N: int, B: float, eta: float, epsilon: float) -> float:
    """Per-request cap on oracle queries, ``log_{1+eps}`` of max/min reply cost."""
    ratio = alpha * m * N ** (alpha - 1) * B ** (alpha + 1) / eta ** (alpha - 1)
    return math.log(ratio) / math.log1p(epsilon)


def _scaling(model: PowerModel, instance: Instance) -> Tuple[float, float]:
    """Factor bringing every positive coefficient to >= 1, and the resulting B."""
    cs = [c.cost.c for c in model.copies if c.cost.c > 0]
    scale = 1.0 / min(cs) if cs else 1.0
    B = max([c * scale for c in cs] or [1.0])
    for req in instance.requests:
        for rid in req.candidates(instance.graph):
            B = max(B, req.weight(rid))
    return scale, B


def init_eta(instance: Instance, epsilon: float = DEFAULT_EPSILON) -> float:
    model = power_model(instance.resources)
    _, B = _scaling(model, instance)
    return eta_formula(len(model.copies), model.alpha_max, B, epsilon)


@dataclass
class FractionalReport:
    model: PowerModel
    epsilon: float
    eta: float
    scale: float
    B: float
    x: Dict[Tuple[int, frozenset], float] = field(default_factory=dict)
    loads: Dict[str, float] = field(default_factory=dict)
    queries: List[int] = field(default_factory=list)
    requeries: List[Tuple[int, float, float]] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.model.copies)

    @property
    def alpha(self) -> float:
        return self.model.alpha_max

    @property
    def primal(self) -> float:
        return math.fsum(self.model.power_cost(rid, x) for rid, x in self.loads.items())

    @property
    def initial(self) -> float:
        return math.fsum(self.model.power_cost(rid, self.eta) for rid in self.loads)

    @property
    def total_queries(self) -> int:
        return sum(self.queries)

    def coverage(self, i: int) -> float:
        return math.fsum(v for (j, _), v in self.x.items() if j == i)

    def support(self, i: int) -> Dict[frozenset, float]:
        return {p: v for (j, p), v in self.x.items() if j == i}

    def query_bound(self, n_requests: int) -> float:
        return query_bound(self.alpha, self.m, n_requests, self.B, self.eta, self.epsilon)

    def to_dict(self) -> dict:
        return {
            "primal": self.primal,
            "initial": self.initial,
            "epsilon": self.epsilon,
            "eta": self.eta,
            "B": self.B,
            "scale": self.scale,
            "queries": self.queries,
            "total_queries": self.total_queries,
            "supports": [
                {"request": i, "reply": sorted(p), "x": v}
                for (i, p), v in sorted(self.x.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1])))
            ],
            "loads": self.loads,
        }


class FractionalSolver:
    def __init__(self, instance: Instance, oracle, epsilon: float = DEFAULT_EPSILON,
                 eta: Optional[float] = None):
        if not 0 < epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        self.instance = instance
        self.graph = instance.graph
        self.oracle = oracle
        self.model = power_model(instance.resources)
        scale, B = _scaling(self.model, instance)
        if eta is None:
            eta = eta_formula(len(self.model.copies), self.model.alpha_max, B, epsilon)
        self.report = FractionalReport(self.model, epsilon, eta, scale, B)
        self.report.loads = {r.id: eta for r in instance.resources}

    def _gradient(self, rid: str, load: float, w: float) -> float:
        return math.fsum(
            c.cost.alpha * c.cost.c * load ** (c.cost.alpha - 1) * w
            for c in self.model.groups[rid]
            if c.cost.c > 0
        )

    def costs(self, request: Request) -> Dict[str, float]:
        loads = self.report.loads
        return {
            rid: self._gradient(rid, loads[rid], request.weight(rid))
            for rid in request.candidates(self.graph)
        }

    def _reply_cost_after(self, request: Request, reply, s: float) -> float:
        loads = self.report.loads
        return math.fsum(
            self._gradient(rid, loads[rid] + request.weight(rid) * s, request.weight(rid))
            for rid in reply
        )

    def step(self, request: Request) -> None:
        rep = self.report
        eps = rep.epsilon
        forced = isinstance(request.replies, ExplicitList) and len(request.replies.replies) == 1
        elapsed, queries = 0.0, 0
        prev: Optional[Tuple[frozenset, float]] = None
        while True:
            d = self.costs(request)
            if prev is not None:
                rep.requeries.append((request.index, prev[1], reply_cost(prev[0], d)))
            reply = self.oracle(request, d, self.graph).reply
            queries += 1
            base = reply_cost(reply, d)
            remaining = 1.0 - elapsed
            target = (1 + eps) * base
            if forced or base == 0 or self._reply_cost_after(request, reply, remaining) <= target:
                s, last = remaining, True
            else:
                s = brentq(
                    lambda t: self._reply_cost_after(request, reply, t) - target,
                    0.0, remaining, rtol=ROOT_RTOL, xtol=1e-300,
                )
                last = False
            key = (request.index, reply)
            rep.x[key] = rep.x.get(key, 0.0) + s
            for rid in reply:
                rep.loads[rid] += request.weight(rid) * s
            if last:
                break
            elapsed += s
            prev = (reply, base)
        rep.queries.append(queries)

    def run(self, requests) -> FractionalReport:
        for r in requests:
            self.step(r)
        return self.report


def run_fractional(instance: Instance, epsilon: float = DEFAULT_EPSILON, oracle=None,
                   eta: Optional[float] = None) -> FractionalReport:
    if oracle is None:
        from gnd.oracles import AutoOracle

        oracle = AutoOracle(instance)
    return FractionalSolver(instance, oracle, epsilon, eta).run(instance.requests)

"""Integral online algorithm and the DoS / REP pipelines built on it.

Every instance is first viewed as a weighted-power instance: each original
resource owns a group of power-cost copies that always carry the same load.
For power resources the group is the resource itself; a DoS resource becomes
a linear copy and a power copy; a REP resource becomes one DoS copy per term,
each split again.  Because copies of a resource co-occur in every reply, the
modified costs are summed per original resource and the original oracle is
queried unchanged.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from gnd.costs import (
    DoSCost,
    PowerCost,
    REPCost,
    q_value,
    reduce_dos_to_power,
    reduce_rep_to_dos,
)
from gnd.instance import Instance, Request, apply_reply

E = math.e
EXACT = "exact"
APPROX = "approx"


@dataclass(frozen=True)
class PowerCopy:
    id: str
    origin: str
    cost: PowerCost

    @property
    def linear(self) -> bool:
        return self.cost.alpha == 1


@dataclass(frozen=True)
class PowerModel:
    groups: Mapping[str, tuple]
    objective: Mapping[str, object]
    alpha_max: float
    q: float

    @property
    def copies(self) -> List[PowerCopy]:
        return [c for g in self.groups.values() for c in g]

    def power_cost(self, rid: str, x: float) -> float:
        return math.fsum(c.cost(x) for c in self.groups[rid])

    def split(self, loads: Mapping[str, float]) -> tuple:
        """``(L, H)``: cost on linear copies and on the remaining copies."""
        lin, rest = [], []
        for rid, group in self.groups.items():
            x = loads.get(rid, 0.0)
            for c in group:
                (lin if c.linear else rest).append(c.cost(x))
        return math.fsum(lin), math.fsum(rest)


def _dos_copies(rid: str, f: DoSCost) -> tuple:
    red = reduce_dos_to_power(rid, f)
    return tuple(PowerCopy(c.id, rid, c.cost) for c in red.copies)


def power_model(resources) -> PowerModel:
    groups, objective = {}, {}
    q = 0.0
    for r in resources:
        cost = r.cost
        if isinstance(cost, PowerCost):
            groups[r.id] = (PowerCopy(r.id, r.id, cost),)
        elif isinstance(cost, DoSCost):
            groups[r.id] = _dos_copies(r.id, cost)
            q = max(q, q_value(cost))
        elif isinstance(cost, REPCost):
            group = []
            for c in reduce_rep_to_dos(r.id, cost).copies:
                group.extend(PowerCopy(p.id, r.id, p.cost) for p in _dos_copies(c.id, c.cost))
                q = max(q, q_value(c.cost))
            groups[r.id] = tuple(group)
        else:
            raise TypeError(f"unsupported cost {cost!r}")
        objective[r.id] = cost
    alpha = max((c.cost.alpha for g in groups.values() for c in g), default=1.0)
    return PowerModel(groups, objective, alpha, q)


# ---------------------------------------------------------------------------
# configuration and modified costs


def rho_for(alpha_max: float, tau: float = 1.0, mode: str = APPROX) -> float:
    t = tau if mode == APPROX else 1.0
    return math.exp((alpha_max - 1) * math.log(E * t * alpha_max))


@dataclass(frozen=True)
class SolverConfig:
    rho: float
    alpha_max: float
    tau: float = 1.0
    mode: str = APPROX

    def __post_init__(self):
        if self.mode not in (EXACT, APPROX):
            raise ValueError(f"mode must be {EXACT!r} or {APPROX!r}")
        if self.alpha_max < 1 or self.tau < 1:
            raise ValueError("alpha_max and tau must be >= 1")
        floor = rho_for(self.alpha_max, 1.0, EXACT)
        if self.rho < floor * (1 - 1e-12):
            raise ValueError(f"rho={self.rho} is below (e*alpha)^(alpha-1)={floor}")

    @classmethod
    def create(cls, alpha_max: float, tau: float = 1.0, mode: str = APPROX) -> "SolverConfig":
        return cls(rho_for(alpha_max, tau, mode), alpha_max, tau, mode)

    @property
    def extra_scale(self) -> float:
        """``rho / e^alpha``, the weight on the per-request power term."""
        return self.rho / E**self.alpha_max


def modified_cost_exact(g: PowerCost, load: float, w: float, cfg: SolverConfig) -> float:
    if g.c == 0:
        return 0.0
    a = g.alpha
    return a * g.c * load ** (a - 1) * w + cfg.extra_scale * g.c * a * w**a


def modified_cost_approx(g: PowerCost, load: float, w: float, cfg: SolverConfig) -> float:
    if g.alpha == 1:
        return cfg.rho * g.c * w
    return modified_cost_exact(g, load, w, cfg)


# ---------------------------------------------------------------------------
# the solver


@dataclass
class StepRecord:
    index: int
    reply: tuple
    psi: Dict[str, float]
    oracle_cost: float
    psi_sum: float
    delta_power: float
    delta_modified: float
    delta_cost: float

    def to_dict(self) -> dict:
        return {
            "request": self.index,
            "reply": list(self.reply),
            "oracle_cost": self.oracle_cost,
            "psi_sum": self.psi_sum,
            "delta_power": self.delta_power,
            "delta_modified": self.delta_modified,
            "delta_cost": self.delta_cost,
            "psi": self.psi,
        }


@dataclass
class RunTrace:
    cfg: SolverConfig
    model: PowerModel
    steps: List[StepRecord] = field(default_factory=list)
    loads: Dict[str, float] = field(default_factory=dict)

    @property
    def replies(self) -> List[frozenset]:
        return [frozenset(s.reply) for s in self.steps]

    @property
    def L(self) -> float:
        return self.model.split(self.loads)[0]

    @property
    def H(self) -> float:
        return self.model.split(self.loads)[1]

    @property
    def power_cost(self) -> float:
        return math.fsum(self.model.split(self.loads))

    @property
    def cost(self) -> float:
        """Objective under the original cost functions."""
        return math.fsum(f(self.loads[rid]) for rid, f in self.model.objective.items())

    def summary(self) -> dict:
        L, H = self.model.split(self.loads)
        return {
            "requests": len(self.steps),
            "cost": self.cost,
            "power_cost": L + H,
            "L": L,
            "H": H,
            "rho": self.cfg.rho,
            "alpha": self.cfg.alpha_max,
            "tau": self.cfg.tau,
            "mode": self.cfg.mode,
            "q": self.model.q,
        }


class OnlineSolver:
    """Commits one reply per arriving request via :meth:`step`.

    ``instance`` supplies resources and graph; its request list is not read,
    so requests may be streamed in (the adaptive adversary does this).
    """

    def __init__(self, instance: Instance, oracle, cfg: Optional[SolverConfig] = None,
                 mode: str = APPROX, tau: Optional[float] = None):
        self.instance = instance
        self.graph = instance.graph
        self.oracle = oracle
        self.model = power_model(instance.resources)
        if cfg is None:
            cfg = SolverConfig.create(self.model.alpha_max, tau or oracle.tau, mode)
        elif cfg.alpha_max < self.model.alpha_max:
            raise ValueError("cfg.alpha_max is below the instance's largest exponent")
        self.cfg = cfg
        self._modified = modified_cost_exact if cfg.mode == EXACT else modified_cost_approx
        self.loads = instance.zero_loads()
        self.trace = RunTrace(cfg, self.model, loads=self.loads)

    def modified_costs(self, request: Request) -> Dict[str, float]:
        out = {}
        for rid in request.candidates(self.graph):
            w = request.weight(rid)
            x = self.loads[rid]
            out[rid] = math.fsum(self._modified(c.cost, x, w, self.cfg) for c in self.model.groups[rid])
        return out

    def step(self, request: Request) -> frozenset:
        psi = self.modified_costs(request)
        ans = self.oracle(request, psi, self.graph)
        reply = ans.reply
        before = self.loads
        after = apply_reply(before, request, reply, self.graph)
        lin, rest, dcost = [], [], []
        for rid in reply:
            x0, x1 = before[rid], after[rid]
            for c in self.model.groups[rid]:
                (lin if c.linear else rest).append(c.cost(x1) - c.cost(x0))
            f = self.model.objective[rid]
            dcost.append(f(x1) - f(x0))
        dL, dH = math.fsum(lin), math.fsum(rest)
        rec = StepRecord(
            index=request.index,
            reply=tuple(sorted(reply)),
            psi=psi,
            oracle_cost=ans.cost,
            psi_sum=math.fsum(psi[e] for e in reply),
            delta_power=dL + dH,
            delta_modified=E * self.cfg.rho * dL + dH,
            delta_cost=math.fsum(dcost),
        )
        self.loads.update(after)
        self.trace.steps.append(rec)
        return reply

    def run(self, requests) -> RunTrace:
        for r in requests:
            self.step(r)
        return self.trace


def _default_oracle(instance, oracle):
    if oracle is None:
        from gnd.oracles import AutoOracle

        return AutoOracle(instance)
    return oracle


def _require(instance: Instance, kinds: tuple, what: str) -> None:
    bad = [r.id for r in instance.resources if not isinstance(r.cost, kinds)]
    if bad:
        raise TypeError(f"{what} needs {'/'.join(k.__name__ for k in kinds)} resources; got {bad[:5]}")


def run_power(instance: Instance, cfg: Optional[SolverConfig] = None, oracle=None,
              mode: str = APPROX) -> RunTrace:
    _require(instance, (PowerCost,), "run_power")
    oracle = _default_oracle(instance, oracle)
    return OnlineSolver(instance, oracle, cfg, mode=mode).run(instance.requests)


def run_dos(instance: Instance, tau: Optional[float] = None, oracle=None,
            mode: str = APPROX) -> RunTrace:
    """DoS pipeline; power resources pass through as zero-idle-cost DoS."""
    _require(instance, (DoSCost, PowerCost), "run_dos")
    oracle = _default_oracle(instance, oracle)
    return OnlineSolver(instance, oracle, mode=mode, tau=tau).run(instance.requests)


def run_rep(instance: Instance, tau: Optional[float] = None, oracle=None,
            mode: str = APPROX) -> RunTrace:
    _require(instance, (REPCost, DoSCost, PowerCost), "run_rep")
    oracle = _default_oracle(instance, oracle)
    return OnlineSolver(instance, oracle, mode=mode, tau=tau).run(instance.requests)


def replay(instance: Instance, replies) -> Dict[str, float]:
    loads = instance.zero_loads()
    for req, p in zip(instance.requests, replies):
        loads = apply_reply(loads, req, p, instance.graph)
    return loads


# ---------------------------------------------------------------------------
# export


def write_trace_jsonl(trace: RunTrace, path) -> None:
    with open(path, "w") as fh:
        for s in trace.steps:
            fh.write(json.dumps(s.to_dict(), sort_keys=True) + "\n")
        summary = dict(trace.summary(), record="summary", loads=trace.loads)
        fh.write(json.dumps(summary, sort_keys=True) + "\n")


def write_trace_csv(trace: RunTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["request", "marginal_cost", "cumulative_cost"])
        total = 0.0
        for s in trace.steps:
            total += s.delta_cost
            w.writerow([s.index, repr(s.delta_cost), repr(total)])

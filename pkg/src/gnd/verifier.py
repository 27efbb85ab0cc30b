"""Ground truth and dual-fitting certificates.

Three dual programs are handled, all over the power-cost view of an instance:

* ``"D"``   the dual of the plain convex relaxation;
* ``"D'"``  the dual of the strengthened relaxation, one dummy linear
  resource per power copy;
* ``"D''"`` as above but dummies only for copies with exponent > 1.

Dummy resources live only here; the solvers never see them.  Reply
constraints are checked against the inclusion-minimal replies produced by
:func:`gnd.oracles.enumerate_replies`, which is sound because every term on
the left-hand side is nonnegative.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from gnd.bounds import dual_opt_factor, fractional_bound, integral_bound
from gnd.errors import BudgetExceeded, RequiresExactOracle
from gnd.fractional import FractionalReport
from gnd.instance import Instance
from gnd.online import APPROX, E, PowerModel, RunTrace, power_model
from gnd.oracles import enumerate_replies

D, D1, D2 = "D", "D'", "D''"
FEAS_TOL = 1e-9
CHAIN_TOL = 1e-7
DEFAULT_BUDGET = 10**6


# ---------------------------------------------------------------------------
# offline optimum


def brute_force_opt(
    instance: Instance,
    costs: Optional[Mapping[str, Callable[[float], float]]] = None,
    budget: int = DEFAULT_BUDGET,
) -> Tuple[List[frozenset], float]:
    """Exact offline optimum by enumerating every reply combination."""
    options = [enumerate_replies(r, instance.graph) for r in instance.requests]
    size = 1
    for opts in options:
        size *= len(opts)
        if size > budget:
            raise BudgetExceeded(f"more than {budget} reply combinations")
    if size == 0:
        raise BudgetExceeded("some request has no admissible reply")
    if costs is None:
        costs = {r.id: r.cost for r in instance.resources}
    weights = [
        {rid: req.weight(rid) for rid in set().union(*opts)} for req, opts in zip(instance.requests, options)
    ]
    loads = {rid: 0.0 for rid in instance.ids}
    best: List = [math.inf, None]
    chosen: List[frozenset] = []

    def rec(i: int) -> None:
        if i == len(options):
            val = math.fsum(costs[rid](x) for rid, x in loads.items() if x)
            if val < best[0]:
                best[0], best[1] = val, list(chosen)
            return
        w = weights[i]
        for p in options[i]:
            saved = [(rid, loads[rid]) for rid in p]
            for rid in p:
                loads[rid] += w[rid]
            chosen.append(p)
            rec(i + 1)
            chosen.pop()
            for rid, v in saved:
                loads[rid] = v

    rec(0)
    return best[1], best[0]


def power_opt(instance: Instance, budget: int = DEFAULT_BUDGET) -> float:
    """Optimum of the power-cost view (the reduced instance for DoS/REP)."""
    model = power_model(instance.resources)
    costs = {rid: (lambda x, rid=rid: model.power_cost(rid, x)) for rid in model.groups}
    return brute_force_opt(instance, costs, budget)[1]


# ---------------------------------------------------------------------------
# dual programs


@dataclass(frozen=True)
class DualResource:
    id: str
    origin: str
    c: float
    alpha: float
    dummy_of: Optional[Tuple[float, float]] = None  # (c, alpha) of the shadowed copy

    @property
    def beta(self) -> Optional[float]:
        # None stands for the infinite conjugate of a linear resource
        if self.alpha == 1:
            return None
        return self.alpha / (self.alpha - 1)


class DualProgram:
    def __init__(self, instance: Instance, which: str = D, alpha_max: Optional[float] = None,
                 model: Optional[PowerModel] = None, max_edges: int = 16):
        if which not in (D, D1, D2):
            raise ValueError(f"unknown dual program {which!r}")
        self.instance = instance
        self.which = which
        self.model = model or power_model(instance.resources)
        self.alpha = alpha_max if alpha_max is not None else self.model.alpha_max
        groups: Dict[str, List[DualResource]] = {}
        for rid, copies in self.model.groups.items():
            g = []
            for c in copies:
                g.append(DualResource(c.id, rid, c.cost.c, c.cost.alpha))
                if which == D1 or (which == D2 and c.cost.alpha > 1):
                    g.append(DualResource(f"{c.id}:dummy", rid, 1.0, 1.0, (c.cost.c, c.cost.alpha)))
            groups[rid] = g
        self.groups = groups
        self.resources = {r.id: r for g in groups.values() for r in g}
        self._replies: Dict[int, List[frozenset]] = {}
        self.max_edges = max_edges

    @property
    def box(self) -> List[str]:
        return [r.id for r in self.resources.values() if r.alpha == 1]

    def weight(self, request, r: DualResource) -> float:
        w = request.weight(r.origin)
        if r.dummy_of is None:
            return w
        c, a = r.dummy_of
        return c * a / E**self.alpha * w**a

    def replies(self, i: int) -> List[frozenset]:
        if i not in self._replies:
            req = self.instance.requests[i]
            self._replies[i] = enumerate_replies(req, self.instance.graph, self.max_edges)
        return self._replies[i]

    def resource_costs(self, i: int, z: Mapping[str, float]) -> Dict[str, float]:
        """Per original resource, the constraint coefficient sum under ``z``."""
        req = self.instance.requests[i]
        cand = set(req.candidates(self.instance.graph))
        return {
            rid: math.fsum(self.weight(req, r) * r.c * r.alpha * z.get(r.id, 0.0) for r in group)
            for rid, group in self.groups.items()
            if rid in cand
        }

    def primal_objective(self, x: Mapping[Tuple[int, frozenset], float]) -> float:
        """Objective at a primal point ``x[(request, original reply)]`` (nonzeros only)."""
        loads = {rid: 0.0 for rid in self.resources}
        for (i, p), v in x.items():
            req = self.instance.requests[i]
            for e in p:
                for r in self.groups[e]:
                    loads[r.id] += self.weight(req, r) * v
        return math.fsum(
            r.c * loads[r.id] ** r.alpha for r in self.resources.values() if loads[r.id] > 0
        )


@dataclass
class DualSolution:
    y: Dict[int, float]
    z: Dict[str, float]
    beta: Dict[str, Optional[float]]
    which: str

    def scaled(self, lam: float) -> "DualSolution":
        return DualSolution(
            {i: lam * v for i, v in self.y.items()},
            {r: lam * v for r, v in self.z.items()},
            dict(self.beta),
            self.which,
        )

    def to_dict(self) -> dict:
        return {
            "program": self.which,
            "y": {str(i): v for i, v in sorted(self.y.items())},
            "z": dict(sorted(self.z.items())),
            "beta": dict(sorted(self.beta.items())),
        }


def _min_reply(program: DualProgram, i: int, z: Mapping[str, float], oracle=None) -> float:
    d = program.resource_costs(i, z)
    try:
        replies = program.replies(i)
    except BudgetExceeded:
        if oracle is None or getattr(oracle, "tau", None) != 1:
            raise RequiresExactOracle(
                f"request {i}: reply collection too large to enumerate and no exact oracle"
            ) from None
        req = program.instance.requests[i]
        return oracle(req, d, program.instance.graph).cost
    return min(math.fsum(d[e] for e in p) for p in replies)


def _fit_y(program: DualProgram, z: Dict[str, float], oracle=None) -> DualSolution:
    y = {i: _min_reply(program, i, z, oracle) for i in range(len(program.instance.requests))}
    beta = {rid: r.beta for rid, r in program.resources.items()}
    return DualSolution(y, z, beta, program.which)


def build_dual_integral(trace: RunTrace, instance: Instance, oracle=None,
                        program: Optional[DualProgram] = None) -> Tuple[DualSolution, DualProgram]:
    """Dual fitted to the final loads of an integral run."""
    cfg = trace.cfg
    which = D2 if cfg.mode == APPROX else D1
    if program is None:
        program = DualProgram(instance, which, cfg.alpha_max, trace.model)
    z = {}
    for rid, group in program.groups.items():
        A = trace.loads[rid]
        for r in group:
            if r.dummy_of is not None or (cfg.mode == APPROX and r.alpha == 1):
                z[r.id] = 1.0
            else:
                z[r.id] = A ** (r.alpha - 1) / cfg.rho
    return _fit_y(program, z, oracle), program


def default_delta(alpha: float, epsilon: float = 0.0) -> float:
    return (1.0 / (alpha * (1 + epsilon))) ** (alpha - 1)


def build_dual_fractional(report: FractionalReport, instance: Instance, delta: Optional[float] = None,
                          oracle=None) -> Tuple[DualSolution, DualProgram]:
    if delta is None:
        delta = default_delta(report.alpha, report.epsilon)
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    program = DualProgram(instance, D, report.alpha, report.model)
    z = {}
    for rid, group in program.groups.items():
        for r in group:
            z[r.id] = delta * report.loads[rid] ** (r.alpha - 1)
    return _fit_y(program, z, oracle), program


def dual_objective(dual: DualSolution, program: DualProgram) -> float:
    zterm = []
    for rid, r in program.resources.items():
        beta = r.beta
        if beta is None:
            continue
        zterm.append(r.c * r.alpha / beta * dual.z.get(rid, 0.0) ** beta)
    return math.fsum(dual.y.values()) - math.fsum(zterm)


@dataclass
class Verdict:
    passed: bool
    violations: List[str] = field(default_factory=list)


def check_dual_feasible(dual: DualSolution, program: DualProgram, tol: float = FEAS_TOL) -> Verdict:
    bad = []
    for rid, v in dual.z.items():
        if v < 0:
            bad.append(f"z[{rid}] = {v} < 0")
    for rid in program.box:
        v = dual.z.get(rid, 0.0)
        if v > 1 + tol:
            bad.append(f"z[{rid}] = {v} > 1")
    for i, yi in dual.y.items():
        if yi < 0:
            bad.append(f"y[{i}] = {yi} < 0")
        d = program.resource_costs(i, dual.z)
        for p in program.replies(i):
            lhs = math.fsum(d[e] for e in p)
            if lhs < yi - tol * max(abs(yi), abs(lhs), 1e-300):
                bad.append(f"request {i}, reply {sorted(p)}: {lhs} < y = {yi}")
    return Verdict(not bad, bad)


# ---------------------------------------------------------------------------
# run certificates


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    tol: float = CHAIN_TOL

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + self.tol * max(1.0, abs(self.lhs), abs(self.rhs))

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "passed": self.passed}


@dataclass
class Certificate:
    primal: float
    dual: float
    opt: Optional[float]
    claimed_ratio: float
    checks: List[Check]
    feasibility: Verdict
    dual_solution: Optional[DualSolution] = None

    @property
    def passed(self) -> bool:
        return self.feasibility.passed and all(c.passed for c in self.checks)

    @property
    def ratio(self) -> Optional[float]:
        if self.opt is None:
            return None
        if self.opt == 0:
            return 1.0 if self.primal == 0 else math.inf
        return self.primal / self.opt

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "primal": self.primal,
            "dual_objective": self.dual,
            "opt": self.opt,
            "ratio": self.ratio,
            "claimed_ratio": self.claimed_ratio,
            "dual_feasible": self.feasibility.passed,
            "violations": self.feasibility.violations[:20],
            "checks": [c.to_dict() for c in self.checks],
        }

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


def strengthened_primal(trace: RunTrace, program: DualProgram) -> float:
    x = {(i, p): 1.0 for i, p in enumerate(trace.replies)}
    return program.primal_objective(x)


def certify_run(trace: RunTrace, instance: Instance, opt: Optional[float] = None,
                oracle=None, compute_opt: bool = True) -> Certificate:
    """Dual-fitting certificate for an integral run.

    ``opt`` is the optimum of the power-cost view; it is brute-forced when
    omitted and ``compute_opt`` holds (skipped silently past the budget).
    """
    cfg = trace.cfg
    a, tau = cfg.alpha_max, cfg.tau
    dual, program = build_dual_integral(trace, instance, oracle)
    feas = check_dual_feasible(dual, program)
    dval = dual_objective(dual, program)
    L, H = trace.model.split(trace.loads)
    checks = []
    if cfg.mode == APPROX:
        checks.append(Check("primal_vs_dual", L / tau + H / (E * tau * a) ** a, dval))
    else:
        checks.append(Check("primal_vs_dual", (L + H) / (E * a) ** a, dval))
    checks.append(Check("weak_duality", dval, strengthened_primal(trace, program)))
    if opt is None and compute_opt:
        try:
            opt = power_opt(instance)
        except BudgetExceeded:
            opt = None
    claimed = integral_bound(a, tau if cfg.mode == APPROX else 1.0)
    if opt is not None:
        checks.append(Check("dual_vs_opt", dval, dual_opt_factor(a) * opt))
        checks.append(Check("total_bound", L + H, claimed * opt))
        if cfg.mode == APPROX:
            checks.append(Check("L_bound", L, 2 * tau * opt))
            checks.append(Check("H_bound", H, claimed * opt))
    return Certificate(L + H, dval, opt, claimed, checks, feas, dual)


def certify_fractional(report: FractionalReport, instance: Instance, opt: Optional[float] = None,
                       oracle=None) -> Certificate:
    a, eps = report.alpha, report.epsilon
    delta = default_delta(a, eps)
    dual, program = build_dual_fractional(report, instance, delta, oracle)
    feas = check_dual_feasible(dual, program)
    dval = dual_objective(dual, program)
    P, I = report.primal, report.initial
    zcoef = 0.0 if a == 1 else delta ** (a / (a - 1)) * (a - 1)
    checks = [Check("primal_vs_dual", (delta / (1 + eps) - zcoef) * P - I, dval)]
    if opt is None:
        try:
            opt = power_opt(instance)
        except BudgetExceeded:
            opt = None
    claimed = fractional_bound(a, eps)
    if opt is not None:
        checks.append(Check("weak_duality", dval, opt))
        checks.append(Check("total_bound", P, claimed * opt))
    n = len(instance.requests)
    qb = report.query_bound(n) if n else math.inf
    for i, k in enumerate(report.queries):
        checks.append(Check(f"queries[{i}]", k, 1 + qb, tol=0.0))
    return Certificate(P, dval, opt, claimed, checks, feas, dual)


# ---------------------------------------------------------------------------
# scalar inequalities used by the analysis


def power_split_gap(X: float, Y: float, a: float) -> Tuple[float, float]:
    """``((X+Y)^(a-1), e X^(a-1) + a^(a-1) Y^(a-1))``."""
    return (X + Y) ** (a - 1), E * X ** (a - 1) + a ** (a - 1) * Y ** (a - 1)


def _pow(x: float, a: float) -> float:
    try:
        return x**a
    except OverflowError:
        return math.inf


def young_gap(A: float, B: float, a: float) -> Tuple[float, float]:
    b = a / (a - 1)
    return A * B, _pow(A, a) / a + _pow(B, b) / b


def inequality_suite(samples: int = 10**5, seed: int = 0, lo: float = 0.0, hi: float = 1e3,
                     alpha_range=(1.0, 6.0), rel: float = 1e-12) -> List[dict]:
    rng = random.Random(seed)
    out = []
    for name, fn, amin in (("power_split", power_split_gap, alpha_range[0]),
                           ("young", young_gap, None)):
        worst, fails = 0.0, 0
        for _ in range(samples):
            u, v = rng.uniform(lo, hi), rng.uniform(lo, hi)
            if amin is None:
                a = rng.uniform(alpha_range[0], alpha_range[1])
                while a == 1:
                    a = rng.uniform(alpha_range[0], alpha_range[1])
            else:
                a = rng.uniform(amin, alpha_range[1])
            lhs, rhs = fn(u, v, a)
            if lhs > rhs * (1 + rel):
                fails += 1
            if rhs > 0:
                worst = max(worst, lhs / rhs)
        out.append({"name": name, "samples": samples, "violations": fails, "max_ratio": worst,
                    "passed": fails == 0})
    return out

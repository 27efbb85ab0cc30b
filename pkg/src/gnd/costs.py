"""Cost functions: (dis)economies-of-scale, weighted power, real-exponent
polynomials, and the reductions between them.

All cost objects are frozen dataclasses and callable on a load ``x >= 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

REL_TOL = 1e-9


def _check_alpha(alpha: float) -> None:
    if not (math.isfinite(alpha) and alpha >= 1):
        raise ValueError(f"exponent must be >= 1, got {alpha!r}")


@dataclass(frozen=True)
class DoSCost:
    """``0`` at zero load, ``sigma + xi * x**alpha`` otherwise."""

    sigma: float
    xi: float
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be >= 0, got {self.sigma!r}")
        if not (math.isfinite(self.xi) and self.xi > 0):
            raise ValueError(f"xi must be > 0, got {self.xi!r}")
        _check_alpha(self.alpha)

    @property
    def q(self) -> float:
        return q_value(self)

    def __call__(self, x: float) -> float:
        return eval_dos(self, x)


@dataclass(frozen=True)
class PowerCost:
    c: float
    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c >= 0):
            raise ValueError(f"c must be >= 0, got {self.c!r}")
        _check_alpha(self.alpha)

    @property
    def linear(self) -> bool:
        return self.alpha == 1

    def __call__(self, x: float) -> float:
        return eval_power(self, x)


@dataclass(frozen=True)
class REPCost:
    sigma: float
    terms: tuple  # ((xi, alpha), ...)

    def __post_init__(self):
        terms = tuple((float(xi), float(a)) for xi, a in self.terms)
        object.__setattr__(self, "terms", terms)
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be >= 0, got {self.sigma!r}")
        if not terms:
            raise ValueError("REP cost needs at least one term")
        for xi, a in terms:
            if not (math.isfinite(xi) and xi > 0):
                raise ValueError(f"term coefficient must be > 0, got {xi!r}")
            _check_alpha(a)

    def __call__(self, x: float) -> float:
        return eval_rep(self, x)


CostFunction = Union[DoSCost, PowerCost, REPCost]


def _check_load(x: float) -> None:
    if x < 0 or math.isnan(x):
        raise ValueError(f"load must be >= 0, got {x!r}")


def eval_dos(f: DoSCost, x: float) -> float:
    _check_load(x)
    if x == 0:
        return 0.0
    return f.sigma + f.xi * x**f.alpha


def eval_power(g: PowerCost, x: float) -> float:
    _check_load(x)
    if g.c == 0 or x == 0:
        return 0.0
    return g.c * x**g.alpha


def eval_rep(r: REPCost, x: float) -> float:
    _check_load(x)
    if x == 0:
        return 0.0
    return r.sigma + math.fsum(xi * x**a for xi, a in r.terms)


def q_value(f: DoSCost) -> float:
    """Crossover load where the idle cost equals the speed-scaling term."""
    if f.sigma == 0:
        return 0.0
    return (f.sigma / f.xi) ** (1.0 / f.alpha)


def linear_coefficient(f: DoSCost) -> float:
    # sigma == 0 gives q == 0; the linear term is dropped even when alpha == 1
    # so that zero-idle resources reduce to exactly their power part.
    q = q_value(f)
    if q == 0:
        return 0.0
    return f.xi * q ** (f.alpha - 1)


def h_value(f: DoSCost, x: float) -> float:
    """Convex surrogate ``xi q^(alpha-1) x + xi x^alpha``."""
    _check_load(x)
    return linear_coefficient(f) * x + f.xi * x**f.alpha


# ---------------------------------------------------------------------------
# reductions

LINEAR_COPY = "linear"
POWER_COPY = "power"
REP_COPY = "rep"


@dataclass(frozen=True)
class Copy:
    id: str
    cost: CostFunction
    role: str


@dataclass(frozen=True)
class ReductionMap:
    origin: str
    copies: tuple

    def __post_init__(self):
        if not self.copies:
            raise ValueError("a reduction must produce at least one copy")

    def total(self, x: float) -> float:
        return math.fsum(c.cost(x) for c in self.copies)


def reduce_dos_to_power(rid: str, f: DoSCost) -> ReductionMap:
    lin = Copy(f"{rid}:1", PowerCost(linear_coefficient(f), 1.0), LINEAR_COPY)
    pw = Copy(f"{rid}:a", PowerCost(f.xi, f.alpha), POWER_COPY)
    return ReductionMap(rid, (lin, pw))


def rep_ratio(sigma: float, xi: float, alpha: float) -> float:
    if sigma == 0:
        return 0.0
    return (sigma / xi) ** (1.0 / alpha)


def rep_q(r: REPCost) -> float:
    """Smallest crossover ratio over the terms; this is the per-resource part of Q."""
    return min(rep_ratio(r.sigma, xi, a) for xi, a in r.terms)


def reduce_rep_to_dos(rid: str, r: REPCost) -> ReductionMap:
    ratios = [rep_ratio(r.sigma, xi, a) for xi, a in r.terms]
    best = min(range(len(ratios)), key=lambda j: (ratios[j], j))
    copies = []
    for j, (xi, a) in enumerate(r.terms):
        sigma = r.sigma if j == best else 0.0
        copies.append(Copy(f"{rid}:j{j}", DoSCost(sigma, xi, a), REP_COPY))
    return ReductionMap(rid, tuple(copies))


def _leq(a: float, b: float, rel: float = REL_TOL) -> bool:
    return a <= b + rel * max(abs(a), abs(b))


def sandwich_terms(f: DoSCost, x: float) -> tuple:
    """Return ``(h/2, f, upper)`` for the two-sided bound at load ``x``."""
    if x != 0 and x < 1:
        raise ValueError(f"sandwich bound needs x == 0 or x >= 1, got {x!r}")
    q = q_value(f)
    upper = max(q, 1.0) * linear_coefficient(f) * x + f.xi * x**f.alpha if x else 0.0
    return 0.5 * h_value(f, x), eval_dos(f, x), upper


def verify_sandwich(f: DoSCost, xs: Iterable[float], rel: float = REL_TOL) -> bool:
    ok = True
    for x in xs:
        lo, mid, hi = sandwich_terms(f, x)
        ok = ok and _leq(lo, mid, rel) and _leq(mid, hi, rel)
    return ok


# ---------------------------------------------------------------------------
# serialization


def cost_to_dict(cost: CostFunction) -> dict:
    if isinstance(cost, DoSCost):
        return {"kind": "dos", "sigma": cost.sigma, "xi": cost.xi, "alpha": cost.alpha}
    if isinstance(cost, PowerCost):
        return {"kind": "power", "c": cost.c, "alpha": cost.alpha}
    if isinstance(cost, REPCost):
        return {
            "kind": "rep",
            "sigma": cost.sigma,
            "terms": [{"xi": xi, "alpha": a} for xi, a in cost.terms],
        }
    raise TypeError(f"not a cost function: {cost!r}")


def cost_from_dict(d: dict) -> CostFunction:
    kind = d.get("kind")
    if kind == "dos":
        return DoSCost(float(d["sigma"]), float(d["xi"]), float(d["alpha"]))
    if kind == "power":
        return PowerCost(float(d["c"]), float(d["alpha"]))
    if kind == "rep":
        terms: Sequence = d["terms"]
        return REPCost(float(d["sigma"]), tuple((t["xi"], t["alpha"]) for t in terms))
    raise ValueError(f"unknown cost kind {kind!r}")

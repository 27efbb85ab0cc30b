import math

import pytest
from hypothesis import given, settings, strategies as st

from gnd.adversary import TreeAdversary, random_instance
from gnd.costs import DoSCost, PowerCost, REPCost
from gnd.errors import NoPath
from gnd.instance import Graph, Instance, Request, Resource, RoutingPair
from gnd.online import (
    EXACT,
    OnlineSolver,
    SolverConfig,
    modified_cost_approx,
    modified_cost_exact,
    replay,
    rho_for,
    run_dos,
    run_power,
    run_rep,
    write_trace_csv,
    write_trace_jsonl,
)
from gnd.oracles import ExhaustiveOracle, ShortestPathOracle
from gnd.verifier import brute_force_opt

from conftest import forced_instance, parallel_graph_instance, parallel_instance

E = math.e


def test_modified_cost_exact_values():
    cfg = SolverConfig(2 * E, 2.0)
    assert modified_cost_exact(PowerCost(1, 2), 3, 2, cfg) == pytest.approx(12 + 16 / E, rel=1e-14)
    assert modified_cost_exact(PowerCost(1, 2), 3, 2, cfg) == pytest.approx(17.886, abs=5e-4)
    rho = 20.0
    cfg = SolverConfig(rho, 2.0)
    assert modified_cost_exact(PowerCost(1, 1), 0, 1, cfg) == pytest.approx(1 + rho / E**2, rel=1e-14)
    assert modified_cost_exact(PowerCost(0, 3), 5, 2, cfg) == 0


def test_modified_cost_approx_values():
    cfg = SolverConfig(5.0, 1.0)
    assert modified_cost_approx(PowerCost(3, 1), 7, 2, cfg) == 30
    assert modified_cost_approx(PowerCost(0, 1), 7, 2, cfg) == 0
    cfg2 = SolverConfig(30.0, 2.0)
    g = PowerCost(1.5, 2)
    assert modified_cost_approx(g, 2.0, 3.0, cfg2) == modified_cost_exact(g, 2.0, 3.0, cfg2)


def test_rho_choices():
    assert rho_for(2, 1, EXACT) == pytest.approx(2 * E, rel=1e-15)
    assert rho_for(2, 2) == pytest.approx(4 * E, rel=1e-15)
    assert rho_for(1, 3) == 1
    with pytest.raises(ValueError):
        SolverConfig(1.0, 2.0)


def test_forced_reply():
    inst = forced_instance(PowerCost(1, 2), n=2)
    trace = run_power(inst)
    assert trace.loads == {"e": 2}
    assert trace.cost == 4


def test_empty_stream():
    trace = run_power(Instance((Resource("e", PowerCost(1, 2)),), ()))
    assert trace.cost == 0 and trace.steps == []


@pytest.mark.parametrize("make", [parallel_instance, parallel_graph_instance])
def test_parallel_routes_alternate(make):
    inst = make()
    trace = run_power(inst)
    first, second = trace.steps
    assert first.psi["a"] == first.psi["b"] == pytest.approx(4 / E, rel=1e-14)
    assert first.reply == ("a",)
    assert second.psi["a"] == pytest.approx(2 + 4 / E, rel=1e-14)
    assert second.reply == ("b",)
    assert trace.cost == 2


def test_unreachable_sink():
    g = Graph(True, ("s", "t"), {"ts": ("t", "s")})
    inst = Instance((Resource("ts", PowerCost(1, 1)),), (Request(0, RoutingPair("s", "t")),), g)
    with pytest.raises(NoPath):
        run_power(inst)


def test_dos_forced():
    trace = run_dos(forced_instance(DoSCost(4, 1, 2)))
    assert trace.loads == {"e": 1} and trace.cost == 5
    # power view: h(1) = 2 + 1
    assert trace.power_cost == 3


def test_rep_forced():
    assert run_rep(forced_instance(REPCost(1, ((1, 2),)))).cost == 2
    assert run_rep(forced_instance(REPCost(1, ((1, 2), (100, 2))))).cost == 102


def test_run_power_rejects_other_costs():
    with pytest.raises(TypeError):
        run_power(forced_instance(DoSCost(1, 1, 2)))


def _as_dos(inst, sigma=0.0):
    res = tuple(Resource(r.id, DoSCost(sigma, r.cost.c, r.cost.alpha)) for r in inst.resources)
    return Instance(res, inst.requests, inst.graph)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_zero_startup_dos_matches_power(seed):
    inst = random_instance(seed, "explicit", m=5, n=4, k=3)
    a, b = run_power(inst), run_dos(_as_dos(inst))
    assert a.replies == b.replies
    assert a.cost == pytest.approx(b.cost, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_single_term_rep_matches_dos(seed):
    inst = random_instance(seed, "explicit", m=5, n=4, k=3, kind="dos")
    rep = Instance(
        tuple(Resource(r.id, REPCost(r.cost.sigma, ((r.cost.xi, r.cost.alpha),))) for r in inst.resources),
        inst.requests,
    )
    a, b = run_dos(inst), run_rep(rep)
    assert a.replies == b.replies and a.cost == b.cost


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(-3, 3))
def test_scaling_all_costs_keeps_replies(seed, k):
    inst = random_instance(seed, "explicit", m=5, n=4, k=3)
    lam = 2.0**k
    scaled = Instance(
        tuple(Resource(r.id, PowerCost(lam * r.cost.c, r.cost.alpha)) for r in inst.resources),
        inst.requests,
    )
    a, b = run_power(inst), run_power(scaled)
    assert a.replies == b.replies
    assert b.cost == pytest.approx(lam * a.cost, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_loads_replay_and_monotone(seed):
    inst = random_instance(seed, "routing", m=6, n=4, k=9)
    solver = OnlineSolver(inst, ShortestPathOracle())
    prev = dict(solver.loads)
    for req in inst.requests:
        solver.step(req)
        assert all(solver.loads[e] >= prev[e] for e in prev)
        prev = dict(solver.loads)
    assert replay(inst, solver.trace.replies) == solver.loads
    total = solver.trace.cost
    assert total == pytest.approx(math.fsum(s.delta_cost for s in solver.trace.steps), rel=1e-12)


def test_modified_increment_dominates_power_increment():
    for seed in range(30):
        trace = run_power(random_instance(seed, "explicit", m=6, n=5, k=3))
        for s in trace.steps:
            assert s.delta_modified >= s.delta_power * (1 - 1e-12)


def test_bound_on_small_instances():
    from gnd.bounds import integral_bound

    for seed in range(40):
        inst = random_instance(seed, "explicit", m=5, n=4, k=3)
        trace = run_power(inst)
        _, opt = brute_force_opt(inst)
        assert trace.cost <= integral_bound(trace.cfg.alpha_max) * opt


def test_tree_online_cost():
    adv = TreeAdversary(3, 2.0)
    solver = OnlineSolver(adv.instance, ShortestPathOracle())
    adv.drive(solver)
    assert solver.trace.cost >= 3 * adv.sigma


def test_trace_exports(tmp_path):
    import csv
    import json

    trace = run_power(parallel_instance())
    write_trace_jsonl(trace, tmp_path / "t.jsonl")
    lines = [json.loads(l) for l in (tmp_path / "t.jsonl").read_text().splitlines()]
    assert [l.get("record") for l in lines] == [None, None, "summary"]
    assert lines[-1]["cost"] == 2
    write_trace_csv(trace, tmp_path / "t.csv")
    rows = list(csv.DictReader(open(tmp_path / "t.csv")))
    assert [float(r["cumulative_cost"]) for r in rows] == [1.0, 2.0]


def test_exhaustive_oracle_on_streamed_requests():
    inst = parallel_instance(n=3)
    solver = OnlineSolver(inst.with_requests(()), ExhaustiveOracle(), mode=EXACT)
    for r in inst.requests:
        solver.step(r)
    assert sorted(solver.loads.values()) == [1, 2]

import random

import pytest
from hypothesis import given, settings, strategies as st

from gnd.adversary import random_instance
from gnd.errors import Disconnected, NoPath
from gnd.instance import Graph, Request, RoutingPair, SetConnectivity, validate_reply
from gnd.oracles import (
    AutoOracle,
    EnumerationOracle,
    ExhaustiveOracle,
    ShortestPathOracle,
    SteinerOracle,
    enumerate_replies,
    make_oracle,
)

from conftest import explicit_request


def test_exhaustive_picks_cheaper():
    req = explicit_request(0, [{"e"}, {"f"}])
    ans = ExhaustiveOracle()(req, {"e": 3, "f": 2})
    assert (ans.reply, ans.cost, ans.tau) == (frozenset({"f"}), 2, 1)


def test_exhaustive_single_and_tie():
    assert ExhaustiveOracle()(explicit_request(0, [{"e"}]), {"e": 7.5}).cost == 7.5
    tie = ExhaustiveOracle()(explicit_request(0, [{"e"}, {"f"}]), {"e": 2, "f": 2})
    assert tie.reply == frozenset({"e"})


def test_oracle_rejects_bad_costs():
    with pytest.raises(ValueError):
        ExhaustiveOracle()(explicit_request(0, [{"e"}]), {"e": -1})
    with pytest.raises(ValueError):
        ExhaustiveOracle()(explicit_request(0, [{"e"}]), {"e": float("inf")})


GRAPH = Graph(True, ("s", "a", "t"), {"sa": ("s", "a"), "at": ("a", "t"), "st": ("s", "t")})
D = {"sa": 1, "at": 2, "st": 4}


def test_shortest_path_two_routes():
    ans = ShortestPathOracle()(Request(0, RoutingPair("s", "t")), D, GRAPH)
    assert ans.reply == frozenset({"sa", "at"}) and ans.cost == 3


def test_shortest_path_degenerate_and_unreachable():
    assert ShortestPathOracle()(Request(0, RoutingPair("s", "s")), D, GRAPH).reply == frozenset()
    with pytest.raises(NoPath):
        ShortestPathOracle()(Request(0, RoutingPair("t", "s")), D, GRAPH)
    with pytest.raises(NoPath):
        EnumerationOracle()(Request(0, RoutingPair("t", "s")), D, GRAPH)


def test_shortest_path_tie_prefers_fewer_hops():
    ans = ShortestPathOracle()(Request(0, RoutingPair("s", "t")), {"sa": 1, "at": 2, "st": 3}, GRAPH)
    assert ans.reply == frozenset({"st"})


STAR = Graph(False, ("c", "a", "b", "t"), {"ca": ("c", "a"), "cb": ("c", "b"), "ct": ("c", "t")})


def test_steiner_star():
    unit = dict.fromkeys(STAR.edges, 1.0)
    req = Request(0, SetConnectivity({"a", "b", "t"}))
    ans = SteinerOracle()(req, unit, STAR)
    assert ans.tau == 2 and ans.cost <= 6
    assert validate_reply(req, ans.reply, STAR)
    assert EnumerationOracle()(req, unit, STAR).cost == 3


def test_steiner_trivial_and_disconnected():
    g = Graph(False, ("a", "b", "c", "d"), {"ab": ("a", "b"), "cd": ("c", "d")})
    d = {"ab": 1, "cd": 1}
    assert SteinerOracle()(Request(0, SetConnectivity({"a"})), d, g).cost == 0
    with pytest.raises(Disconnected):
        SteinerOracle()(Request(0, SetConnectivity({"a", "c"})), d, g)
    with pytest.raises(Disconnected):
        EnumerationOracle()(Request(0, SetConnectivity({"a", "c"})), d, g)


def test_enumerated_steiner_trees_are_minimal():
    g = Graph(False, ("a", "b", "c"), {"ab": ("a", "b"), "bc": ("b", "c"), "ac": ("a", "c")})
    req = Request(0, SetConnectivity({"a", "c"}))
    got = set(enumerate_replies(req, g))
    assert got == {frozenset({"ac"}), frozenset({"ab", "bc"})}


def test_auto_oracle_tau():
    steiner = random_instance(1, "steiner", m=5, n=2, k=6)
    routing = random_instance(1, "routing", m=5, n=2, k=6)
    assert AutoOracle(steiner).tau == 2
    assert AutoOracle(routing).tau == 1
    with pytest.raises(ValueError):
        make_oracle("magic", routing)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_shortest_path_matches_enumeration(seed):
    inst = random_instance(seed, "routing", m=6, n=1, k=11)
    rng = random.Random(seed)
    d = {e: rng.uniform(0, 3) for e in inst.graph.edges}
    req = inst.requests[0]
    a = ShortestPathOracle()(req, d, inst.graph)
    b = EnumerationOracle()(req, d, inst.graph)
    assert a.cost == pytest.approx(b.cost, rel=1e-12, abs=1e-15)
    assert validate_reply(req, a.reply, inst.graph)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_steiner_within_factor_two(seed):
    inst = random_instance(seed, "steiner", m=6, n=1, k=10)
    rng = random.Random(seed)
    d = {e: rng.uniform(0, 3) for e in inst.graph.edges}
    req = inst.requests[0]
    a = SteinerOracle()(req, d, inst.graph)
    b = EnumerationOracle()(req, d, inst.graph)
    assert validate_reply(req, a.reply, inst.graph)
    assert b.cost <= a.cost * (1 + 1e-12) + 1e-15
    assert a.cost <= 2 * b.cost * (1 + 1e-12) + 1e-15

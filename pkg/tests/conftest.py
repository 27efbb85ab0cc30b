import pytest

from gnd.costs import PowerCost
from gnd.instance import ExplicitList, Graph, Instance, Request, Resource, RoutingPair


def explicit_request(i, replies, weights=None):
    replies = [frozenset(p) for p in replies]
    used = set().union(*replies)
    w = {r: 1.0 for r in used}
    if weights:
        w.update(weights)
    return Request(i, ExplicitList(tuple(replies)), w)


def forced_instance(cost, n=1, rid="e"):
    reqs = [explicit_request(i, [{rid}]) for i in range(n)]
    return Instance((Resource(rid, cost),), tuple(reqs))


def parallel_instance(n=2, c=1.0, alpha=2.0):
    res = (Resource("a", PowerCost(c, alpha)), Resource("b", PowerCost(c, alpha)))
    reqs = [explicit_request(i, [{"a"}, {"b"}]) for i in range(n)]
    return Instance(res, tuple(reqs), name="parallel")


def parallel_graph_instance(n=2, c=1.0, alpha=2.0):
    g = Graph(True, ("s", "t"), {"a": ("s", "t"), "b": ("s", "t")})
    res = (Resource("a", PowerCost(c, alpha)), Resource("b", PowerCost(c, alpha)))
    reqs = [Request(i, RoutingPair("s", "t")) for i in range(n)]
    return Instance(res, tuple(reqs), g, name="parallel-graph")


@pytest.fixture
def parallel():
    return parallel_instance()


ACCEPTANCE_LINES = []


def record(criterion, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

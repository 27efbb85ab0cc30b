import math

import pytest
from hypothesis import given, strategies as st

from gnd.costs import (
    DoSCost,
    PowerCost,
    REPCost,
    cost_from_dict,
    cost_to_dict,
    eval_dos,
    eval_power,
    eval_rep,
    h_value,
    q_value,
    reduce_dos_to_power,
    reduce_rep_to_dos,
    sandwich_terms,
    verify_sandwich,
)


def test_eval_dos_values():
    f = DoSCost(4, 1, 2)
    assert eval_dos(f, 0) == 0
    assert eval_dos(f, 3) == 13
    assert eval_dos(DoSCost(0, 2, 1), 5) == 10


@pytest.mark.parametrize("f, q", [(DoSCost(4, 1, 2), 2.0), (DoSCost(0, 7, 3), 0.0), (DoSCost(8, 1, 3), 2.0)])
def test_q_value(f, q):
    assert q_value(f) == pytest.approx(q, rel=1e-15)


def test_power_and_rep_values():
    assert eval_power(PowerCost(2, 3), 2) == 16
    assert eval_rep(REPCost(1, ((1, 1), (1, 2))), 2) == 7
    assert eval_rep(REPCost(5, ((3, 1.5),)), 0) == 0


@pytest.mark.parametrize("bad", [dict(sigma=-1, xi=1, alpha=2), dict(sigma=1, xi=0, alpha=2),
                                 dict(sigma=1, xi=1, alpha=0.5)])
def test_dos_rejects_bad_parameters(bad):
    with pytest.raises(ValueError):
        DoSCost(**bad)


def test_negative_load_rejected():
    with pytest.raises(ValueError):
        eval_dos(DoSCost(1, 1, 2), -1)


def test_dos_reduction_copies():
    red = reduce_dos_to_power("e", DoSCost(4, 1, 2))
    lin, pw = red.copies
    assert (lin.cost.c, lin.cost.alpha) == (2, 1)
    assert (pw.cost.c, pw.cost.alpha) == (1, 2)
    assert h_value(DoSCost(4, 1, 2), 3) == 15
    assert red.total(3) == 15


def test_dos_reduction_without_startup_cost():
    lin, pw = reduce_dos_to_power("e", DoSCost(0, 1, 2)).copies
    assert lin.cost.c == 0
    assert (pw.cost.c, pw.cost.alpha) == (1, 2)


def test_rep_reduction_assigns_startup_to_smallest_ratio():
    red = reduce_rep_to_dos("e", REPCost(1, ((1, 2), (100, 2))))
    costs = [c.cost for c in red.copies]
    assert costs == [DoSCost(0, 1, 2), DoSCost(1, 100, 2)]


def test_rep_single_term_is_identity():
    (c,) = reduce_rep_to_dos("e", REPCost(3, ((2, 1.5),))).copies
    assert c.cost == DoSCost(3, 2, 1.5)


def test_rep_tie_goes_to_first_term():
    red = reduce_rep_to_dos("e", REPCost(4, ((1, 2), (2, 1))))
    assert [c.cost.sigma for c in red.copies] == [4, 0]


def test_sandwich_examples():
    f = DoSCost(4, 1, 2)
    assert verify_sandwich(DoSCost(3, 2, 1.5), [0])
    assert verify_sandwich(f, [1, 2, 3, 10])
    with pytest.raises(ValueError):
        verify_sandwich(f, [0.5])


def test_sandwich_terms_at_one():
    # q = 2: h(1) = 2 + 1, upper = 2 * 2 * 1 + 1
    assert sandwich_terms(DoSCost(4, 1, 2), 1) == (1.5, 5, 5)


def test_serialization_round_trip():
    for cost in (DoSCost(1, 2, 3), PowerCost(0.5, 1), REPCost(2, ((1, 1), (3, 2.5)))):
        assert cost_from_dict(cost_to_dict(cost)) == cost
    with pytest.raises(ValueError):
        cost_from_dict({"kind": "cubic"})


pos = st.floats(0.01, 100, allow_nan=False)
alphas = st.floats(1, 4)
loads = st.one_of(st.just(0.0), st.floats(1, 1e6))


@given(pos, pos, alphas, loads)
def test_sandwich_property(sigma, xi, alpha, x):
    assert verify_sandwich(DoSCost(sigma, xi, alpha), [x])


@given(pos, st.lists(st.tuples(pos, alphas), min_size=1, max_size=3), st.floats(0, 1e4))
def test_rep_reduction_sums_pointwise(sigma, terms, x):
    r = REPCost(sigma, tuple(terms))
    red = reduce_rep_to_dos("e", r)
    assert red.total(x) == pytest.approx(r(x), rel=1e-12, abs=0)
    assert sum(c.cost.sigma > 0 for c in red.copies) == 1


@given(pos, pos, alphas, st.floats(0, 1e4))
def test_dos_reduction_dominates(sigma, xi, alpha, x):
    f = DoSCost(sigma, xi, alpha)
    red = reduce_dos_to_power("e", f)
    assert red.total(x) == pytest.approx(h_value(f, x), rel=1e-12, abs=0)
    if x == 0 or x >= 1:
        assert 0.5 * red.total(x) <= f(x) * (1 + 1e-12)
    assert math.isfinite(red.total(x))

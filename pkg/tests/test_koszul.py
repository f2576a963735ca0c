import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szego_trace.harness import random_cases
from szego_trace.koszul import lift, lift_further, supertrace_res, verify_c_equals_one
from szego_trace.rho_calculus import RhoExpr
from szego_trace.sphere_model import SphereModel
from szego_trace.trace_engine import residual_trace

F = Fraction
P = RhoExpr.parse


def _shape(L):
    return [(c.sign, c.multiplicity, c.operator) for c in L.components]


def test_lift_examples():
    assert _shape(lift(RhoExpr.power(-3), 1)) == [(1, 1, RhoExpr.power(-3)), (-1, 1, RhoExpr.power(-3, shift=1))]
    p = P("(rho+1)^-1 + 2")
    assert _shape(lift(p, 0)) == [(1, 1, p)]
    assert _shape(lift(RhoExpr.power(-2), 2)) == [
        (1, 1, RhoExpr.power(-2)),
        (-1, 2, RhoExpr.power(-2, shift=1)),
        (1, 1, RhoExpr.power(-2, shift=2)),
    ]
    with pytest.raises(ValueError):
        lift(p, -1)


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(0, 3), st.integers(-6, 2)), min_size=1, max_size=3),
       st.integers(1, 3))
@settings(max_examples=40)
def test_lift_composition_coherence(terms, d):
    p = RhoExpr.from_terms(terms)
    assert lift_further(lift(p, d)) == lift(p, d + 1)


def test_supertrace_examples():
    assert supertrace_res(lift(RhoExpr.power(-2), 1), SphereModel(3)) == 1
    for d in range(1, 4):
        for n in range(d, 8):
            assert supertrace_res(lift(RhoExpr.identity(), d), n) == 0
    assert supertrace_res(lift(RhoExpr.power(-1), 1), 2) == 1


def test_supertrace_needs_large_ambient():
    with pytest.raises(ValueError):
        supertrace_res(lift(RhoExpr.power(-1), 3), 2)


@pytest.mark.parametrize("n", range(1, 7))
def test_supertrace_of_first_lift(n):
    # (rho^-n, (rho+1)^-n) on the sphere in C^{n+1}
    assert supertrace_res(lift(RhoExpr.power(-n), 1), n + 1) == F(n, math.factorial(n))


@pytest.mark.parametrize("n", range(1, 7))
def test_c1_lemma_family(n):
    rep = verify_c_equals_one(RhoExpr.power(-n), n, 1)
    assert rep.equal and rep.lhs == F(1, math.factorial(n - 1))


def test_c1_examples():
    for n in range(1, 5):
        for d in range(1, 4):
            rep = verify_c_equals_one(RhoExpr.identity(), n, d)
            assert rep.equal and rep.lhs == 0
    rep = verify_c_equals_one(P("(rho)^-1 + 3*(rho+1)^-3"), 2, 2)
    assert rep.equal and rep.lhs == 1
    assert rep.as_dict() == {"op": "(rho)^-1 + 3*(rho+1)^-3", "n": 2, "d": 2, "lhs": "1", "rhs": "1", "equal": True}
    with pytest.raises(ValueError):
        verify_c_equals_one(RhoExpr.identity(), 0, 1)


def test_embedding_independence():
    for A, n in random_cases(7, 40):
        want = residual_trace(A, n)
        for d in (1, 2, 3):
            assert supertrace_res(lift(A, d), n + d) == want


@pytest.mark.parametrize("n", range(1, 7))
def test_degree_cutoff(n):
    for m in range(n + 2, n + 5):
        assert residual_trace(RhoExpr.power(-m), n + 1) == 0

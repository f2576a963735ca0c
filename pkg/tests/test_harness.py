from fractions import Fraction

import numpy as np
import pytest

from szego_trace.harness import (
    SUITES,
    _solve_exact,
    brute_force_poles,
    c1_operators,
    numeric_close,
    random_cases,
    random_rho_expr,
)
from szego_trace.rho_calculus import RhoExpr
from szego_trace.trace_engine import poles_and_residues

F = Fraction


def test_random_ops_within_ranges():
    rng = np.random.default_rng(0)
    for _ in range(200):
        e = random_rho_expr(rng)
        assert not e.is_zero()
        for c, a, m in e.terms:
            assert 0 <= a <= 3 and -6 <= m <= 2 and c != 0


def test_random_cases_reproducible():
    assert random_cases(3, 10) == random_cases(3, 10)


def test_solve_exact():
    assert _solve_exact([[F(0), F(1)], [F(2), F(1)]], [F(3), F(5)]) == [1, 3]


def test_brute_force_oracle_known_cases():
    assert brute_force_poles(RhoExpr.identity(), 2, 2) == {2: 1, 1: 1}
    assert brute_force_poles(RhoExpr.power(-2), 2, 2) == {0: 1, -1: 1}
    A = RhoExpr.parse("(rho+1)^-2")
    assert brute_force_poles(A, 1, 3) == {-1: 1, -2: -2}


def test_brute_force_oracle_agrees_and_detects_change():
    for A, n in random_cases(99, 15):
        want = {p.location: p.residue for p in poles_and_residues(A, n, 3)}
        assert brute_force_poles(A, n, 3) == want
    # a perturbed operator gives a different table
    A = RhoExpr.parse("(rho)^-2 + 3*(rho+2)^-1")
    B = RhoExpr.parse("(rho)^-2 + 3*(rho+1)^-1")
    assert brute_force_poles(A, 2, 3) != brute_force_poles(B, 2, 3)


def test_numeric_close():
    assert numeric_close(0.5 + 1e-10, F(1, 2))
    assert not numeric_close(0.5 + 1e-6, F(1, 2))
    assert numeric_close(1e-11, F(0)) and not numeric_close(1e-9, F(0))


def test_c1_operator_family():
    ops = c1_operators(3, 0)
    assert ops[:5] == [RhoExpr.power(-m) for m in range(1, 6)]
    assert ops[5] == RhoExpr.power(-3, shift=1)
    assert all(len(e.terms) == 3 for e in ops[6:])


def test_suite_jobs_give_same_cases():
    a = SUITES["logtrace"](count=20, jobs=1).as_dict()
    b = SUITES["logtrace"](count=20, jobs=2).as_dict()
    assert a == b


@pytest.mark.parametrize("name", ["lemma", "identity", "vanishing"])
def test_small_suites_pass(name):
    assert SUITES[name]().passed

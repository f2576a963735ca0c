import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from szego_trace.harness import random_cases
from szego_trace.rho_calculus import NonClosedProduct, RhoExpr
from szego_trace.sphere_model import SphereModel
from szego_trace.trace_engine import (
    PoleProximity,
    decompose_holonomic,
    log_trace,
    poles_and_residues,
    residual_trace,
    residue_numeric,
    zeta_numeric,
)

F = Fraction
P = RhoExpr.parse

ops_st = st.lists(
    st.tuples(st.integers(-5, 5), st.integers(0, 3), st.integers(-6, 2)), min_size=1, max_size=4
).map(RhoExpr.from_terms)


def close(x, exact, rel=1e-8, zero=1e-10):
    return abs(x) < zero if exact == 0 else abs(x - float(exact)) <= rel * abs(float(exact))


# ------------------------------------------------------------- exact path

def test_residual_trace_examples():
    assert residual_trace(P("(rho)^-3"), SphereModel(3)) == F(1, 2)
    assert residual_trace(P("(rho)^-3"), 2) == 0
    assert residual_trace(P("(rho+1)^-2"), 2) == 1
    for n in range(1, 9):
        assert residual_trace(RhoExpr.identity(), n) == 0


@pytest.mark.parametrize("n", range(1, 9))
def test_lemma_value(n):
    assert residual_trace(RhoExpr.power(-n), n) == F(1, math.factorial(n - 1))


def test_poles_examples():
    as_dict = lambda ps: {p.location: p.residue for p in ps}
    assert as_dict(poles_and_residues(RhoExpr.identity(), 2, 2)) == {2: 1, 1: 1}
    assert as_dict(poles_and_residues(RhoExpr.power(-2), 2, 2)) == {0: 1, -1: 1}
    assert as_dict(poles_and_residues(RhoExpr.power(-1), 1, 3)) == {0: 1}


@given(ops_st, st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_pole_bound(A, n):
    if A.is_zero():
        return
    for p in poles_and_residues(A, n, 4):
        assert p.residue != 0
        # degree of m(k) f(k) plus one
        assert p.location <= n + A.max_power


def test_holonomic_examples():
    d = decompose_holonomic(RhoExpr.power(-1), 1)
    assert d.power_parts == {} and d.log_coefficient == 1 and d.remainder.coeffs == {}
    d = decompose_holonomic(RhoExpr.identity(), 2)
    assert d.power_parts == {2: 1} and d.log_coefficient == 0 and d.remainder.coeffs == {}
    d = decompose_holonomic(RhoExpr.power(-2), 2)
    assert d.power_parts == {} and d.log_coefficient == 1 and d.remainder.coeffs == {-2: 1}


@given(ops_st, st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_holonomic_reassembles_density(A, n):
    d = decompose_holonomic(A, n, order=8)
    assert all(j <= -2 for j in d.remainder.coeffs)
    m = SphereModel(n)
    k = F(10**5)
    exact = m.multiplicity(10**5) * A(k)
    scale = max([abs(c) for c, _, _ in A.terms] + [F(1)]) * k ** (n + 2)
    assert abs(d.evaluate(k) - exact) <= scale * k ** -9 * 10**4


def test_log_trace_examples():
    for n in range(1, 7):
        assert log_trace(RhoExpr.power(-n), n) == F(1, math.factorial(n - 1))
        assert log_trace(RhoExpr.identity(), n) == 0
    assert log_trace(RhoExpr.power(-1), 2) == 1


@pytest.mark.parametrize("seed", [11, 12])
def test_log_trace_equals_residual_trace(seed):
    for A, n in random_cases(seed, 100):
        assert log_trace(A, n) == residual_trace(A, n)


@given(ops_st, ops_st, st.fractions(-3, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4), st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_linearity(A, B, a, b, n):
    combo = RhoExpr.from_terms([(a * c, s, m) for c, s, m in A.terms] + [(b * c, s, m) for c, s, m in B.terms])
    assert residual_trace(combo, n) == a * residual_trace(A, n) + b * residual_trace(B, n)


@given(ops_st, ops_st, st.integers(1, 5))
@settings(max_examples=60, deadline=None)
def test_trace_property_commutative_model(A, B, n):
    try:
        AB, BA = A * B, B * A
    except NonClosedProduct:
        return
    assert residual_trace(AB, n) == residual_trace(BA, n)


@pytest.mark.parametrize("a", [1, 2])
def test_regulator_exact_invariance(a):
    for A, n in random_cases(21, 60):
        assert residual_trace(A, n, regulator_shift=a) == residual_trace(A, n)


# ----------------------------------------------------------- numeric path

def test_zeta_numeric_examples():
    z2 = np.pi**2 / 6
    assert abs(zeta_numeric(RhoExpr.identity(), 1, 2) - z2) < 1e-10 * z2
    assert abs(zeta_numeric(RhoExpr.power(-1), 1, 1) - z2) < 1e-10 * z2
    assert abs(zeta_numeric(P("(rho+1)^-2"), 1, 0) - (z2 - 1)) < 1e-10


def test_zeta_numeric_against_direct_sum():
    # absolutely convergent region: compare with a brute partial sum plus integral tail
    A = P("(rho)^-2 - 3*(rho+2)^-1 + (rho+1)^1")
    s = 6.5
    n = 2
    m = SphereModel(n)
    N = 200000
    k = np.arange(1, N + 1, dtype=float)
    dens = (k + 1) * (k**-2.0 - 3 / (k + 2) + (k + 1))
    direct = np.sum(dens * k**-s)
    # tail ~ int_N^inf k^{2-s} dk
    direct += N ** (3 - s) / (s - 3)
    assert abs(zeta_numeric(A, m, s) - direct) < 1e-9 * abs(direct)


def test_zeta_numeric_rejects_pole():
    with pytest.raises(PoleProximity):
        zeta_numeric(RhoExpr.identity(), 1, 1 + 1e-8)
    with pytest.raises(ValueError):
        zeta_numeric(RhoExpr.identity(), 1, 3, J=1)


def test_residue_numeric_examples():
    assert abs(residue_numeric(P("(rho)^-3"), 3) - 0.5) < 1e-8 * 0.5
    assert abs(residue_numeric(RhoExpr.identity(), 3)) < 1e-10
    assert abs(residue_numeric(P("(rho)^-2 - (rho+1)^-2"), 3) - 1.0) < 1e-8


def test_residue_numeric_pole_proximity():
    with pytest.raises(PoleProximity):
        residue_numeric(RhoExpr.identity(), 2, radius=0.95)


@pytest.mark.parametrize("seed", [31, 32])
def test_numeric_path_agreement(seed):
    for A, n in random_cases(seed, 100):
        assert close(residue_numeric(A, n), residual_trace(A, n))


def test_regulator_numeric_stability():
    for A, n in random_cases(41, 40):
        vals = [residue_numeric(A, n, regulator_shift=a) for a in (0, 1, 2)]
        assert max(vals) - min(vals) < 1e-8

import math
from fractions import Fraction

import pytest

from szego_trace.rho_calculus import RhoExpr, poly_eval
from szego_trace.sphere_model import (
    SphereModel,
    UncanceledVolume,
    apply_rho_poly_to_log,
    hilbert_polynomial,
    kernel_of_operator,
    rising_factorial,
    szego_kernel_series,
)

F = Fraction


def test_hilbert_examples():
    assert hilbert_polynomial(1) == (1,)
    assert hilbert_polynomial(2) == (1, 1)
    assert hilbert_polynomial(3) == (1, F(3, 2), F(1, 2))


@pytest.mark.parametrize("n", range(1, 9))
def test_hilbert_matches_binomial(n):
    m = hilbert_polynomial(n)
    assert m[-1] == F(1, math.factorial(n - 1))
    for k in range(21):
        assert poly_eval(m, F(k)) == math.comb(k + n - 1, n - 1)
    assert SphereModel(n).multiplicity(4) == math.comb(n + 3, n - 1)


def test_sphere_rejects_bad_n():
    with pytest.raises(ValueError):
        SphereModel(0)


def test_szego_series_examples():
    assert szego_kernel_series(1, 3).coeffs == (1, 1, 1, 1)
    assert szego_kernel_series(2, 3).coeffs == (1, 2, 3, 4)
    assert szego_kernel_series(3, 10)[10] == 66


def test_volume_tag_never_evaluates():
    s = szego_kernel_series(3, 4)
    assert s.unit == "1/vol(S^5)"
    with pytest.raises(UncanceledVolume):
        float(s)
    assert s.integrate_diagonal(F(1, 2)) == F(1, 2)


def test_apply_rho_poly_examples():
    rho = RhoExpr.power(1)
    assert apply_rho_poly_to_log(rho, 4).coeffs == (0, 1, 1, 1, 1)
    assert apply_rho_poly_to_log(rising_factorial(2), 4).coeffs == (0, 2, 3, 4, 5)
    assert apply_rho_poly_to_log(RhoExpr.identity(), 3).coeffs == (0, 1, F(1, 2), F(1, 3))


@pytest.mark.parametrize("n", range(1, 7))
def test_rho_log_identity(n):
    lhs = apply_rho_poly_to_log(rising_factorial(n), 50, n)
    sz = szego_kernel_series(n, 50)
    rhs = (0,) + tuple(math.factorial(n - 1) * c for c in sz.coeffs[1:])
    assert lhs.coeffs == rhs


def test_rising_factorial():
    r = rising_factorial(3)
    for k in range(1, 6):
        assert r(k) == k * (k + 1) * (k + 2)


def test_kernel_of_operator_examples():
    assert kernel_of_operator(RhoExpr.identity(), 2, 4).coeffs == (1, 2, 3, 4, 5)
    assert kernel_of_operator(RhoExpr.power(-2), 2, 3).coeffs == (0, 2, F(3, 4), F(4, 9))
    assert kernel_of_operator(RhoExpr.power(-1, shift=1), 1, 3).coeffs == (0, F(1, 2), F(1, 3), F(1, 4))


@pytest.mark.parametrize("n", range(1, 6))
def test_identity_kernel_is_szego_without_constant(n):
    K = kernel_of_operator(RhoExpr.identity(), n, 12)
    assert K.coeffs[1:] == szego_kernel_series(n, 12).coeffs[1:]

"""Hardy space of the unit sphere S^{2n-1} in C^n.

Degree-k homogeneous polynomials span the k-eigenspace of rho, of
dimension C(k+n-1, n-1).  Invariant kernels are power series in
``t = z . conj(w)``; the Szego kernel is ``(1 - t)^{-n} / vol``.  The
volume factor is carried as a tag and only removed by integrating over
the sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .rho_calculus import Poly, RhoExpr, poly, poly_eval, poly_linear_pow, poly_mul


class UncanceledVolume(ValueError):
    """A 1/vol-tagged kernel value escaped without sphere integration."""


def hilbert_polynomial(n: int) -> Poly:
    """Coefficients c_0..c_{n-1} of C(k+n-1, n-1) as a polynomial in k."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out: Poly = (Fraction(1),)
    for i in range(1, n):
        out = poly_mul(out, poly_linear_pow(i, 1))
    return poly(c / math.factorial(n - 1) for c in out)


@dataclass(frozen=True)
class SphereModel:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def hilbert(self) -> Poly:
        return hilbert_polynomial(self.n)

    def multiplicity(self, k: int) -> int:
        return math.comb(k + self.n - 1, self.n - 1)

    @property
    def dimension(self) -> int:
        """Real dimension 2n - 1 of the sphere."""
        return 2 * self.n - 1


@dataclass(frozen=True)
class KernelSeries:
    """Coefficients a_k of t^k in vol * K(z, w), k = 0..order."""

    coeffs: tuple
    n: int
    unit: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        if not self.unit:
            object.__setattr__(self, "unit", f"1/vol(S^{2 * self.n - 1})")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> Fraction:
        return self.coeffs[k]

    def __float__(self):
        raise UncanceledVolume(f"kernel coefficients carry the unit {self.unit}")

    def integrate_diagonal(self, coefficient: Fraction) -> Fraction:
        """Integral over the sphere of ``coefficient * unit``: the tag cancels."""
        return Fraction(coefficient)

    def __sub__(self, other: "KernelSeries") -> "KernelSeries":
        if self.unit != other.unit or self.order != other.order:
            raise ValueError("incompatible kernel series")
        return KernelSeries(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.n, self.unit)

    def scaled(self, c) -> "KernelSeries":
        return KernelSeries(tuple(c * a for a in self.coeffs), self.n, self.unit)


def szego_kernel_series(n: int, order: int) -> KernelSeries:
    if order < 1:
        raise ValueError("order must be >= 1")
    return KernelSeries(tuple(math.comb(k + n - 1, n - 1) for k in range(order + 1)), n)


def apply_rho_poly_to_log(p: RhoExpr, order: int, n: int = 1) -> KernelSeries:
    """Apply p(rho) to Log 1/(1-t) = sum_{k>=1} t^k / k.

    ``rho t^k = k t^k``, so the k-th coefficient becomes p(k)/k.  ``n`` only
    labels the volume unit of the result.
    """
    coeffs = [Fraction(0)] + [p(k) / k for k in range(1, order + 1)]
    return KernelSeries(tuple(coeffs), n)


def rising_factorial(n: int) -> RhoExpr:
    """rho (rho+1) ... (rho+n-1), expanded in powers of rho."""
    out = RhoExpr.identity()
    for i in range(n):
        out = out * RhoExpr.from_terms([(1, 0, 1), (i, 0, 0)])
    return out


def kernel_of_operator(A: RhoExpr, n: int, order: int) -> KernelSeries:
    """Kernel coefficients m(k) f_A(k) of the Toeplitz operator A.

    a_0 is kept only for polynomial A with finite f_A(0); inverse powers
    kill constants.
    """
    m = hilbert_polynomial(n)
    coeffs = []
    for k in range(order + 1):
        if k == 0 and (A.min_power is not None and A.min_power < 0):
            coeffs.append(Fraction(0))
            continue
        coeffs.append(poly_eval(m, Fraction(k)) * A(k))
    return KernelSeries(tuple(coeffs), n)

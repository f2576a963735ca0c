"""Residual and logarithmic traces of spectral Toeplitz operators.

For ``A = f(rho)`` on the Hardy space of S^{2n-1} the regularized trace is
``tr(A rho^{-s}) = sum_{k>=1} m(k) f(k) k^{-s}`` with ``m`` the Hilbert
polynomial.  Writing ``m(k) f(k) ~ sum_j r_j k^j`` at infinity, every
``r_j`` contributes ``r_j zeta(s - j)``, a simple pole at ``s = j + 1``
with residue ``r_j``.  The residual trace is the residue at ``s = 0``,
i.e. the coefficient of ``1/k``.

Three independent routes compute it:

* :func:`residual_trace` -- partial fractions; only ``b/(k+a)`` terms
  carry a ``1/k`` coefficient.
* :func:`log_trace` -- binomial series of every ``(k+a)^m`` times the
  Hilbert polynomial, matched against ``(1-t)^{-N}`` and ``Log 1/(1-t)``.
* :func:`residue_numeric` -- contour integral of the continued zeta
  function, evaluated in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .rho_calculus import (
    AsymptoticSeries,
    RationalFunction,
    RhoExpr,
    expand_at_infinity,
    _linear_power_series,
    partial_fractions,
    poly_eval,
    poly_translate,
)
from .sphere_model import SphereModel, hilbert_polynomial
from .special import hurwitz_zeta

# target size of the neglected Laurent tail relative to the leading terms
_TAIL_EPS = 1e-18


class PoleProximity(ValueError):
    def __init__(self, s, pole, distance):
        self.s = s
        self.pole = pole
        self.distance = distance
        super().__init__(f"s={s} lies {distance:.3g} from the pole at s={pole}")


@dataclass(frozen=True)
class PoleData:
    location: int
    residue: Fraction


@dataclass(frozen=True)
class HolonomicDecomposition:
    power_parts: dict  # N -> f_N, coefficient of (1-t)^{-N}
    log_coefficient: Fraction
    remainder: AsymptoticSeries

    def evaluate(self, k) -> Fraction:
        """Reassemble m(k) f(k) up to the truncated remainder."""
        k = Fraction(k)
        total = self.log_coefficient / k + self.remainder.evaluate(k)
        for N, f in self.power_parts.items():
            total += f * _binom_poly_value(k, N)
        return total


def _binom_poly_value(k: Fraction, N: int) -> Fraction:
    """C(k+N-1, N-1) as a polynomial in k, evaluated at rational k."""
    out = Fraction(1)
    for i in range(1, N):
        out *= k + i
    return out / math.factorial(N - 1)


def _as_sphere(sphere) -> SphereModel:
    return sphere if isinstance(sphere, SphereModel) else SphereModel(int(sphere))


def spectral_density(A: RhoExpr, sphere) -> RationalFunction:
    """m(k) f_A(k) as an exact rational function of k."""
    sphere = _as_sphere(sphere)
    return A.to_rational().mul_poly(sphere.hilbert)


def residual_trace(A: RhoExpr, sphere, regulator_shift: int = 0) -> Fraction:
    """Res_{s=0} tr(A (rho + a)^{-s}), exact.

    With ``u = k + a`` the density is re-expanded in powers of ``u``; the
    coefficient of ``1/u`` is the sum of the simple-fraction numerators.
    """
    g = spectral_density(A, sphere)
    if regulator_shift:
        g = g.translate(regulator_shift)
    _, terms = partial_fractions(g.numer, g.denom)
    return sum((b for _, m, b in terms if m == 1), Fraction(0))


def default_depth(sphere) -> int:
    return _as_sphere(sphere).n + 4


def poles_and_residues(A: RhoExpr, sphere, depth: int | None = None) -> list[PoleData]:
    """Simple poles of tr(A rho^{-s}) down to s = 1 - depth, highest first."""
    sphere = _as_sphere(sphere)
    K = default_depth(sphere) if depth is None else depth
    if K < 1:
        raise ValueError("depth must be >= 1")
    series = expand_at_infinity(spectral_density(A, sphere), K)
    return [PoleData(j + 1, r) for j, r in series.coeffs.items()]


# ------------------------------------------------------------- holonomic path

def decompose_holonomic(A: RhoExpr, sphere, order: int | None = None) -> HolonomicDecomposition:
    """Split the kernel of A into (1-t)^{-N} parts, a Log part and a remainder.

    The expansion multiplies the binomial series of each ``(k+a)^m`` by the
    Hilbert polynomial; no partial fractions are involved.
    """
    sphere = _as_sphere(sphere)
    K = max(order or sphere.n + 4, 2)
    series = density_expansion(A, sphere.n, K)
    poly_part = {j: c for j, c in series.coeffs.items() if j >= 0}
    power_parts: dict[int, Fraction] = {}
    while poly_part:
        deg = max(poly_part)
        N = deg + 1
        basis = hilbert_polynomial(N)
        f = poly_part[deg] / basis[-1]
        power_parts[N] = f
        for j, c in enumerate(basis):
            v = poly_part.get(j, 0) - f * c
            if v:
                poly_part[j] = v
            else:
                poly_part.pop(j, None)
    remainder = AsymptoticSeries(
        {j: c for j, c in series.coeffs.items() if j <= -2}, series.order
    )
    return HolonomicDecomposition(
        dict(sorted(power_parts.items(), reverse=True)), series[-1], remainder
    )


def log_trace(A: RhoExpr, sphere) -> Fraction:
    """Integral over the sphere of the Log 1/(1-t) coefficient of the kernel."""
    return decompose_holonomic(A, sphere).log_coefficient


# --------------------------------------------------------------- numeric path

@dataclass
class ZetaPlan:
    """Precomputed data for evaluating tr(A (rho+a)^{-s}) at many s.

    With ``u = k + a`` and ``g(u) ~ sum_j r_j u^j`` the density expanded by
    binomial series, split ``g = P + h`` with ``P`` the polynomial part:

        tr(s) = sum_{j>=0} r_j zeta_H(s - j, 1 + a)
              + sum_{k < k0} h(u_k) u_k^{-s}
              + sum_{j<=-1} r_j zeta_H(s - j, k0 + a)

    ``h(u_k)`` is computed exactly from the spectral values, and the
    expansion of ``h`` converges for ``u >= k0 + a``; the neglected tail
    is below 1e-18.  Keeping ``P`` on the full Hurwitz sum avoids the
    cancellation of large partial sums of positive powers.
    """

    regulator_shift: int
    poly_coeffs: list = field(default_factory=list)  # (j, r_j) for j >= 0
    head: list = field(default_factory=list)  # (u_k, h(u_k)) for k < k0
    tail_coeffs: list = field(default_factory=list)  # (j, r_j) for j <= -1
    k0: int = 1
    poles: tuple = ()

    def evaluate(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=complex)
        a = self.regulator_shift
        out = np.zeros(s.shape, dtype=complex)
        for coeffs, offset in ((self.poly_coeffs, 1 + a), (self.tail_coeffs, self.k0 + a)):
            if coeffs:
                js = np.array([j for j, _ in coeffs], dtype=float).reshape((-1,) + (1,) * s.ndim)
                rs = np.array([r for _, r in coeffs]).reshape(js.shape)
                out += np.sum(rs * hurwitz_zeta(s[None, ...] - js, offset), axis=0)
        for u, h in self.head:
            out += h * u ** (-s)
        return out

    def on_circle(self, center: int, radius: float, nodes: int) -> np.ndarray:
        """Values at center + radius e^{i theta}; zeta rows are shared across plans."""
        a = self.regulator_shift
        out = np.zeros(nodes, dtype=complex)
        for coeffs, offset in ((self.poly_coeffs, 1 + a), (self.tail_coeffs, self.k0 + a)):
            for j, r in coeffs:
                out += r * _circle_zeta(center - j, radius, nodes, offset)
        s = _circle(center, radius, nodes)
        for u, h in self.head:
            out += h * u ** (-s)
        return out

    def check_poles(self, s, threshold: float = 1e-6):
        for z in np.atleast_1d(np.asarray(s, dtype=complex)):
            for p in self.poles:
                d = abs(z - p)
                if d < threshold:
                    raise PoleProximity(complex(z), p, d)


@lru_cache(maxsize=None)
def _circle(center: float, radius: float, nodes: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    return center + radius * np.exp(1j * theta)


@lru_cache(maxsize=65536)
def _circle_zeta(center: float, radius: float, nodes: int, offset: int) -> np.ndarray:
    out = hurwitz_zeta(_circle(center, radius, nodes), offset)
    out.flags.writeable = False
    return out


def density_expansion(A: RhoExpr, n: int, order: int, regulator_shift: int = 0) -> AsymptoticSeries:
    """m(k) f_A(k) in powers of u = k + a, by binomial series only."""
    hil = poly_translate(hilbert_polynomial(n), -regulator_shift)
    hseries = AsymptoticSeries(dict(enumerate(hil)), order + len(hil))
    shifted = [(c, a - regulator_shift, m) for c, a, m in A.terms]
    aseries: dict[int, Fraction] = {}
    for c, a, m in shifted:
        for j, v in _linear_power_series(a, m, order + len(hil) - 1).items():
            aseries[j] = aseries.get(j, 0) + c * v
    return AsymptoticSeries(aseries, order + len(hil) - 1) * hseries


@lru_cache(maxsize=4096)
def _zeta_plan(A: RhoExpr, n: int, regulator_shift: int, J: int | None) -> ZetaPlan:
    plan = ZetaPlan(regulator_shift)
    # only inverse powers give an infinite expansion; its radius is the
    # largest |a - a_reg| among them
    radii = [abs(a - regulator_shift) for _, a, m in A.terms if m < 0]
    depth = max(J or 2, 2)
    if radii:
        cmax = max(1, max(radii))
        plan.k0 = max(1, math.ceil(2 * cmax + 2 - regulator_shift))
        ratio = cmax / (plan.k0 + regulator_shift)
        depth = max(depth, math.ceil(math.log(_TAIL_EPS) / math.log(ratio)) + 2)
    series = density_expansion(A, n, depth, regulator_shift)
    poly_part = {j: c for j, c in series.coeffs.items() if j >= 0}
    plan.poly_coeffs = [(j, float(c)) for j, c in poly_part.items()]
    if radii:
        hil = hilbert_polynomial(n)
        for k in range(1, plan.k0):
            u = k + regulator_shift
            exact = poly_eval(hil, Fraction(k)) * A(k)
            h = exact - sum((c * Fraction(u) ** j for j, c in poly_part.items()), Fraction(0))
            plan.head.append((float(u), float(h)))
        plan.tail_coeffs = [(j, float(c)) for j, c in series.coeffs.items() if j <= -1]
    plan.poles = tuple(j + 1 for j in series.coeffs)
    return plan


def zeta_numeric(A: RhoExpr, sphere, s, J: int | None = None, regulator_shift: int = 0):
    """Meromorphic continuation of tr(A (rho+a)^{-s}) in floating point.

    ``J`` is a lower bound on the number of subtracted Laurent terms; the
    plan raises it as needed for a 1e-18 tail.  Raises
    :class:`PoleProximity` within 1e-6 of a pole.
    """
    if J is not None and J < 2:
        raise ValueError("subtraction order J must be >= 2")
    sphere = _as_sphere(sphere)
    plan = _zeta_plan(A, sphere.n, int(regulator_shift), J)
    plan.check_poles(s)
    out = plan.evaluate(s)
    return complex(out) if np.ndim(out) == 0 else out


def residue_numeric(
    A: RhoExpr,
    sphere,
    center: int = 0,
    radius: float = 0.5,
    nodes: int = 64,
    regulator_shift: int = 0,
) -> float:
    """Residue at ``center`` by the trapezoid rule on a circle.

    Raises :class:`PoleProximity` if a different pole lies within
    ``radius + 0.1`` of the center.
    """
    sphere = _as_sphere(sphere)
    plan = _zeta_plan(A, sphere.n, int(regulator_shift), None)
    for p in plan.poles:
        if p != center and abs(p - center) < radius + 0.1:
            raise PoleProximity(center, p, abs(p - center))
    dz = _circle(center, radius, nodes) - center
    vals = plan.on_circle(center, radius, nodes)
    return float(np.mean(vals * dz).real)

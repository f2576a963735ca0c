"""Koszul lifts of spectral operators and their residual supertraces.

Functions of ``z_1..z_n`` form the kernel of ``d_1, ..., d_d`` acting on the
Hardy space of the sphere in ``C^{n+d}``.  The Koszul complex resolves
them, and because ``d_i rho = (rho + 1) d_i`` an operator ``p(rho)`` lifts
to ``p(rho + j)`` on the exterior degree-j term, which is C(d, j) copies
of the big Hardy space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .rho_calculus import RhoExpr, fraction_str, shift
from .sphere_model import SphereModel
from .trace_engine import residual_trace


@dataclass(frozen=True)
class LiftComponent:
    sign: int
    multiplicity: int
    operator: RhoExpr


@dataclass(frozen=True)
class KoszulLift:
    codim: int
    components: tuple  # LiftComponent for j = 0..codim

    def weight(self, j: int) -> int:
        c = self.components[j]
        return c.sign * c.multiplicity


def lift(p: RhoExpr, d: int) -> KoszulLift:
    if d < 0:
        raise ValueError("codimension must be >= 0")
    comps = tuple(
        LiftComponent((-1) ** j, math.comb(d, j), shift(p, j)) for j in range(d + 1)
    )
    return KoszulLift(d, comps)


def lift_further(L: KoszulLift) -> KoszulLift:
    """Resolve one more variable: lift every component once more and merge.

    Component ``j`` of the result collects the weighted operators from
    ``(j, 0)`` and ``(j - 1, 1)``; they coincide, so the weights add.
    """
    weights: dict[int, list] = {}
    for j, comp in enumerate(L.components):
        inner = lift(comp.operator, 1)
        for i, sub in enumerate(inner.components):
            w = comp.sign * comp.multiplicity * sub.sign * sub.multiplicity
            weights.setdefault(j + i, []).append((w, sub.operator))
    comps = []
    for j in sorted(weights):
        ops = {op for _, op in weights[j]}
        if len(ops) != 1:
            raise ValueError(f"components in degree {j} do not agree")
        total = sum(w for w, _ in weights[j])
        sign = 1 if total > 0 else -1
        comps.append(LiftComponent(sign, abs(total), ops.pop()))
    return KoszulLift(L.codim + 1, tuple(comps))


def supertrace_res(L: KoszulLift, ambient) -> Fraction:
    """sum_j (-1)^j C(d, j) tr_res(p(rho + j)) on the ambient sphere."""
    ambient = ambient if isinstance(ambient, SphereModel) else SphereModel(int(ambient))
    if ambient.n < L.codim:
        raise ValueError(f"ambient C^{ambient.n} too small for codimension {L.codim}")
    return sum(
        (c.sign * c.multiplicity * residual_trace(c.operator, ambient) for c in L.components),
        Fraction(0),
    )


@dataclass(frozen=True)
class C1Report:
    operator: str
    base_n: int
    d: int
    lhs: Fraction
    rhs: Fraction

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def as_dict(self) -> dict:
        return {
            "op": self.operator,
            "n": self.base_n,
            "d": self.d,
            "lhs": fraction_str(self.lhs),
            "rhs": fraction_str(self.rhs),
            "equal": self.equal,
        }


def verify_c_equals_one(p: RhoExpr, base_n: int, d: int) -> C1Report:
    """Supertrace of the lift into C^{n+d} against tr_res on S^{2n-1}."""
    if base_n < 1 or d < 1:
        raise ValueError("need base_n >= 1 and d >= 1")
    lhs = supertrace_res(lift(p, d), SphereModel(base_n + d))
    rhs = residual_trace(p, SphereModel(base_n))
    return C1Report(str(p), base_n, d, lhs, rhs)

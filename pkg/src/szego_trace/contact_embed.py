"""Embedding contact charts into a round contact sphere.

A presentation is a list of function pairs ``(x_j, y_j)`` on a parameter
chart together with the form they define, either ``2 sum x_j dy_j`` or
``sum x_j dy_j - y_j dx_j``.  The first is rewritten into the second by
prepending the pair ``(1, sum x_j y_j)``; padding with
``(sqrt(R^2 - sum x^2 + y^2), 0)`` then lands on the sphere of radius R
without changing the pulled-back form.

Expressions are parsed with :mod:`ast` into a tiny closed language and
differentiated in forward mode with dual numbers.  Rational inputs stay
rational through ``+ - * /`` and integer powers, so polynomial and
rational charts are certified exactly.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


class EmptyPresentation(ValueError):
    pass


class RadicandNonpositive(ValueError):
    def __init__(self, radius, sample, value):
        self.radius = radius
        self.sample = sample
        self.value = value
        super().__init__(f"R={radius} too small: radicand {float(value):.6g} at sample {sample}")


class ToleranceExceeded(AssertionError):
    def __init__(self, report: "EmbeddingReport"):
        self.report = report
        super().__init__(
            f"deviation {report.max_form_deviation:.3g} (form) / "
            f"{report.max_sphere_deviation:.3g} (sphere) exceeds tol {report.tol:g} "
            f"at sample {report.worst_sample}"
        )


class ExpressionError(ValueError):
    pass


# -------------------------------------------------------------- dual numbers

def _sqrt(v):
    if isinstance(v, Fraction) and v >= 0:
        rn, rd = math.isqrt(v.numerator), math.isqrt(v.denominator)
        if rn * rn == v.numerator and rd * rd == v.denominator:
            return Fraction(rn, rd)
    return math.sqrt(v)


@dataclass(frozen=True)
class Dual:
    """Value with gradient over the chart parameters."""

    value: object
    grad: tuple

    def _lift(self, other) -> "Dual":
        if isinstance(other, Dual):
            return other
        return Dual(other, (0,) * len(self.grad))

    def __add__(self, other):
        o = self._lift(other)
        return Dual(self.value + o.value, tuple(a + b for a, b in zip(self.grad, o.grad)))

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.value, tuple(-a for a in self.grad))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        o = self._lift(other)
        return Dual(
            self.value * o.value,
            tuple(a * o.value + self.value * b for a, b in zip(self.grad, o.grad)),
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        inv = 1 / o.value
        return Dual(
            self.value * inv,
            tuple((a * o.value - self.value * b) * inv * inv for a, b in zip(self.grad, o.grad)),
        )

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, e: int):
        if e == 0:
            return Dual(self.value ** 0, (0,) * len(self.grad))
        if e < 0:
            return 1 / (self ** (-e))
        out = self
        for _ in range(e - 1):
            out = out * self
        return out

    def sqrt(self):
        r = _sqrt(self.value)
        return Dual(r, tuple(a / (2 * r) for a in self.grad))

    def sin(self):
        v = float(self.value)
        return Dual(math.sin(v), tuple(a * math.cos(v) for a in self.grad))

    def cos(self):
        v = float(self.value)
        return Dual(math.cos(v), tuple(-a * math.sin(v) for a in self.grad))


# ------------------------------------------------------ expression language

class Expr:
    """Immutable expression node; build with :func:`parse_expr`."""

    def eval(self, env: dict):
        raise NotImplementedError

    def __add__(self, other):
        return BinOp("+", self, _wrap(other))

    def __sub__(self, other):
        return BinOp("-", self, _wrap(other))

    def __mul__(self, other):
        return BinOp("*", self, _wrap(other))

    def __pow__(self, e: int):
        return Power(self, e)


def _wrap(x) -> Expr:
    return x if isinstance(x, Expr) else Const(Fraction(x))


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: Fraction

    def eval(self, env):
        return self.value

    def __str__(self):
        v = self.value
        return str(v.numerator) if v.denominator == 1 else f"({v.numerator}/{v.denominator})"


@dataclass(frozen=True, eq=False)
class Param(Expr):
    name: str

    def eval(self, env):
        return env[self.name]

    def __str__(self):
        return self.name


@dataclass(frozen=True, eq=False)
class Neg(Expr):
    arg: Expr

    def eval(self, env):
        return -self.arg.eval(env)

    def __str__(self):
        return f"(-{self.arg})"


@dataclass(frozen=True, eq=False)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def eval(self, env):
        a, b = self.left.eval(env), self.right.eval(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        return a / b

    def __str__(self):
        return f"({self.left} {self.op} {self.right})"


@dataclass(frozen=True, eq=False)
class Power(Expr):
    base: Expr
    exponent: int

    def eval(self, env):
        return self.base.eval(env) ** self.exponent

    def __str__(self):
        return f"{self.base}**{self.exponent}"


@dataclass(frozen=True, eq=False)
class Call(Expr):
    func: str
    arg: Expr

    def eval(self, env):
        v = self.arg.eval(env)
        if isinstance(v, Dual):
            return getattr(v, self.func)()
        if self.func == "sqrt":
            return _sqrt(v)
        return getattr(math, self.func)(float(v))

    def __str__(self):
        return f"{self.func}({self.arg})"


_FUNCS = ("sqrt", "sin", "cos")
_BINOPS = {ast.Add: "+", ast.Sub: "-", ast.Mult: "*", ast.Div: "/"}


def parse_expr(text: str, params: Sequence[str]) -> Expr:
    try:
        tree = ast.parse(str(text).replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}: {exc.msg}") from None
    return _convert(tree.body, set(params), text)


def _convert(node, params: set, text: str) -> Expr:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return Const(Fraction(str(node.value)))
    if isinstance(node, ast.Name):
        if node.id not in params:
            raise ExpressionError(f"unknown parameter {node.id!r} in {text!r}")
        return Param(node.id)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _convert(node.operand, params, text)
        return Neg(inner) if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return BinOp(_BINOPS[type(node.op)], _convert(node.left, params, text), _convert(node.right, params, text))
    if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Pow):
        exp = node.right
        sign = 1
        if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
            sign, exp = -1, exp.operand
        if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
            raise ExpressionError(f"only integer powers are allowed in {text!r}")
        return Power(_convert(node.left, params, text), sign * exp.value)
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS:
        if len(node.args) != 1 or node.keywords:
            raise ExpressionError(f"{node.func.id} takes one argument in {text!r}")
        return Call(node.func.id, _convert(node.args[0], params, text))
    raise ExpressionError(f"unsupported syntax in {text!r}")


# ------------------------------------------------------------ presentations

FORMS = ("antisymmetric", "two_xdy")


@dataclass(frozen=True)
class ContactPresentation:
    params: tuple
    pairs: tuple  # ((Expr, Expr), ...)
    form_kind: str = "two_xdy"
    domain: dict = field(default_factory=dict)  # name -> (lo, hi)

    def __post_init__(self):
        if self.form_kind not in FORMS:
            raise ValueError(f"form must be one of {FORMS}")

    @classmethod
    def from_strings(cls, params, pairs, form="two_xdy", domain=None) -> "ContactPresentation":
        params = tuple(params)
        parsed = tuple((parse_expr(x, params), parse_expr(y, params)) for x, y in pairs)
        dom = {p: tuple(Fraction(str(v)) for v in (domain or {}).get(p, (-1, 1))) for p in params}
        return cls(params, parsed, form, dom)

    def pair_strings(self) -> list:
        return [[str(x), str(y)] for x, y in self.pairs]


def _env(params: Sequence[str], point: Sequence) -> dict:
    n = len(params)
    return {
        p: Dual(v, tuple(1 if i == j else 0 for j in range(n)))
        for i, (p, v) in enumerate(zip(params, point))
    }


def form_on_coordinates(pairs, form_kind: str, params, point) -> list:
    """The 1-form evaluated on each coordinate tangent vector at ``point``."""
    env = _env(params, point)
    vals = [(_lift(x.eval(env), params), _lift(y.eval(env), params)) for x, y in pairs]
    out = []
    for i in range(len(params)):
        if form_kind == "two_xdy":
            out.append(sum((2 * x.value * y.grad[i] for x, y in vals), 0))
        else:
            out.append(sum((x.value * y.grad[i] - y.value * x.grad[i] for x, y in vals), 0))
    return out


def _lift(v, params) -> Dual:
    # constants evaluate to plain numbers, not duals
    return v if isinstance(v, Dual) else Dual(v, (0,) * len(params))


def squared_radius(pairs, params, point):
    env = {p: v for p, v in zip(params, point)}
    return sum((x.eval(env) ** 2 + y.eval(env) ** 2 for x, y in pairs), 0)


def antisymmetrize(p: ContactPresentation) -> ContactPresentation:
    """2 sum x dy  ->  sum x dy - y dx by prepending (1, sum x_j y_j)."""
    if not p.pairs:
        raise EmptyPresentation("presentation has no pairs")
    if p.form_kind != "two_xdy":
        raise ValueError("presentation is already antisymmetric")
    total: Expr = p.pairs[0][0] * p.pairs[0][1]
    for x, y in p.pairs[1:]:
        total = total + x * y
    return ContactPresentation(p.params, ((Const(Fraction(1)), total),) + p.pairs, "antisymmetric", p.domain)


# ------------------------------------------------------------------ samples

def grid_samples(p: ContactPresentation, density: int) -> list:
    """Rational tensor grid with ``density`` points per parameter."""
    if density < 2:
        raise ValueError("grid density must be >= 2")
    axes = []
    for name in p.params:
        lo, hi = p.domain.get(name, (Fraction(-1), Fraction(1)))
        axes.append([lo + (hi - lo) * Fraction(i, density - 1) for i in range(density)])
    out = [()]
    for axis in axes:
        out = [pt + (v,) for pt in out for v in axis]
    return out


def random_samples(p: ContactPresentation, count: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    lows = [float(p.domain.get(n, (-1, 1))[0]) for n in p.params]
    highs = [float(p.domain.get(n, (-1, 1))[1]) for n in p.params]
    pts = rng.uniform(lows, highs, size=(count, len(p.params)))
    return [tuple(float(v) for v in row) for row in pts]


# ---------------------------------------------------------------- embedding

@dataclass(frozen=True)
class Embedding:
    target_pairs: tuple
    radius: Fraction

    @property
    def N(self) -> int:
        return len(self.target_pairs)


def pad_to_sphere(
    p: ContactPresentation,
    R=None,
    samples: Iterable | None = None,
    grid: int = 101,
    zero_tol: float = 1e-12,
) -> Embedding:
    """Append (sqrt(R^2 - sum x^2 + y^2), 0) to reach the sphere of radius R.

    Without ``R`` the smallest integer with ``R^2 >= max + 1`` over the
    samples (default: a ``grid``-point tensor grid) is used.  No pair is
    added when the radicand vanishes on every sample.
    """
    if p.form_kind != "antisymmetric":
        raise ValueError("pad_to_sphere needs an antisymmetric presentation")
    pts = list(samples) if samples is not None else grid_samples(p, grid)
    sq = [squared_radius(p.pairs, p.params, pt) for pt in pts]
    if R is None:
        R = math.isqrt(math.ceil(max(sq) + 1))
        while R * R < max(sq) + 1:
            R += 1
    R = Fraction(R) if not isinstance(R, float) else R
    rad = [R * R - v for v in sq]
    if all(abs(v) <= zero_tol for v in rad):
        return Embedding(p.pairs, R)
    for pt, v in zip(pts, rad):
        if v <= 0:
            raise RadicandNonpositive(R, pt, v)
    total: Expr = Power(p.pairs[0][0], 2) + Power(p.pairs[0][1], 2)
    for x, y in p.pairs[1:]:
        total = total + Power(x, 2) + Power(y, 2)
    pad = (Call("sqrt", Const(Fraction(R * R)) - total), Const(Fraction(0)))
    return Embedding(p.pairs + (pad,), R)


@dataclass
class EmbeddingReport:
    max_form_deviation: float
    max_sphere_deviation: float
    worst_sample: tuple
    samples: int
    radius: object
    pairs: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_form_deviation <= self.tol and self.max_sphere_deviation <= self.tol


def verify_embedding(e: Embedding, p: ContactPresentation, samples, tol: float = 1e-9, raise_on_fail=True) -> EmbeddingReport:
    """Compare the sphere form pulled back by ``e`` with the form of ``p``.

    Checks every coordinate direction at every sample, plus the sphere
    equation.  Raises :class:`ToleranceExceeded` on failure unless
    ``raise_on_fail`` is false.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("no samples")
    worst, worst_pt = -1.0, samples[0]
    form_dev = sphere_dev = 0.0
    R2 = e.radius * e.radius
    for pt in samples:
        lhs = form_on_coordinates(e.target_pairs, "antisymmetric", p.params, pt)
        rhs = form_on_coordinates(p.pairs, p.form_kind, p.params, pt)
        fd = max((abs(a - b) for a, b in zip(lhs, rhs)), default=0)
        sd = abs(squared_radius(e.target_pairs, p.params, pt) - R2)
        form_dev = max(form_dev, float(fd))
        sphere_dev = max(sphere_dev, float(sd))
        if max(fd, sd) > worst:
            worst, worst_pt = max(fd, sd), pt
    report = EmbeddingReport(form_dev, sphere_dev, tuple(worst_pt), len(samples), e.radius, e.N, tol)
    if raise_on_fail and not report.passed:
        raise ToleranceExceeded(report)
    return report


def standard_s3() -> ContactPresentation:
    """Unit S^3 in C^2 through inverse stereographic projection (rational)."""
    d = "(1 + p**2 + q**2 + r**2)"
    pairs = [
        (f"2*p/{d}", f"2*q/{d}"),
        (f"2*r/{d}", f"(p**2 + q**2 + r**2 - 1)/{d}"),
    ]
    return ContactPresentation.from_strings(("p", "q", "r"), pairs, "antisymmetric")

"""Exact spectral calculus for functions of the degree operator rho.

An operator is stored as a finite sum of terms ``c * (rho + a)**m`` with
rational ``c``, integer shift ``a >= 0`` and integer power ``m``.  On the
Hardy space rho acts on degree-k polynomials by ``k`` and kills constants,
so every such operator is the spectral function ``f(k)`` evaluated at
``k = 1, 2, ...``; nonnegative shifts keep ``f`` pole-free there.

Rational functions of ``k`` (``RationalFunction``) are the closed arena
for trace computations: numerator polynomial over a product of linear
factors ``(k + a)**m``.  Polynomials are plain tuples of ``Fraction``
coefficients, lowest degree first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

Rational = Union[int, Fraction]
Poly = tuple  # tuple[Fraction, ...], lowest degree first


class NonClosedProduct(ArithmeticError):
    """Product of inverse powers at distinct shifts; use partial_fractions."""


class ParseError(ValueError):
    def __init__(self, message: str, column: int, text: str = ""):
        self.column = column
        self.text = text
        super().__init__(f"{message} at column {column}")


# ---------------------------------------------------------------- polynomials

def poly(coeffs: Iterable[Rational]) -> Poly:
    """Normalize to a trimmed tuple of Fractions."""
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def poly_add(p: Poly, q: Poly) -> Poly:
    n = max(len(p), len(q))
    return poly((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def poly_scale(p: Poly, c: Rational) -> Poly:
    return poly(c * x for x in p)


def poly_mul(p: Poly, q: Poly) -> Poly:
    if not p or not q:
        return ()
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return poly(out)


def poly_pow(p: Poly, e: int) -> Poly:
    out: Poly = (Fraction(1),)
    for _ in range(e):
        out = poly_mul(out, p)
    return out


def poly_linear_pow(a: Rational, m: int) -> Poly:
    """Coefficients of (k + a)**m, m >= 0."""
    a = Fraction(a)
    return poly(math.comb(m, i) * a ** (m - i) for i in range(m + 1))


def poly_divmod(p: Poly, q: Poly) -> tuple[Poly, Poly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    if len(rem) < len(q):
        return (), poly(rem)
    quo = [Fraction(0)] * (len(rem) - len(q) + 1)
    lead = q[-1]
    for i in range(len(quo) - 1, -1, -1):
        c = rem[i + len(q) - 1] / lead
        quo[i] = c
        if c:
            for j, b in enumerate(q):
                rem[i + j] -= c * b
    return poly(quo), poly(rem[: len(q) - 1])


def poly_eval(p: Poly, k):
    acc = 0
    for c in reversed(p):
        acc = acc * k + c
    return acc


def poly_translate(p: Poly, c: Rational) -> Poly:
    """Coefficients of p(k + c)."""
    out: Poly = ()
    for i, a in enumerate(p):
        if a:
            out = poly_add(out, poly_scale(poly_linear_pow(c, i), a))
    return out


def gen_binomial(m: int, i: int) -> Fraction:
    """C(m, i) for any integer m (negative allowed), i >= 0."""
    num = 1
    for t in range(i):
        num *= m - t
    return Fraction(num, math.factorial(i))


# -------------------------------------------------------------------- RhoExpr

@dataclass(frozen=True)
class RhoExpr:
    """Canonical finite sum of c * (rho + a)**m.

    ``terms`` is a tuple of ``(c, a, m)`` sorted by ``(a, m)`` with no zero
    coefficients; power-0 terms always carry shift 0.  Construct through
    :meth:`from_terms` unless the input is already canonical.
    """

    terms: tuple = ()

    @classmethod
    def from_terms(cls, terms: Iterable[tuple]) -> "RhoExpr":
        acc: dict[tuple[int, int], Fraction] = {}
        for c, a, m in terms:
            a, m = int(a), int(m)
            if a < 0:
                raise ValueError(f"shift must be a nonnegative integer, got {a}")
            if m == 0:
                a = 0
            acc[(a, m)] = acc.get((a, m), Fraction(0)) + Fraction(c)
        return cls(tuple((c, a, m) for (a, m), c in sorted(acc.items()) if c != 0))

    @classmethod
    def identity(cls) -> "RhoExpr":
        return cls(((Fraction(1), 0, 0),))

    @classmethod
    def power(cls, m: int, shift: int = 0, coeff: Rational = 1) -> "RhoExpr":
        return cls.from_terms([(coeff, shift, m)])

    @classmethod
    def parse(cls, text: str) -> "RhoExpr":
        return parse_rho_expr(text)

    def __call__(self, k: Rational) -> Fraction:
        return evaluate_terms(self.terms, k)

    def __add__(self, other: "RhoExpr") -> "RhoExpr":
        return rho_algebra(self, other, "add")

    def __sub__(self, other: "RhoExpr") -> "RhoExpr":
        return rho_algebra(self, scale(other, -1), "add")

    def __mul__(self, other):
        if isinstance(other, RhoExpr):
            return rho_algebra(self, other, "mul")
        return scale(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> "RhoExpr":
        return scale(self, -1)

    @property
    def shifts(self) -> set[int]:
        return {a for _, a, _ in self.terms}

    @property
    def max_power(self) -> int | None:
        return max((m for _, _, m in self.terms), default=None)

    @property
    def min_power(self) -> int | None:
        return min((m for _, _, m in self.terms), default=None)

    def is_zero(self) -> bool:
        return not self.terms

    def to_rational(self) -> "RationalFunction":
        """The spectral function f(k) over its least common denominator."""
        depth: dict[int, int] = {}
        for _, a, m in self.terms:
            if m < 0:
                depth[a] = max(depth.get(a, 0), -m)
        numer: Poly = ()
        for c, a, m in self.terms:
            part: Poly = (Fraction(c),)
            for b, mb in depth.items():
                e = mb + m if b == a else mb
                part = poly_mul(part, poly_linear_pow(b, e))
            if m > 0 and a not in depth:
                part = poly_mul(part, poly_linear_pow(a, m))
            numer = poly_add(numer, part)
        return RationalFunction.make(numer, depth.items())

    def __str__(self) -> str:
        return format_rho_expr(self)


def evaluate_terms(terms: Iterable[tuple], k: Rational) -> Fraction:
    k = Fraction(k)
    return sum((Fraction(c) * (k + a) ** m for c, a, m in terms), Fraction(0))


def scale(expr: RhoExpr, c: Rational) -> RhoExpr:
    return RhoExpr.from_terms((c * t, a, m) for t, a, m in expr.terms)


def _term_product(t1: tuple, t2: tuple) -> list[tuple]:
    c1, a1, m1 = t1
    c2, a2, m2 = t2
    if a1 == a2 or m1 == 0 or m2 == 0:
        if m1 == 0:
            return [(c1 * c2, a2, m2)]
        if m2 == 0:
            return [(c1 * c2, a1, m1)]
        return [(c1 * c2, a1, m1 + m2)]
    if m1 < 0 and m2 < 0:
        raise NonClosedProduct(
            f"(rho+{a1})^{m1} * (rho+{a2})^{m2} is not a finite sum of shifted powers"
        )
    # re-expand the nonnegative factor around the other factor's shift:
    # (rho+a)^m = sum_i C(m,i) (a-b)^i (rho+b)^(m-i)
    if m1 < 0:
        (c1, a1, m1), (c2, a2, m2) = (c2, a2, m2), (c1, a1, m1)
    d = a1 - a2
    return [
        (c1 * c2 * math.comb(m1, i) * d ** i, a2, m1 - i + m2)
        for i in range(m1 + 1)
    ]


def rho_algebra(lhs: RhoExpr, rhs, op: str = "add") -> RhoExpr:
    """Sum, product or scalar multiple of spectral operators.

    ``op="scale"`` takes a rational ``rhs``.  Products of inverse powers
    at different shifts raise :class:`NonClosedProduct`.
    """
    if op == "add":
        return RhoExpr.from_terms(list(lhs.terms) + list(rhs.terms))
    if op == "scale":
        return scale(lhs, rhs)
    if op == "mul":
        out: list[tuple] = []
        for t1 in lhs.terms:
            for t2 in rhs.terms:
                out.extend(_term_product(t1, t2))
        return RhoExpr.from_terms(out)
    raise ValueError(f"unknown op {op!r}")


def shift(expr: RhoExpr, j: int) -> RhoExpr:
    """Replace rho by rho + j in every term."""
    if j < 0:
        raise ValueError("shift must be nonnegative")
    return RhoExpr.from_terms((c, a + j, m) for c, a, m in expr.terms)


# ---------------------------------------------------------- rational functions

@dataclass(frozen=True)
class RationalFunction:
    """numer(k) / prod (k + a)**m with rational shifts a and m >= 1."""

    numer: Poly
    denom: tuple = ()  # ((a, m), ...) sorted, distinct a

    @classmethod
    def make(cls, numer: Iterable[Rational], denom: Iterable[tuple] = ()) -> "RationalFunction":
        acc: dict[Fraction, int] = {}
        for a, m in denom:
            if m < 0:
                raise ValueError("denominator multiplicity must be nonnegative")
            if m:
                acc[Fraction(a)] = acc.get(Fraction(a), 0) + int(m)
        return cls(poly(numer), tuple(sorted(acc.items())))

    @classmethod
    def polynomial(cls, coeffs: Iterable[Rational]) -> "RationalFunction":
        return cls.make(coeffs)

    def denom_poly(self) -> Poly:
        out: Poly = (Fraction(1),)
        for a, m in self.denom:
            out = poly_mul(out, poly_linear_pow(a, m))
        return out

    def __call__(self, k: Rational) -> Fraction:
        k = Fraction(k)
        d = Fraction(1)
        for a, m in self.denom:
            d *= (k + a) ** m
        return poly_eval(self.numer, k) / d

    def mul_poly(self, p: Poly) -> "RationalFunction":
        return RationalFunction.make(poly_mul(self.numer, p), self.denom)

    def translate(self, c: Rational) -> "RationalFunction":
        """The function u -> self(u - c)."""
        c = Fraction(c)
        return RationalFunction.make(
            poly_translate(self.numer, -c), ((a - c, m) for a, m in self.denom)
        )


def partial_fractions(numer: Sequence[Rational], denom_factors: Iterable[tuple]):
    """Exact decomposition N(k) / prod (k+a_i)^m_i = P(k) + sum b/(k+a)^m.

    Returns ``(P, [(a, m, b), ...])`` with zero coefficients dropped,
    sorted by ``(a, m)``.
    """
    rf = RationalFunction.make(numer, denom_factors)
    quo, rem = poly_divmod(rf.numer, rf.denom_poly())
    terms: list[tuple] = []
    for a, ma in rf.denom:
        # u = k + a: rem(u - a) / others(u - a), expanded in u up to u^(ma-1)
        others: Poly = (Fraction(1),)
        for b, mb in rf.denom:
            if b != a:
                others = poly_mul(others, poly_linear_pow(b - a, mb))
        num_u = poly_translate(rem, -a)
        series = _series_divide(num_u, others, ma)
        for i, coeff in enumerate(series):
            if coeff:
                terms.append((a, ma - i, coeff))
    terms.sort(key=lambda t: (t[0], t[1]))
    return quo, [(_intify(a), m, b) for a, m, b in terms]


def _intify(x: Fraction):
    return int(x) if x.denominator == 1 else x


def _series_divide(num: Poly, den: Poly, count: int) -> list[Fraction]:
    """First ``count`` Taylor coefficients at 0 of num/den (den(0) != 0)."""
    out: list[Fraction] = []
    for i in range(count):
        acc = num[i] if i < len(num) else Fraction(0)
        for j in range(1, min(i, len(den) - 1) + 1):
            acc -= den[j] * out[i - j]
        out.append(acc / den[0])
    return out


def recombine(poly_part: Sequence[Rational], terms: Iterable[tuple]) -> RationalFunction:
    """Inverse of :func:`partial_fractions`."""
    terms = list(terms)
    depth: dict[Fraction, int] = {}
    for a, m, _ in terms:
        depth[Fraction(a)] = max(depth.get(Fraction(a), 0), m)
    den = RationalFunction.make((1,), depth.items())
    numer = poly_mul(poly(poly_part), den.denom_poly())
    for a, m, b in terms:
        part: Poly = (Fraction(b),)
        for c, mc in depth.items():
            part = poly_mul(part, poly_linear_pow(c, mc - m if c == Fraction(a) else mc))
        numer = poly_add(numer, part)
    return RationalFunction.make(numer, depth.items())


# ------------------------------------------------------- expansion at infinity

@dataclass(frozen=True)
class AsymptoticSeries:
    """Truncated Laurent expansion sum_j c_j k^j at k = infinity.

    Coefficients are exact for powers ``j >= -order``; everything below is
    unknown, not zero.
    """

    coeffs: Mapping[int, Fraction]
    order: int

    def __post_init__(self):
        clean = {int(j): Fraction(c) for j, c in self.coeffs.items() if c != 0 and j >= -self.order}
        object.__setattr__(self, "coeffs", dict(sorted(clean.items(), reverse=True)))

    @property
    def lead_power(self) -> int | None:
        return max(self.coeffs, default=None)

    def __getitem__(self, j: int) -> Fraction:
        if j < -self.order:
            raise KeyError(f"power {j} is below the truncation order {-self.order}")
        return self.coeffs.get(j, Fraction(0))

    def residue(self) -> Fraction:
        """Coefficient of 1/k."""
        return self[-1]

    def __add__(self, other: "AsymptoticSeries") -> "AsymptoticSeries":
        out = dict(self.coeffs)
        for j, c in other.coeffs.items():
            out[j] = out.get(j, 0) + c
        return AsymptoticSeries(out, min(self.order, other.order))

    def __mul__(self, other):
        if not isinstance(other, AsymptoticSeries):
            return AsymptoticSeries({j: c * other for j, c in self.coeffs.items()}, self.order)
        l1 = self.lead_power if self.lead_power is not None else -self.order
        l2 = other.lead_power if other.lead_power is not None else -other.order
        order = min(self.order - l2, other.order - l1)
        out: dict[int, Fraction] = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                if i + j >= -order:
                    out[i + j] = out.get(i + j, 0) + a * b
        return AsymptoticSeries(out, order)

    __rmul__ = __mul__

    def evaluate(self, k: Rational) -> Fraction:
        k = Fraction(k)
        return sum((c * k ** j for j, c in self.coeffs.items()), Fraction(0))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)


def _linear_power_series(a: Rational, m: int, order: int) -> dict[int, Fraction]:
    """(k+a)^m = sum_i C(m,i) a^i k^(m-i), truncated at k^-order."""
    a = Fraction(a)
    out: dict[int, Fraction] = {}
    i = 0
    while m - i >= -order:
        if m >= 0 and i > m:
            break
        c = gen_binomial(m, i) * a ** i
        if c:
            out[m - i] = c
        if a == 0:
            break
        i += 1
    return out


def expand_at_infinity(expr, order: int) -> AsymptoticSeries:
    """Laurent expansion at k = infinity, exact down to k^-order."""
    if order < 1:
        raise ValueError("order must be >= 1")
    out: dict[int, Fraction] = {}
    if isinstance(expr, RhoExpr):
        for c, a, m in expr.terms:
            for j, v in _linear_power_series(a, m, order).items():
                out[j] = out.get(j, 0) + c * v
        return AsymptoticSeries(out, order)
    if isinstance(expr, RationalFunction):
        quo, terms = partial_fractions(expr.numer, expr.denom)
        for j, c in enumerate(quo):
            out[j] = out.get(j, 0) + c
        for a, m, b in terms:
            for j, v in _linear_power_series(a, -m, order).items():
                out[j] = out.get(j, 0) + b * v
        return AsymptoticSeries(out, order)
    raise TypeError(f"cannot expand {type(expr).__name__}")


# ---------------------------------------------------------------- mini-grammar

def parse_rho_expr(text: str) -> RhoExpr:
    """Parse ``c*(rho+a)^m`` terms joined by ``+``/``-``.

    ``rho^m`` means ``(rho+0)^m`` and a bare coefficient is that multiple of
    the identity.  Columns in :class:`ParseError` are 1-based.
    """
    return _Parser(text).parse()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, msg: str):
        raise ParseError(msg, self.pos + 1, self.text)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, tok: str):
        self.skip()
        if not self.text.startswith(tok, self.pos):
            found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
            self.error(f"expected {tok!r}, found {found!r}")
        self.pos += len(tok)

    def integer(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected integer")
        return int(self.text[start:self.pos])

    def parse(self) -> RhoExpr:
        terms = []
        sign = 1
        if self.peek() in "+-" and self.peek():
            sign = -1 if self.peek() == "-" else 1
            self.pos += 1
        terms.append(self.term(sign))
        while self.peek():
            ch = self.peek()
            if ch not in "+-":
                self.error(f"unexpected {ch!r}")
            self.pos += 1
            terms.append(self.term(-1 if ch == "-" else 1))
        return RhoExpr.from_terms(terms)

    def term(self, sign: int) -> tuple:
        ch = self.peek()
        if ch.isdigit():
            coeff = Fraction(self.integer())
            if self.peek() == "/":
                self.pos += 1
                den = self.integer()
                if den == 0:
                    self.error("zero denominator")
                coeff /= den
            if self.peek() != "*":
                return (sign * coeff, 0, 0)
            self.pos += 1
            a, m = self.factor()
            return (sign * coeff, a, m)
        a, m = self.factor()
        return (sign, a, m)

    def factor(self) -> tuple[int, int]:
        ch = self.peek()
        a = 0
        if ch == "(":
            self.pos += 1
            self.expect("rho")
            if self.peek() == "+":
                self.pos += 1
                a = self.integer()
            elif self.peek() != ")":
                found = self.peek() or "end of input"
                self.error(f"expected '+' or ')', found {found!r}")
            self.expect(")")
        elif self.text.startswith("rho", self.pos):
            self.pos += 3
        else:
            self.error(f"expected 'rho' or '(', found {ch or 'end of input'!r}")
        m = 1
        if self.peek() == "^":
            self.pos += 1
            s = 1
            if self.peek() in "+-" and self.peek():
                s = -1 if self.peek() == "-" else 1
                self.pos += 1
            m = s * self.integer()
        return a, m


def fraction_str(x: Rational) -> str:
    """Canonical "p/q" string; integers print without a denominator."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_rho_expr(expr: RhoExpr) -> str:
    """Render in the parseable grammar; inverse of :func:`parse_rho_expr`."""
    if not expr.terms:
        return "0"
    parts = []
    for i, (c, a, m) in enumerate(expr.terms):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if m == 0:
            body = _format_coeff(mag)
        else:
            base = f"(rho+{a})^{m}" if a else f"(rho)^{m}"
            body = base if mag == 1 else f"{_format_coeff(mag)}*{base}"
        if i == 0:
            parts.append(body if sign == "+" else f"-{body}")
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)

"""Verification suites: one runner per acceptance check, plus the oracles they need.

Every suite returns a :class:`SuiteResult` whose cases are sorted by key,
so output is deterministic regardless of ``jobs``.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import contact_embed as ce
from .gaussian_model import (
    compose_phases,
    gaussian_integral_closed,
    gaussian_integral_numeric,
    random_form,
    random_phase,
)
from .koszul import lift, supertrace_res, verify_c_equals_one
from .rho_calculus import RhoExpr, fraction_str, poly_eval
from .sphere_model import (
    SphereModel,
    apply_rho_poly_to_log,
    hilbert_polynomial,
    rising_factorial,
    szego_kernel_series,
)
from .trace_engine import (
    log_trace,
    poles_and_residues,
    residual_trace,
    residue_numeric,
)

REL_TOL = 1e-8
ABS_TOL_ZERO = 1e-10


@dataclass
class Case:
    key: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"key": self.key, "status": "pass" if self.passed else "fail", **self.detail}


@dataclass
class SuiteResult:
    name: str
    title: str
    cases: list
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def failures(self) -> list:
        return [c for c in self.cases if not c.passed]

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "title": self.title,
            "status": "pass" if self.passed else "fail",
            "total": len(self.cases),
            "passed": sum(c.passed for c in self.cases),
            "cases": [c.as_dict() for c in self.cases],
        }


def _run(tasks, jobs: int) -> list:
    """tasks: list of (fn, args); results come back in input order."""
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(fn, *args) for fn, args in tasks]
            return [f.result() for f in futures]
    return [fn(*args) for fn, args in tasks]


def _suite(name, title, tasks, jobs) -> SuiteResult:
    t0 = time.perf_counter()
    cases = []
    for out in _run(tasks, jobs):
        cases.extend(out if isinstance(out, list) else [out])
    cases.sort(key=lambda c: c.key)
    return SuiteResult(name, title, cases, time.perf_counter() - t0)


def numeric_close(value: float, exact: Fraction, rel: float = REL_TOL, zero_abs: float = ABS_TOL_ZERO) -> bool:
    if exact == 0:
        return abs(value) < zero_abs
    return abs(value - float(exact)) <= rel * abs(float(exact))


# --------------------------------------------------------------- generators

def random_rho_expr(rng: np.random.Generator, max_terms: int = 3, coeff: int = 5,
                    max_shift: int = 3, powers=(-6, 2)) -> RhoExpr:
    """Nonzero integer coefficients in [-coeff, coeff]; never the zero operator."""
    while True:
        terms = []
        for _ in range(int(rng.integers(1, max_terms + 1))):
            c = int(rng.integers(1, coeff + 1)) * (1 if rng.random() < 0.5 else -1)
            terms.append((c, int(rng.integers(0, max_shift + 1)), int(rng.integers(powers[0], powers[1] + 1))))
        expr = RhoExpr.from_terms(terms)
        if not expr.is_zero():
            return expr


def random_cases(seed: int, count: int, n_range=range(1, 6)) -> list:
    rng = np.random.default_rng(seed)
    ns = list(n_range)
    return [(random_rho_expr(rng), ns[int(rng.integers(len(ns)))]) for _ in range(count)]


# ------------------------------------------------------------ brute oracle

def _solve_exact(rows: list, rhs: list) -> list:
    """Gauss-Jordan elimination over Fractions."""
    n = len(rows)
    M = [list(r) + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def brute_force_poles(A: RhoExpr, n: int, depth: int, extra: int = 10,
                      max_den: int = 10**6) -> dict:
    """Poles of tr(A rho^{-s}) from values of m(k) f(k) at large k only.

    Evaluates the density exactly at geometrically spaced integers in
    [1e3, 1e6], solves for the coefficients of k^top .. k^{-depth-extra}
    and recovers each kept coefficient as a small-denominator rational.
    Returns {pole location: residue}.
    """
    top = (n - 1) + max(A.max_power or 0, 0)
    powers = list(range(top, -depth - extra - 1, -1))
    size = len(powers)
    ks = sorted({int(round(10 ** (3 + 3 * i / (size - 1)))) for i in range(size)})
    m = hilbert_polynomial(n)
    rows, rhs = [], []
    for k in ks:
        kf = Fraction(k)
        rows.append([kf ** j for j in powers])
        rhs.append(poly_eval(m, kf) * A(k))
    sol = _solve_exact(rows, rhs)
    out = {}
    for j, c in zip(powers, sol):
        if j < -depth:
            break
        r = c.limit_denominator(max_den)
        if r != 0:
            out[j + 1] = r
    return out


# ------------------------------------------------------------- case workers

def _case_lemma(n: int) -> Case:
    A = RhoExpr.power(-n)
    exact = residual_trace(A, n)
    expected = Fraction(1, math.factorial(n - 1))
    num = residue_numeric(A, n)
    ok = exact == expected and numeric_close(num, expected)
    return Case(f"n={n}", ok, {"exact": fraction_str(exact), "expected": fraction_str(expected), "numeric": num})


def _case_vanishing(n: int, ds: tuple) -> list:
    Id = RhoExpr.identity()
    exact = residual_trace(Id, n)
    num = residue_numeric(Id, n)
    out = [Case(f"n={n} d=0", exact == 0 and abs(num) < ABS_TOL_ZERO,
                {"exact": fraction_str(exact), "numeric": num})]
    for d in ds:
        st = supertrace_res(lift(Id, d), SphereModel(n + d))
        out.append(Case(f"n={n} d={d}", st == 0, {"supertrace": fraction_str(st)}))
    return out


def c1_operators(n: int, seed: int, mixed: int = 3) -> list:
    ops = [RhoExpr.power(-m) for m in range(1, n + 3)]
    ops.append(RhoExpr.power(-n, shift=1))
    rng = np.random.default_rng([seed, n])
    for _ in range(mixed):
        while True:
            terms = [
                (int(rng.integers(1, 6)) * (1 if rng.random() < 0.5 else -1),
                 int(rng.integers(0, 4)), int(rng.integers(-n - 2, 2)))
                for _ in range(3)
            ]
            e = RhoExpr.from_terms(terms)
            if len(e.terms) == 3:
                ops.append(e)
                break
    return ops


def _case_c1(p: RhoExpr, n: int, d: int) -> Case:
    rep = verify_c_equals_one(p, n, d)
    return Case(f"n={n} d={d} op={p}", rep.equal, {"lhs": fraction_str(rep.lhs), "rhs": fraction_str(rep.rhs)})


def _case_supertrace_instance(n: int) -> Case:
    # (rho^-n, (rho+1)^-n) on S^{2n+1}
    st = supertrace_res(lift(RhoExpr.power(-n), 1), SphereModel(n + 1))
    want = Fraction(n, math.factorial(n))
    return Case(f"n={n} supertrace", st == want, {"supertrace": fraction_str(st), "expected": fraction_str(want)})


def _case_logtrace(i: int, A: RhoExpr, n: int) -> Case:
    a, b = residual_trace(A, n), log_trace(A, n)
    return Case(f"{i:03d}", a == b, {"op": str(A), "n": n, "residual": fraction_str(a), "log": fraction_str(b)})


def _case_identity(n: int, order: int) -> Case:
    lhs = apply_rho_poly_to_log(rising_factorial(n), order, n)
    sz = szego_kernel_series(n, order)
    rhs = sz.scaled(math.factorial(n - 1))
    rhs_coeffs = (Fraction(0),) + rhs.coeffs[1:]
    bad = [k for k in range(order + 1) if lhs[k] != rhs_coeffs[k]]
    return Case(f"n={n}", not bad, {"order": order, "mismatches": bad[:5]})


def _case_poles(i: int, A: RhoExpr, n: int, depth: int) -> Case:
    poles = {p.location: p.residue for p in poles_and_residues(A, n, depth)}
    oracle = brute_force_poles(A, n, depth)
    worst = 0.0
    numeric_ok = True
    for loc, r in poles.items():
        num = residue_numeric(A, n, center=loc)
        err = abs(num - float(r)) / abs(float(r))
        worst = max(worst, err)
        numeric_ok &= err <= REL_TOL
    ok = poles == oracle and numeric_ok
    return Case(f"{i:03d}", ok, {
        "op": str(A), "n": n,
        "poles": [{"s": s, "residue": fraction_str(r)} for s, r in sorted(poles.items(), reverse=True)],
        "oracle_agrees": poles == oracle,
        "max_rel_err": worst,
    })


def _case_regulator(key: str, A: RhoExpr, n: int, shifts: tuple) -> Case:
    exact = [residual_trace(A, n, regulator_shift=a) for a in shifts]
    num = [residue_numeric(A, n, regulator_shift=a) for a in shifts]
    spread = max(num) - min(num)
    ok = len(set(exact)) == 1 and spread < REL_TOL and all(numeric_close(v, exact[0]) for v in num)
    return Case(key, ok, {"op": str(A), "n": n, "exact": [fraction_str(e) for e in exact], "numeric": num, "spread": spread})


def _case_embed_independence(i: int, A: RhoExpr, n: int, ds: tuple) -> Case:
    rhs = residual_trace(A, n)
    vals = [supertrace_res(lift(A, d), SphereModel(n + d)) for d in ds]
    return Case(f"{i:03d}", all(v == rhs for v in vals), {
        "op": str(A), "n": n, "trace": fraction_str(rhs), "supertraces": [fraction_str(v) for v in vals],
    })


# ------------------------------------------------------------------- suites

def suite_lemma(ns=range(1, 9), jobs: int = 1, **_) -> SuiteResult:
    return _suite("lemma", "tr_res rho^-n = 1/(n-1)!", [(_case_lemma, (n,)) for n in ns], jobs)


def suite_vanishing(ns=range(1, 9), ds=range(1, 4), jobs: int = 1, **_) -> SuiteResult:
    return _suite("vanishing", "tr_res Id = 0 and its Koszul lifts",
                  [(_case_vanishing, (n, tuple(ds))) for n in ns], jobs)


def suite_c1(ns=range(1, 7), ds=range(1, 4), seed: int = 0, jobs: int = 1, **_) -> SuiteResult:
    tasks = [(_case_c1, (p, n, d)) for n in ns for p in c1_operators(n, seed) for d in ds]
    tasks += [(_case_supertrace_instance, (n,)) for n in ns]
    return _suite("c1", "Koszul supertrace equals the residual trace (C = 1)", tasks, jobs)


def suite_logtrace(count: int = 200, ns=range(1, 6), seed: int = 0, jobs: int = 1, **_) -> SuiteResult:
    tasks = [(_case_logtrace, (i, A, n)) for i, (A, n) in enumerate(random_cases(seed, count, ns))]
    return _suite("logtrace", "log trace equals residual trace", tasks, jobs)


def suite_identity(ns=range(1, 7), order: int = 50, jobs: int = 1, **_) -> SuiteResult:
    return _suite("identity", "rho-Log identity", [(_case_identity, (n, order)) for n in ns], jobs)


def suite_poles(count: int = 100, ns=range(1, 6), depth: int = 3, seed: int = 1, jobs: int = 1, **_) -> SuiteResult:
    tasks = [(_case_poles, (i, A, n, depth)) for i, (A, n) in enumerate(random_cases(seed, count, ns))]
    return _suite("poles", "pole structure against a brute-force oracle", tasks, jobs)


def suite_regulator(ns=range(1, 6), count: int = 20, seed: int = 2, shifts=(0, 1, 2), jobs: int = 1, **_) -> SuiteResult:
    tasks = [(_case_regulator, (f"lemma n={n}", RhoExpr.power(-n), n, tuple(shifts))) for n in ns]
    tasks += [(_case_regulator, (f"random {i:03d}", A, n, tuple(shifts)))
              for i, (A, n) in enumerate(random_cases(seed, count, ns))]
    return _suite("regulator", "regulator independence", tasks, jobs)


def suite_embed_independence(count: int = 50, ns=range(1, 6), ds=range(1, 4), seed: int = 3,
                             jobs: int = 1, **_) -> SuiteResult:
    tasks = [(_case_embed_independence, (i, A, n, tuple(ds)))
             for i, (A, n) in enumerate(random_cases(seed, count, ns))]
    return _suite("embed-independence", "supertrace independent of the codimension", tasks, jobs)


def _gaussian_cases(seed: int, forms: int, compositions: int, tol: float) -> list:
    rng = np.random.default_rng(seed)
    cases = []
    worst = 0.0
    for i in range(forms):
        Q = random_form(rng, int(rng.integers(1, 4)))
        diff = abs(gaussian_integral_closed(Q) - gaussian_integral_numeric(Q, tol=1e-8))
        worst = max(worst, diff)
        cases.append(Case(f"form {i:03d}", diff < tol, {"d": Q.dim, "abs_diff": diff}))
    for i in range(compositions):
        r = int(rng.integers(1, 3))
        p, q = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        res = compose_phases(random_phase(rng, p, r), random_phase(rng, r, q))
        cases.append(Case(f"compose {i:03d}", res.min_real_eigenvalue >= -1e-12,
                          {"min_re_eig": res.min_real_eigenvalue, "kernel_dim": res.kernel_dim}))
    for d in (1, 2, 3):
        Q = random_form(rng, d)
        base = gaussian_integral_closed(Q)
        for xi in (1, 2, 10):
            target = base * xi ** (-d / 2)
            num = gaussian_integral_numeric(Q.scaled(xi), tol=1e-12 * abs(target))
            closed = gaussian_integral_closed(Q.scaled(xi))
            rel = max(abs(num - target), abs(closed - target)) / abs(target)
            cases.append(Case(f"scaling d={d} xi={xi:02d}", rel < 1e-9, {"rel_err": rel}))
    return cases


def suite_gaussian(count: int = 100, compositions: int = 50, seed: int = 4, tol: float = 1e-6, **_) -> SuiteResult:
    return _suite("gaussian", "Gaussian discriminant formula and composition",
                  [(_gaussian_cases, (seed, count, compositions, tol))], 1)


TWO_XDY = {"params": ["u", "v"], "pairs": [["u", "v"]], "form": "two_xdy"}


def _embedding_cases(seed: int, samples: int, tol: float) -> list:
    cases = []
    s3 = ce.standard_s3()
    e = ce.pad_to_sphere(s3, R=1, samples=ce.grid_samples(s3, 5))
    rep = ce.verify_embedding(e, s3, ce.grid_samples(s3, 9), tol=0, raise_on_fail=False)
    cases.append(Case("s3 identity", rep.passed and e.N == 2 and e.radius == 1,
                      {"R": fraction_str(e.radius), "pairs": e.N,
                       "form_dev": rep.max_form_deviation, "sphere_dev": rep.max_sphere_deviation}))
    p = ce.ContactPresentation.from_strings(TWO_XDY["params"], TWO_XDY["pairs"], "two_xdy")
    e = ce.pad_to_sphere(ce.antisymmetrize(p))
    rep = ce.verify_embedding(e, p, ce.random_samples(p, samples, seed), tol=tol, raise_on_fail=False)
    cases.append(Case("two_xdy", rep.passed, {
        "R": fraction_str(e.radius), "pairs": e.N, "samples": rep.samples,
        "form_dev": rep.max_form_deviation, "sphere_dev": rep.max_sphere_deviation}))
    bad = ce.Embedding(e.target_pairs[:1] + ((ce.parse_expr("u", ("u", "v")), ce.parse_expr("1.0001*v", ("u", "v"))),)
                       + e.target_pairs[2:], e.radius)
    rep = ce.verify_embedding(bad, p, ce.random_samples(p, samples, seed), tol=tol, raise_on_fail=False)
    cases.append(Case("corrupted rejected", not rep.passed,
                      {"form_dev": rep.max_form_deviation, "sphere_dev": rep.max_sphere_deviation}))
    return cases


def suite_embedding(count: int = 1000, seed: int = 5, tol: float = 1e-9, **_) -> SuiteResult:
    return _suite("embedding", "contact embedding into a round sphere",
                  [(_embedding_cases, (seed, count, tol))], 1)


SUITES = {
    "lemma": suite_lemma,
    "vanishing": suite_vanishing,
    "c1": suite_c1,
    "logtrace": suite_logtrace,
    "identity": suite_identity,
    "poles": suite_poles,
    "regulator": suite_regulator,
    "gaussian": suite_gaussian,
    "embedding": suite_embedding,
    "embed-independence": suite_embed_independence,
}

# acceptance numbering
CRITERIA = {
    1: "lemma", 2: "vanishing", 3: "c1", 4: "logtrace", 5: "identity",
    6: "poles", 7: "regulator", 8: "gaussian", 9: "embedding",
}

"""Command-line front end: ``szego-trace res|verify|embed|gaussian``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

import jsonschema
import numpy as np

from . import contact_embed as ce
from .gaussian_model import BudgetExceeded, NotPositive, gaussian_integral_closed, gaussian_integral_numeric
from .harness import CRITERIA, SUITES, numeric_close
from .rho_calculus import ParseError, RhoExpr, fraction_str
from .sphere_model import SphereModel
from .trace_engine import PoleProximity, default_depth, poles_and_residues, residual_trace, residue_numeric

log = logging.getLogger("szego_trace")

MAX_N, MAX_D, MAX_ORDER = 8, 3, 200

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

EMBED_SCHEMA = {
    "type": "object",
    "required": ["params", "pairs"],
    "additionalProperties": False,
    "properties": {
        "params": {"type": "array", "minItems": 1, "items": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"}},
        "pairs": {
            "type": "array",
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "string"}},
        },
        "form": {"enum": ["two_xdy", "antisymmetric"]},
        "samples": {
            "oneOf": [
                {"type": "object", "required": ["grid"], "additionalProperties": False,
                 "properties": {"grid": {"type": "integer", "minimum": 2}}},
                {"type": "object", "required": ["random"], "additionalProperties": False,
                 "properties": {"random": {"type": "integer", "minimum": 1}, "seed": {"type": "integer"}}},
            ]
        },
        "domain": {
            "type": "object",
            "additionalProperties": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}},
        },
        "radius": {"type": "number", "exclusiveMinimum": 0},
        "embedding": {
            "type": "array",
            "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "string"}},
        },
    },
}

_ENTRY = {"oneOf": [{"type": "number"}, {"type": "array", "minItems": 2, "maxItems": 2, "items": {"type": "number"}}]}

GAUSSIAN_SCHEMA = {
    "type": "object",
    "required": ["matrix"],
    "additionalProperties": False,
    "properties": {
        "matrix": {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _ENTRY}},
        "xi": {"type": "number", "exclusiveMinimum": 0},
    },
}


class UsageError(ValueError):
    pass


# -------------------------------------------------------------- arguments

def parse_range(text: str, upper: int, name: str) -> list[int]:
    """``3``, ``1..6`` or ``1,3,5``."""
    out: list[int] = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"bad range for --{name}: {text!r}") from None
    if not out or min(out) < 1 or max(out) > upper:
        raise UsageError(f"--{name} must lie in 1..{upper}, got {text!r}")
    return sorted(set(out))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float)
    common.add_argument("--seed", type=int)

    parser = argparse.ArgumentParser(prog="szego-trace", description="Residual traces on odd spheres.")
    sub = parser.add_subparsers(dest="command", required=True)

    res = sub.add_parser("res", parents=[common], help="residual trace of one operator")
    res.add_argument("--op", required=True)
    res.add_argument("--n", required=True, type=int)
    res.add_argument("--poles", type=int, metavar="K", help="also list poles down to s = 1-K")

    ver = sub.add_parser("verify", parents=[common], help="run a verification suite")
    ver.add_argument("suite", choices=sorted(SUITES) + ["all"])
    ver.add_argument("--n")
    ver.add_argument("--d")
    ver.add_argument("--order", type=int)
    ver.add_argument("--count", type=int, help="number of random cases")
    ver.add_argument("--jobs", type=int, default=1)

    emb = sub.add_parser("embed", parents=[common], help="embed a contact presentation in a sphere")
    emb.add_argument("input")
    emb.add_argument("--grid", type=int, default=101, help="grid density for the radius search")

    gau = sub.add_parser("gaussian", parents=[common], help="complex Gaussian integral")
    gau.add_argument("input")
    return parser


# ------------------------------------------------------------- commands

def command_res(args) -> tuple[dict, bool]:
    A = RhoExpr.parse(args.op)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    sphere = SphereModel(args.n)
    tol = args.tol if args.tol is not None else 1e-8
    exact = residual_trace(A, sphere)
    rec: dict = {"command": "res", "op": str(A), "n": args.n, "exact": fraction_str(exact)}
    warnings = []
    radius = 0.5
    while True:
        try:
            num = residue_numeric(A, sphere, radius=radius)
            break
        except PoleProximity as exc:
            warnings.append({"warning": "PoleProximity", "pole": exc.pole, "radius": radius})
            radius /= 2
    rec["numeric"] = num
    ok = numeric_close(num, exact, rel=tol, zero_abs=min(tol, 1e-10))
    if args.poles is not None:
        poles = poles_and_residues(A, sphere, args.poles if args.poles > 0 else default_depth(sphere))
        rec["poles"] = [{"s": p.location, "residue": fraction_str(p.residue)} for p in poles]
    if warnings:
        rec["warnings"] = warnings
    rec["status"] = "pass" if ok else "fail"
    return rec, ok


def command_verify(args) -> tuple[dict, bool]:
    kw: dict = {"jobs": max(1, args.jobs)}
    if args.n:
        kw["ns"] = parse_range(args.n, MAX_N, "n")
    if args.d:
        kw["ds"] = parse_range(args.d, MAX_D, "d")
    if args.order is not None:
        if not 1 <= args.order <= MAX_ORDER:
            raise UsageError(f"--order must lie in 1..{MAX_ORDER}")
        kw["order"] = args.order
    for name in ("seed", "count", "tol"):
        if getattr(args, name) is not None:
            kw[name] = getattr(args, name)
    names = [CRITERIA[i] for i in sorted(CRITERIA)] + ["embed-independence"] if args.suite == "all" else [args.suite]
    suites = []
    for name in names:
        log.info("running suite %s", name)
        result = SUITES[name](**kw)
        log.info("suite %s: %s in %.2fs", name, "pass" if result.passed else "fail", result.elapsed)
        suites.append(result)
    ok = all(s.passed for s in suites)
    rec = {"command": "verify", "suite": args.suite, "status": "pass" if ok else "fail",
           "suites": [s.as_dict() for s in suites]}
    crit = {v: k for k, v in CRITERIA.items()}
    for s in rec["suites"]:
        if s["suite"] in crit:
            s["criterion"] = crit[s["suite"]]
    return rec, ok


def _load_json(path: str, schema: dict) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(schema).iter_errors(data))
    if err is not None:
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise SchemaError(pointer, err.message)
    return data


class SchemaError(UsageError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"schema error at {pointer}: {message}")


def _jsonable(v):
    if isinstance(v, Fraction):
        return fraction_str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def command_embed(args) -> tuple[dict, bool]:
    data = _load_json(args.input, EMBED_SCHEMA)
    form = data.get("form", "two_xdy")
    try:
        p = ce.ContactPresentation.from_strings(data["params"], data["pairs"], form, data.get("domain"))
        anti = ce.antisymmetrize(p) if form == "two_xdy" else p
        if not anti.pairs:
            raise ce.EmptyPresentation("presentation has no pairs")
    except ce.ExpressionError as exc:
        raise UsageError(str(exc)) from None
    sampling = data.get("samples", {"random": 1000})
    if "grid" in sampling:
        samples = ce.grid_samples(p, sampling["grid"])
    else:
        seed = sampling.get("seed", args.seed if args.seed is not None else 0)
        samples = ce.random_samples(p, sampling["random"], seed)
    tol = args.tol if args.tol is not None else 1e-9
    radius = data.get("radius")
    if radius is not None:
        radius = Fraction(str(radius))
    rec: dict = {"command": "embed", "input": os.path.basename(args.input), "form": form}
    try:
        if "embedding" in data:
            target = tuple((ce.parse_expr(x, p.params), ce.parse_expr(y, p.params)) for x, y in data["embedding"])
            if radius is None:
                raise UsageError("an explicit embedding needs a radius")
            emb = ce.Embedding(target, radius)
        else:
            # an explicit radius only needs the radicand checked where we verify
            emb = ce.pad_to_sphere(anti, R=radius, samples=samples if radius is not None else None, grid=args.grid)
    except ce.RadicandNonpositive as exc:
        rec.update(status="fail", error="RadicandNonpositive", R=fraction_str(exc.radius),
                   sample=_jsonable(exc.sample))
        return rec, False
    report = ce.verify_embedding(emb, p, samples, tol=tol, raise_on_fail=False)
    rec.update(
        status="pass" if report.passed else "fail",
        R=_jsonable(emb.radius),
        N=emb.N,
        pairs=[[str(x), str(y)] for x, y in emb.target_pairs],
        samples=report.samples,
        tol=tol,
        max_form_deviation=report.max_form_deviation,
        max_sphere_deviation=report.max_sphere_deviation,
        worst_sample=[float(v) for v in report.worst_sample],
    )
    return rec, report.passed


def command_gaussian(args) -> tuple[dict, bool]:
    data = _load_json(args.input, GAUSSIAN_SCHEMA)
    rows = data["matrix"]
    M = np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in row] for row in rows])
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SchemaError("/matrix", "matrix must be square")
    M = M * data.get("xi", 1)
    tol = args.tol if args.tol is not None else 1e-10
    rec: dict = {"command": "gaussian", "input": os.path.basename(args.input), "dimension": int(M.shape[0])}
    try:
        closed = gaussian_integral_closed(M)
        numeric = gaussian_integral_numeric(M, tol=tol)
    except NotPositive as exc:
        rec.update(status="fail", error="NotPositive", message=str(exc))
        return rec, False
    except BudgetExceeded as exc:
        rec.update(status="fail", error="BudgetExceeded", message=str(exc))
        return rec, False
    except ValueError as exc:
        raise SchemaError("/matrix", str(exc)) from None
    diff = abs(closed - numeric)
    ok = diff <= max(tol, 1e-6)
    rec.update(
        status="pass" if ok else "fail",
        closed=[closed.real, closed.imag],
        numeric=[numeric.real, numeric.imag],
        difference=diff,
        tol=tol,
    )
    return rec, ok


COMMANDS = {"res": command_res, "verify": command_verify, "embed": command_embed, "gaussian": command_gaussian}


# ------------------------------------------------------------- rendering

def _table(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows)


def render_text(rec: dict) -> str:
    if rec.get("command") == "verify":
        lines = []
        summary = [["suite", "criterion", "passed", "status"]]
        for s in rec["suites"]:
            summary.append([s["suite"], str(s.get("criterion", "-")), f"{s['passed']}/{s['total']}", s["status"]])
        lines.append(_table(summary))
        for s in rec["suites"]:
            bad = [c for c in s["cases"] if c["status"] == "fail"]
            for c in bad:
                extra = ", ".join(f"{k}={v}" for k, v in c.items() if k not in ("key", "status"))
                lines.append(f"FAIL {s['suite']} {c['key']}: {extra}")
        lines.append(f"overall: {rec['status']}")
        return "\n".join(lines)
    rows = []
    for k, v in rec.items():
        if k == "poles":
            continue
        rows.append([k, json.dumps(v) if isinstance(v, (list, dict)) else str(v)])
    out = _table(rows)
    if rec.get("poles"):
        out += "\n\n" + _table([["s", "residue"]] + [[str(p["s"]), p["residue"]] for p in rec["poles"]])
    return out


def emit(rec: dict, fmt: str, out: str | None):
    text = json.dumps(rec, sort_keys=True, indent=2) if fmt == "json" else render_text(rec)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _configure_logging():
    level = os.environ.get("SZEGO_TRACE_LOG")
    if level:
        logging.basicConfig(
            level=getattr(logging, level.upper(), logging.DEBUG),
            format="%(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        rec, ok = COMMANDS[args.command](args)
    except ParseError as exc:
        err = {"command": args.command, "error": "ParseError", "column": exc.column, "message": str(exc)}
        if args.format == "json":
            emit(err, "json", args.out)
        else:
            print(f"error: {exc}", file=sys.stderr)
            print(f"  {exc.text}\n  {' ' * (exc.column - 1)}^", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        err = {"command": args.command, "error": "SchemaError", "path": exc.pointer, "message": str(exc)}
        if args.format == "json":
            emit(err, "json", args.out)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ce.ExpressionError, ce.EmptyPresentation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit(rec, args.format, args.out)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

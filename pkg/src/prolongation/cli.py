"""Command-line driver: ``verify``, ``derive``, ``conserve`` and ``parse``.

Exit codes: 0 no failures, 1 at least one failed check, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import conserve as cs
from .catalog import BUILTIN_NAMES, SystemError_, load_system
from .checks import run_checks
from .dsl import DSLError, emit_system, parse_system
from .engine import pfaffians, riccati_chart, subchart_curvature, trace_closure
from .exterior import render_form
from .report import CheckResult, Report


class InputError(Exception):
    pass


def resolve_system(selector: str):
    if selector in BUILTIN_NAMES:
        return load_system(selector)
    path = Path(selector)
    if path.suffix == ".eds" or path.exists():
        try:
            text = path.read_text()
        except OSError as exc:
            raise InputError(f"cannot read {selector}: {exc.strerror}") from None
        try:
            return parse_system(text)
        except DSLError as exc:
            raise InputError(f"{selector}:{exc.line}:{exc.col}: {exc.message}") from None
    raise InputError(f"unknown system {selector!r}; expected one of {', '.join(BUILTIN_NAMES)} or a .eds file")


def _emit(report: Report, fmt: str, out):
    out.write(report.to_json() + "\n" if fmt == "json" else report.to_text())


# ---------------------------------------------------------------- verify

def cmd_verify(args, out) -> int:
    systems = [resolve_system(s) for s in args.system]
    report = Report([s.name for s in systems]).stamp()
    for sys_ in systems:
        try:
            run_checks(sys_, args.checks, report)
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    _emit(report, args.format, out)
    return 1 if report.failed else 0


# ---------------------------------------------------------------- derive

def derive_chart(sys_, pivot: int) -> dict:
    if not 1 <= pivot <= sys_.dim:
        raise InputError(f"pivot {pivot} out of range 1..{sys_.dim} for {sys_.name}")
    c = riccati_chart(pfaffians(sys_), pivot)
    dec = trace_closure(c)
    theta = subchart_curvature(c)
    return {
        "system": sys_.name,
        "pivot": pivot,
        "variables": {r: f"{num}/{den}" for r, (num, den) in c.ratios.items()},
        "forms": {g.name: render_form(f) for g, f in c.basis},
        "subconnection": [[render_form(e) for e in row] for row in c.subconnection.rows],
        "trace": render_form(c.trace),
        "trace_closure": render_form(dec.substituted),
        "curvature": [[render_form(e) for e in row] for row in theta.rows],
    }


def derive_text(data: dict) -> str:
    lines = [f"# {data['system']} Riccati chart at pivot {data['pivot']}"]
    lines += [f"{r} = {q}" for r, q in data["variables"].items()]
    lines += [f"{k} = {v}" for k, v in data["forms"].items()]
    for i, row in enumerate(data["subconnection"], 1):
        for j, e in enumerate(row, 1):
            lines.append(f"Omega[{i},{j}] = {e}")
    lines.append(f"trace = {data['trace']}")
    lines.append(f"d(trace)/3 = {data['trace_closure']}")
    for i, row in enumerate(data["curvature"], 1):
        for j, e in enumerate(row, 1):
            lines.append(f"Theta[{i},{j}] = {e}")
    return "\n".join(lines) + "\n"


def cmd_derive(args, out) -> int:
    data = derive_chart(resolve_system(args.system[0]), args.pivot)
    out.write(json.dumps(data, indent=2) + "\n" if args.format == "json" else derive_text(data))
    return 0


# ---------------------------------------------------------------- conserve

def _load_coeffs(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be an object")
    for key in ("a1", "a2"):
        if key not in data:
            raise InputError(f"{path}: missing {key!r}")
    return data


def _coefficient(spec, key: str):
    """``(exact constant or None, GridFn)`` from a coefficient entry."""
    if not isinstance(spec, dict):
        raise InputError(f"{key}: expected an object with 'const' or 'grid'")
    try:
        if "const" in spec:
            v = Fraction(str(spec["const"]))
            return v, cs.GridFn.constant(float(v))
        if "grid" in spec:
            return None, cs.GridFn(float(spec.get("x0", 0.0)), float(spec["h"]), np.asarray(spec["grid"], dtype=float))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{key}: {exc}") from None
    raise InputError(f"{key}: expected 'const' or 'grid'")


def cmd_conserve(args, out) -> int:
    if not args.coeffs:
        raise InputError("conserve needs --coeffs")
    data = _load_coeffs(args.coeffs)
    c1, g1 = _coefficient(data["a1"], "a1")
    c2, g2 = _coefficient(data["a2"], "a2")
    N = args.order if args.order is not None else data.get("N", 2)
    etas = args.etas if args.etas is not None else data.get("etas", [10, 20, 40, 80])
    if not isinstance(N, int) or N < 1:
        raise InputError("order N must be a positive integer")
    if c1 is not None and c2 is not None:
        g1, g2 = cs.GridFn.constant(float(c1)), cs.GridFn.constant(float(c2))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = cs.residual_scaling_check(g1, g2, N, etas)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    report = Report(["conserve"]).stamp()
    if c1 is not None and c2 is not None and c1 != 0:
        ser = cs.density_solve_constant(N, c1, c2)
        dens = {f"I{n}": str(i) for n, i in enumerate(ser.I, 1)}
    else:
        Y = cs.integrate_densities(g1, g2, N)
        idx = np.linspace(0, len(g1) - 1, 5).astype(int)
        dens = {f"I{n}": {f"{g1.xs[j]:.4g}": float(g2.values[j] * Y[n - 1][j]) for j in idx} for n in range(1, N + 1)}
    report.add(CheckResult("conserve", "densities", "pass", json.dumps(dens, sort_keys=True)))
    ok = res.within(0.15)
    slope = "exact zero residual" if res.exact_zero else f"slope {res.slope:.4f}"
    report.add(CheckResult("conserve", f"residual-N{N}", "pass" if ok else "fail",
                           f"{slope} (expected {res.expected} +/- 0.15)",
                           diff="" if ok else f"measured {res.slope}, residuals {res.residuals}"))
    if args.format == "json":
        _emit(report, "json", out)
    else:
        for k, v in dens.items():
            out.write(f"{k} = {v}\n")
        out.write(f"residual {slope}, expected {res.expected} +/- 0.15: {'pass' if ok else 'fail'}\n")
    return 1 if report.failed else 0


# ---------------------------------------------------------------- parse

def cmd_parse(args, out) -> int:
    for path in args.files:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {path}: {exc.strerror}") from None
        try:
            sys_ = parse_system(text)
        except DSLError as exc:
            raise InputError(f"{path}:{exc.line}:{exc.col}: {exc.message}") from None
        out.write(emit_system(sys_))
    return 0


# ---------------------------------------------------------------- entry point

def _csv_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad eta list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prolong", description="Prolongation structures: verify, derive, conserve.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--system", action="append", default=None, help="sl2r, o3, su3 or a .eds file (repeatable)")
    v.add_argument("--checks", default="all", help="comma-separated categories or check ids, or 'all'")
    v.add_argument("--format", choices=("text", "json"), default="text")

    dv = sub.add_parser("derive", help="print a Riccati chart and its sub-connection")
    dv.add_argument("--system", action="append", required=True)
    dv.add_argument("--pivot", type=int, required=True)
    dv.add_argument("--format", choices=("text", "json"), default="text")

    c = sub.add_parser("conserve", help="conserved densities and residual scaling")
    c.add_argument("--coeffs", help="JSON coefficient file")
    c.add_argument("--order", type=int)
    c.add_argument("--etas", type=_csv_floats)
    c.add_argument("--format", choices=("text", "json"), default="text")

    ps = sub.add_parser("parse", help="lint system descriptions and print their normal form")
    ps.add_argument("files", nargs="+")
    return p


COMMANDS = {"verify": cmd_verify, "derive": cmd_derive, "conserve": cmd_conserve, "parse": cmd_parse}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.command == "verify" and not args.system:
        args.system = list(BUILTIN_NAMES)
    try:
        return COMMANDS[args.command](args, out)
    except (InputError, SystemError_) as exc:
        err.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

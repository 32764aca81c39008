"""Command-line front end.

Exit codes: 0 = valid/true/pass, 1 = invalid/false/fail, 2 = input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .algebroid import bracket, pullback_algebroid, validate
from .connection import bianchi_identities_check, cartan_identities_check
from .fixtures import BUILTIN_NAMES, builtin
from .forms import (
    exterior_derivative,
    exterior_derivative_intrinsic,
    interior,
    lie_derivative,
    maurer_cartan_check,
    wedge,
)
from .idseds import caveat as ids_caveat
from .idseds import eds_check, involutive_bracket, involutive_cartan
from .report import Report
from .schema import (
    Declaration,
    DeclarationError,
    dumps,
    export_declaration,
    load_map,
    read_declaration,
)


class UsageError(Exception):
    pass


def _load(args) -> Declaration:
    if args.fixture:
        if args.file:
            raise UsageError("give either FILE or --fixture, not both")
        try:
            return Declaration.from_fixture(builtin(args.fixture))
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if not args.file:
        raise UsageError("a declaration FILE or --fixture NAME is required")
    return read_declaration(args.file)


def _lookup(table: dict, name: str, kind: str):
    if name not in table:
        known = ", ".join(sorted(table)) or "none"
        raise UsageError(f"unknown {kind} {name!r} (known: {known})")
    return table[name]


def _emit(args, text: str, payload: dict) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _emit_report(args, rep: Report) -> int:
    _emit(args, rep.text(), rep.to_json())
    return 0 if rep.passed else 1


# -- subcommands ------------------------------------------------------------


def cmd_validate(args) -> int:
    return _emit_report(args, validate(_load(args).algebroid))


def cmd_bracket(args) -> int:
    decl = _load(args)
    u = _lookup(decl.sections, args.u, "section")
    v = _lookup(decl.sections, args.v, "section")
    res = bracket(decl.algebroid, u, v)
    _emit(args, f"[{args.u},{args.v}] = {res.text()}",
          {"operation": "bracket", "result": res.text(), "coefficients": [str(c) for c in res.coeffs]})
    return 0


def _form_payload(op: str, w) -> dict:
    return {
        "operation": op,
        "degree": w.degree,
        "result": w.text(),
        "terms": [{"indices": [i + 1 for i in k], "coeff": str(c)} for k, c in w.coeffs.items()],
    }


def cmd_d(args) -> int:
    decl = _load(args)
    w = _lookup(decl.forms, args.form, "form")
    dw = exterior_derivative(w)
    agree = dw == exterior_derivative_intrinsic(w)
    payload = _form_payload("d", dw)
    payload["oracle_agrees"] = agree
    payload["closed"] = dw.is_zero()
    text = f"d {args.form} = {dw.text()}"
    if not agree:
        text += "\nwarning: coefficient formula and invariant formula disagree"
    _emit(args, text, payload)
    return 0 if agree else 1


def cmd_wedge(args) -> int:
    decl = _load(args)
    a = _lookup(decl.forms, args.a, "form")
    b = _lookup(decl.forms, args.b, "form")
    res = wedge(a, b)
    _emit(args, f"{args.a} /\\ {args.b} = {res.text()}", _form_payload("wedge", res))
    return 0


def cmd_ip(args) -> int:
    decl = _load(args)
    z = _lookup(decl.sections, args.section, "section")
    w = _lookup(decl.forms, args.form, "form")
    res = interior(z, w)
    _emit(args, f"i_{args.section} {args.form} = {res.text()}", _form_payload("interior", res))
    return 0


def cmd_lie(args) -> int:
    decl = _load(args)
    z = _lookup(decl.sections, args.section, "section")
    w = _lookup(decl.forms, args.form, "form")
    res = lie_derivative(z, w)
    _emit(args, f"L_{args.section} {args.form} = {res.text()}", _form_payload("lie", res))
    return 0


def cmd_mc_check(args) -> int:
    return _emit_report(args, maurer_cartan_check(_load(args).algebroid))


def cmd_pullback(args) -> int:
    decl = _load(args)
    try:
        with open(args.map, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DeclarationError(f"cannot read {args.map}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DeclarationError(f"{args.map}: invalid JSON ({exc.msg})") from None
    h, anchor = load_map(data, decl.algebroid)
    P = pullback_algebroid(decl.algebroid, h, anchor)
    rep = validate(P)
    exported = export_declaration(Declaration(P))
    text = rep.text() + "\n" + dumps(exported)
    _emit(args, text, {"declaration": exported, "validation": rep.to_json()})
    return 0 if rep.passed else 1


def cmd_ids_check(args) -> int:
    decl = _load(args)
    D = _lookup(decl.ids, args.ids, "ids")
    methods = ["bracket", "cartan", "eds"] if args.method == "all" else [args.method]
    verdicts = {}
    lines = []
    payload: dict = {"ids": args.ids, "methods": {}}
    caveat = None
    for m in methods:
        if m == "bracket":
            v = involutive_bracket(D)
            verdicts[m] = v.involutive
            caveat = v.caveat
            entry = {"involutive": v.involutive}
            line = f"bracket: {'involutive' if v.involutive else 'not involutive'}"
            if not v.involutive:
                entry["witness"] = v.witness_text()
                entry["residual"] = v.residual.text()
                line += f"; witness {v.witness_text()}; residual {v.residual.text()}"
        elif m == "cartan":
            w = involutive_cartan(D)
            verdicts[m] = w.involutive
            caveat = w.caveat
            entry = {"involutive": w.involutive}
            line = f"cartan: {'involutive' if w.involutive else 'not involutive'}"
            if w.involutive:
                omega = {}
                for k, row in enumerate(w.omega):
                    for l, f in enumerate(row):
                        key = f"Omega^{w.first_index + k + 1}_{w.first_index + l + 1}"
                        omega[key] = f.text()
                entry["omega"] = omega
                if omega:
                    line += "; " + "; ".join(f"{k} = {v}" for k, v in omega.items())
            else:
                b, c, al = w.violation
                key = f"A^{al + 1}_{b + 1}{c + 1}"
                entry["violation"] = {"alpha": al + 1, "b": b + 1, "c": c + 1,
                                      "value": str(w.violation_value)}
                line += f"; {key} = {w.violation_value}"
        else:
            ok = eds_check(D)
            verdicts[m] = ok
            entry = {"involutive": ok}
            line = f"eds: {'closed ideal' if ok else 'not closed'}"
        payload["methods"][m] = entry
        lines.append(line)
    agree = len(set(verdicts.values())) == 1
    involutive = all(verdicts.values())
    if len(methods) > 1:
        lines.append(f"agreement: {'yes' if agree else 'NO'}")
    if caveat is None:
        caveat = ids_caveat(D)
    lines.append(f"caveat: {caveat}")
    payload.update({"agree": agree, "involutive": involutive and agree, "caveat": caveat})
    _emit(args, "\n".join(lines), payload)
    return 0 if involutive and agree else 1


def cmd_conn_check(args) -> int:
    decl = _load(args)
    C = _lookup(decl.connections, args.connection, "connection")
    wanted = [s.strip() for s in args.identities.split(",") if s.strip()]
    for s in wanted:
        if s not in ("cartan", "bianchi"):
            raise UsageError(f"unknown identity family {s!r}")
    reports = []
    if "cartan" in wanted:
        reports.append(cartan_identities_check(C))
    if "bianchi" in wanted:
        reports.append(bianchi_identities_check(C))
    ok = all(r.passed for r in reports)
    _emit(args, "\n".join(r.text() for r in reports),
          {"connection": args.connection, "passed": ok, "reports": [r.to_json() for r in reports]})
    return 0 if ok else 1


def cmd_export(args) -> int:
    sys.stdout.write(dumps(export_declaration(_load(args))))
    return 0


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", nargs="?", help="declaration file (JSON)")
    common.add_argument("--fixture", choices=BUILTIN_NAMES, metavar="NAME",
                        help=f"use a builtin fixture ({', '.join(BUILTIN_NAMES)})")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(
        prog="glacalc",
        description="Exact calculus on generalized Lie algebroids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check antisymmetry, Jacobi and anchor compatibility")
    p = add("bracket", cmd_bracket, "bracket of two named sections")
    p.add_argument("--u", required=True)
    p.add_argument("--v", required=True)
    p = add("d", cmd_d, "exterior derivative of a named form")
    p.add_argument("--form", required=True)
    p = add("wedge", cmd_wedge, "wedge product of two named forms")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p = add("ip", cmd_ip, "interior product")
    p.add_argument("--section", required=True)
    p.add_argument("--form", required=True)
    p = add("lie", cmd_lie, "covariant Lie derivative")
    p.add_argument("--section", required=True)
    p.add_argument("--form", required=True)
    add("mc-check", cmd_mc_check, "Maurer-Cartan structure equations")
    p = add("pullback", cmd_pullback, "pull-back algebroid along a map file")
    p.add_argument("--map", required=True, help="JSON with source_coordinates, h, optional anchor")
    p = add("ids-check", cmd_ids_check, "involutivity of a named distribution")
    p.add_argument("--ids", required=True)
    p.add_argument("--method", choices=["bracket", "cartan", "eds", "all"], default="all")
    p = add("conn-check", cmd_conn_check, "Cartan and Bianchi identities of a connection")
    p.add_argument("--connection", required=True)
    p.add_argument("--identities", default="cartan,bianchi",
                   help="comma-separated subset of cartan,bianchi")
    add("export", cmd_export, "print the declaration in canonical form")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DeclarationError, UsageError) as exc:
        print(f"glacalc: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"glacalc: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

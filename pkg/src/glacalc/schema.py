"""JSON declaration files: schema check, loading, and canonical export.

Indices in files are 1-based; the Python API is 0-based.  Structure entries
with alpha < beta are completed antisymmetrically; entries with
alpha >= beta are kept verbatim so inconsistent input reaches ``validate``
instead of being silently repaired.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import jsonschema

from .algebroid import Algebroid, Section, SmoothMap, gla_from_lie_algebroid
from .connection import Connection
from .fixtures import Fixture
from .forms import Form
from .idseds import IDS
from .ratlinalg import FieldMatrix
from .symkernel import CoordinateSet, ExprSyntaxError, UnknownCoordinateError, ZeroDenominatorError


class DeclarationError(ValueError):
    pass


_EXPR = {"type": "string"}
_INDEX = {"type": "integer", "minimum": 1}

DECLARATION_SCHEMA: dict[str, Any] = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["coordinates", "rank"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "presentation": {"enum": ["base", "pullback"]},
        "coordinates": {"type": "array", "items": {"type": "string"}},
        "rank": {"type": "integer", "minimum": 0},
        "anchor": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["i", "alpha", "expr"],
                "additionalProperties": False,
                "properties": {"i": _INDEX, "alpha": _INDEX, "expr": _EXPR},
            },
        },
        "structure": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["gamma", "alpha", "beta", "expr"],
                "additionalProperties": False,
                "properties": {"gamma": _INDEX, "alpha": _INDEX, "beta": _INDEX, "expr": _EXPR},
            },
        },
        "h": {"type": "array", "items": _EXPR},
        "sections": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": _EXPR},
        },
        "forms": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    {"type": "array", "items": {"$ref": "#/definitions/term"}},
                    {
                        "type": "object",
                        "required": ["degree", "terms"],
                        "additionalProperties": False,
                        "properties": {
                            "degree": {"type": "integer", "minimum": 0},
                            "terms": {"type": "array", "items": {"$ref": "#/definitions/term"}},
                        },
                    },
                ]
            },
        },
        "ids": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["generators"],
                "additionalProperties": False,
                "properties": {
                    "generators": {"type": "array", "items": {"type": "array", "items": _EXPR}},
                    "completion": {"type": "array", "items": {"type": "array", "items": _EXPR}},
                },
            },
        },
        "connections": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["bundle_rank", "gamma"],
                "additionalProperties": False,
                "properties": {
                    "bundle_rank": {"type": "integer", "minimum": 0},
                    "gamma": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["a", "b", "alpha", "expr"],
                            "additionalProperties": False,
                            "properties": {"a": _INDEX, "b": _INDEX, "alpha": _INDEX, "expr": _EXPR},
                        },
                    },
                },
            },
        },
    },
    "definitions": {
        "term": {
            "type": "object",
            "required": ["indices", "coeff"],
            "additionalProperties": False,
            "properties": {"indices": {"type": "array", "items": _INDEX}, "coeff": _EXPR},
        }
    },
}

MAP_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["source_coordinates", "h"],
    "additionalProperties": False,
    "properties": {
        "source_coordinates": {"type": "array", "items": {"type": "string"}},
        "h": {"type": "array", "items": _EXPR},
        "anchor": DECLARATION_SCHEMA["properties"]["anchor"],
    },
}


@dataclass
class Declaration:
    algebroid: Algebroid
    sections: dict[str, Section] = field(default_factory=dict)
    forms: dict[str, Form] = field(default_factory=dict)
    ids: dict[str, IDS] = field(default_factory=dict)
    connections: dict[str, Connection] = field(default_factory=dict)

    @classmethod
    def from_fixture(cls, fx: Fixture) -> "Declaration":
        return cls(fx.algebroid, dict(fx.sections), dict(fx.forms), dict(fx.ids), dict(fx.connections))


def _check_schema(data: Any, schema: dict, what: str) -> None:
    try:
        jsonschema.validate(data, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise DeclarationError(f"{what} schema violation at {path}: {exc.message}") from None


def _parse(coords: CoordinateSet, text: str, where: str):
    try:
        return coords.parse(text)
    except (ExprSyntaxError, UnknownCoordinateError, ZeroDenominatorError) as exc:
        raise DeclarationError(f"{where}: {exc}") from None


def _in_range(value: int, bound: int, where: str) -> int:
    if not 1 <= value <= bound:
        raise DeclarationError(f"{where}: index {value} outside 1..{bound}")
    return value - 1


def _anchor(coords: CoordinateSet, p: int, entries: list, rows: int, where: str) -> FieldMatrix:
    grid = [[coords.zero()] * p for _ in range(rows)]
    for k, e in enumerate(entries):
        at = f"{where}[{k}]"
        i = _in_range(e["i"], rows, at + ".i")
        a = _in_range(e["alpha"], p, at + ".alpha")
        grid[i][a] = _parse(coords, e["expr"], at + ".expr")
    return FieldMatrix(coords, grid, cols=p)


def _structure(coords: CoordinateSet, p: int, entries: list):
    zero = coords.zero()
    L = [[[zero] * p for _ in range(p)] for _ in range(p)]
    literal = []
    for k, e in enumerate(entries):
        at = f"structure[{k}]"
        g = _in_range(e["gamma"], p, at + ".gamma")
        a = _in_range(e["alpha"], p, at + ".alpha")
        b = _in_range(e["beta"], p, at + ".beta")
        val = _parse(coords, e["expr"], at + ".expr")
        if a < b:
            L[g][a][b] = val
            L[g][b][a] = -val
        else:
            literal.append((g, a, b, val))
    for g, a, b, val in literal:
        L[g][a][b] = val
    return L


def load_declaration(data: Any) -> Declaration:
    _check_schema(data, DECLARATION_SCHEMA, "declaration")
    try:
        coords = CoordinateSet(data["coordinates"])
    except ValueError as exc:
        raise DeclarationError(f"coordinates: {exc}") from None
    p = data["rank"]
    anchor = _anchor(coords, p, data.get("anchor", []), len(coords), "anchor")
    L = _structure(coords, p, data.get("structure", []))
    A = Algebroid(coords, p, anchor, L, presentation=data.get("presentation", "base"),
                  name=data.get("name"))
    if "h" in data:
        comps = [_parse(coords, t, f"h[{k}]") for k, t in enumerate(data["h"])]
        if len(comps) != len(coords):
            raise DeclarationError(f"h: needs {len(coords)} components, got {len(comps)}")
        try:
            A = gla_from_lie_algebroid(A, SmoothMap(coords, coords, comps))
        except ZeroDenominatorError as exc:
            raise DeclarationError(f"h: {exc}") from None
        if data.get("name"):
            A = A.with_name(data["name"])
    decl = Declaration(A)

    def vector(items, where):
        if len(items) != p:
            raise DeclarationError(f"{where}: needs {p} coefficients, got {len(items)}")
        return Section(A, [_parse(coords, t, f"{where}[{k}]") for k, t in enumerate(items)])

    for name, items in data.get("sections", {}).items():
        decl.sections[name] = vector(items, f"sections.{name}")
    for name, block in data.get("forms", {}).items():
        if isinstance(block, dict):
            degree, terms = block["degree"], block["terms"]
        else:
            terms = block
            if not terms:
                raise DeclarationError(f"forms.{name}: empty term list needs an explicit degree")
            degree = len(terms[0]["indices"])
        pairs = []
        for k, t in enumerate(terms):
            at = f"forms.{name}[{k}]"
            if len(t["indices"]) != degree:
                raise DeclarationError(f"{at}: expected {degree} indices")
            idx = tuple(_in_range(i, p, at + ".indices") for i in t["indices"])
            pairs.append((idx, _parse(coords, t["coeff"], at + ".coeff")))
        decl.forms[name] = Form.from_terms(A, degree, pairs)
    for name, block in data.get("ids", {}).items():
        gens = [vector(g, f"ids.{name}.generators[{k}]") for k, g in enumerate(block["generators"])]
        comp = None
        if "completion" in block:
            comp = [vector(g, f"ids.{name}.completion[{k}]") for k, g in enumerate(block["completion"])]
        try:
            decl.ids[name] = IDS(A, gens, comp, name=name)
        except ValueError as exc:
            raise DeclarationError(f"ids.{name}: {exc}") from None
    for name, block in data.get("connections", {}).items():
        n = block["bundle_rank"]
        gamma = {}
        for k, e in enumerate(block["gamma"]):
            at = f"connections.{name}.gamma[{k}]"
            key = (
                _in_range(e["a"], n, at + ".a"),
                _in_range(e["b"], n, at + ".b"),
                _in_range(e["alpha"], p, at + ".alpha"),
            )
            gamma[key] = _parse(coords, e["expr"], at + ".expr")
        decl.connections[name] = Connection(A, n, gamma, name=name)
    return decl


def read_declaration(path: str) -> Declaration:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DeclarationError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DeclarationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return load_declaration(data)


def load_map(data: Any, target: Algebroid):
    """Parse a pull-back map block -> (SmoothMap, anchor matrix or None)."""
    _check_schema(data, MAP_SCHEMA, "map")
    try:
        src = CoordinateSet(data["source_coordinates"])
    except ValueError as exc:
        raise DeclarationError(f"source_coordinates: {exc}") from None
    comps = [_parse(src, t, f"h[{k}]") for k, t in enumerate(data["h"])]
    if len(comps) != target.dim:
        raise DeclarationError(f"h: needs {target.dim} components, got {len(comps)}")
    anchor = None
    if "anchor" in data:
        anchor = _anchor(target.coords, target.rank, data["anchor"], len(src), "anchor")
    elif len(src) != target.dim:
        raise DeclarationError("anchor: required when source and target dimensions differ")
    return SmoothMap(src, target.coords, comps), anchor


# ---------------------------------------------------------------------------
# export


def _anchor_entries(M: FieldMatrix) -> list[dict]:
    return [
        {"i": i + 1, "alpha": a + 1, "expr": str(M[i, a])}
        for i in range(M.rows)
        for a in range(M.cols)
        if not M[i, a].is_zero()
    ]


def _structure_entries(A: Algebroid) -> list[dict]:
    p = A.rank
    out = []
    for g in range(p):
        for a in range(p):
            for b in range(a, p):
                e = A.L(g, a, b)
                if a < b:
                    if not e.is_zero():
                        out.append({"gamma": g + 1, "alpha": a + 1, "beta": b + 1, "expr": str(e)})
                    if A.L(g, b, a) != -e:
                        out.append({"gamma": g + 1, "alpha": b + 1, "beta": a + 1,
                                    "expr": str(A.L(g, b, a))})
                elif not e.is_zero():
                    out.append({"gamma": g + 1, "alpha": a + 1, "beta": a + 1, "expr": str(e)})
    out.sort(key=lambda d: (d["gamma"], min(d["alpha"], d["beta"]), d["alpha"] > d["beta"],
                            d["alpha"], d["beta"]))
    return out


def export_declaration(decl: Declaration) -> dict:
    A = decl.algebroid
    base = A
    out: dict[str, Any] = {}
    if A.origin is not None and A.origin.kind == "gla":
        base = A.origin.base
        out["h"] = [str(c) for c in A.origin.h.components]
    if A.name:
        out["name"] = A.name
    if A.presentation != "base":
        out["presentation"] = A.presentation
    out["coordinates"] = list(A.coords.names)
    out["rank"] = A.rank
    out["anchor"] = _anchor_entries(base.anchor)
    out["structure"] = _structure_entries(base)
    if decl.sections:
        out["sections"] = {k: [str(c) for c in s.coeffs] for k, s in decl.sections.items()}
    if decl.forms:
        out["forms"] = {
            k: {
                "degree": w.degree,
                "terms": [
                    {"indices": [i + 1 for i in key], "coeff": str(c)}
                    for key, c in w.coeffs.items()
                ],
            }
            for k, w in decl.forms.items()
        }
    if decl.ids:
        blocks = {}
        for k, D in decl.ids.items():
            b: dict[str, Any] = {"generators": [[str(c) for c in g.coeffs] for g in D.generators]}
            if D.completion is not None:
                b["completion"] = [[str(c) for c in g.coeffs] for g in D.completion]
            blocks[k] = b
        out["ids"] = blocks
    if decl.connections:
        out["connections"] = {
            k: {
                "bundle_rank": C.bundle_rank,
                "gamma": [
                    {"a": a + 1, "b": b + 1, "alpha": al + 1, "expr": str(C.gamma[a][b][al])}
                    for a in range(C.bundle_rank)
                    for b in range(C.bundle_rank)
                    for al in range(A.rank)
                    if not C.gamma[a][b][al].is_zero()
                ],
            }
            for k, C in decl.connections.items()
        }
    return out


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"

"""JSON documents for systems, verdicts and couplings.

System document::

    {
      "contents": [
        {"id": "q1", "kind": "categorical", "labels": [0, 1]},
        {"id": "q2", "kind": "categorical", "labels": ["a", "b", "c"],
         "vicinities": [["a", "b"], ["b", "c"]]}
      ],
      "contexts": [
        {"id": "c1", "measures": ["q1", "q2"],
         "atoms": [{"values": [0, "a"], "p": "1/2"}, {"values": [1, "c"], "p": "1/2"}]}
      ]
    }

Probabilities are strings (``"1/3"``, ``"0.25"``) or JSON numbers, read
exactly.  An atom may also be written as a ``[values, p]`` pair.
"""
from __future__ import annotations

import json
from decimal import Decimal
from fractions import Fraction
from typing import Any

from . import __version__
from .coupling import Coupling
from .errors import CbdError, ParseError
from .model import KINDS, ContextSpec, System, SystemSpec, ValueSpace, as_rational, validate_system

SCHEMA = "cbd-system/1"


def fraction_str(p: Fraction) -> str:
    """Canonical reduced rational string: ``"1/2"``, ``"0"``, ``"1"``."""
    p = Fraction(p)
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _label(x: Any, where: str):
    if isinstance(x, Decimal):
        return float(x)
    if isinstance(x, (str, int)) and not isinstance(x, bool):
        return x
    raise ParseError(f"{where}: labels must be strings or numbers, got {x!r}")


def _ident(x: Any, where: str):
    if isinstance(x, (str, int)) and not isinstance(x, bool):
        return x
    raise ParseError(f"{where}: ids must be strings or integers, got {x!r}")


def _need(obj: dict, key: str, kind: type, where: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    if key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind):
        raise ParseError(f"{where}.{key}: expected {kind.__name__}")
    return value


def loads_json(text: str) -> Any:
    try:
        return json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def parse_system_spec(doc: Any) -> SystemSpec:
    """Turn a decoded JSON document into an unvalidated :class:`SystemSpec`."""
    if not isinstance(doc, dict):
        raise ParseError("document root must be an object")
    contents = {}
    for i, entry in enumerate(_need(doc, "contents", list, "document")):
        where = f"contents[{i}]"
        cid = _ident(_need(entry, "id", object, where), f"{where}.id")
        if cid in contents:
            raise ParseError(f"{where}: duplicate content id {cid!r}")
        kind = entry.get("kind", "categorical")
        if kind not in KINDS:
            raise ParseError(f"{where}.kind: expected one of {KINDS}, got {kind!r}")
        labels = tuple(_label(x, f"{where}.labels") for x in _need(entry, "labels", list, where))
        vics = entry.get("vicinities")
        if vics is not None:
            if not isinstance(vics, list) or not all(isinstance(v, list) for v in vics):
                raise ParseError(f"{where}.vicinities: expected a list of label lists")
            vics = tuple(frozenset(_label(x, f"{where}.vicinities") for x in v) for v in vics)
        try:
            contents[cid] = ValueSpace(labels, kind, vics)
        except CbdError as exc:
            raise type(exc)(f"{where}: {exc}") from None
    contexts = []
    for i, entry in enumerate(_need(doc, "contexts", list, "document")):
        where = f"contexts[{i}]"
        cid = _ident(_need(entry, "id", object, where), f"{where}.id")
        measures = tuple(_ident(q, f"{where}.measures") for q in _need(entry, "measures", list, where))
        atoms = []
        for j, atom in enumerate(_need(entry, "atoms", list, where)):
            aw = f"{where}.atoms[{j}]"
            if isinstance(atom, dict):
                values, p = _need(atom, "values", list, aw), _need(atom, "p", object, aw)
            elif isinstance(atom, list) and len(atom) == 2 and isinstance(atom[0], list):
                values, p = atom
            else:
                raise ParseError(f"{aw}: expected {{'values': [...], 'p': ...}} or [values, p]")
            try:
                prob = as_rational(p)
            except CbdError as exc:
                raise ParseError(f"{aw}.p: {exc}") from None
            atoms.append((tuple(_label(x, f"{aw}.values") for x in values), prob))
        contexts.append(ContextSpec(cid, measures, atoms))
    return SystemSpec(contents, contexts)


def load_system_doc(doc: Any) -> System:
    return validate_system(parse_system_spec(doc))


def load_system(path) -> System:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return load_system_doc(loads_json(text))


def system_to_doc(system: System) -> dict:
    contents = []
    for q, space in system.contents.items():
        entry = {"id": q, "kind": space.kind, "labels": list(space.labels)}
        if space.vicinities is not None:
            entry["vicinities"] = [[x for x in space.labels if x in v] for v in space.vicinities]
        contents.append(entry)
    contexts = []
    for ctx in system.contexts:
        contexts.append({
            "id": ctx.id,
            "measures": list(ctx.measures),
            "atoms": [{"values": list(v), "p": fraction_str(p)} for v, p in ctx.atoms],
        })
    return {"schema": SCHEMA, "contents": contents, "contexts": contexts}


def _plain(x):
    return x if isinstance(x, (int, float, str)) else str(x)


def coupling_to_doc(c: Coupling) -> dict:
    """``(content, context)`` variables become objects; other ids are stringified."""
    def var(v):
        if isinstance(v, tuple) and len(v) == 2:
            return {"content": _plain(v[0]), "context": _plain(v[1])}
        return _plain(v)
    return {
        "variables": [var(v) for v in c.variables],
        "atoms": [{"values": list(vals), "p": fraction_str(p)} for vals, p in c.atoms],
    }


def coupling_from_doc(doc: Any) -> Coupling:
    if not isinstance(doc, dict):
        raise ParseError("coupling document must be an object")
    variables = []
    for i, v in enumerate(_need(doc, "variables", list, "witness")):
        if isinstance(v, dict):
            variables.append((_ident(v.get("content"), f"witness.variables[{i}]"),
                              _ident(v.get("context"), f"witness.variables[{i}]")))
        else:
            variables.append(_ident(v, f"witness.variables[{i}]"))
    atoms = []
    for j, a in enumerate(_need(doc, "atoms", list, "witness")):
        aw = f"witness.atoms[{j}]"
        values = tuple(_label(x, aw) for x in _need(a, "values", list, aw))
        atoms.append((values, as_rational(_need(a, "p", object, aw))))
    return Coupling(tuple(variables), tuple(atoms))


def verdict_to_doc(verdict, plan_name: str | None, route: str) -> dict:
    doc = {
        "status": verdict.status,
        "route": route,
        "plan": None,
        "witness": coupling_to_doc(verdict.witness) if verdict.witness is not None else None,
        "diagnostics": {
            "lp": verdict.lp_shape,
            "residual": fraction_str(verdict.residual),
        },
        "version": __version__,
    }
    if verdict.plan is not None:
        doc["plan"] = {"name": plan_name, "sizes": {str(q): n for q, n in verdict.plan.sizes().items()}}
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, sort_keys=False, ensure_ascii=False)

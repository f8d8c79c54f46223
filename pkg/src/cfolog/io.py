"""JSON file formats for finite structures, and sentence lists.

A structure file looks like::

    {
      "format": "cfolog-structure", "version": 1,
      "universe": ["a", "b"],
      "signature": {"relations": {"P": 1}, "functions": {"f": 1, "c": 0}},
      "moduli": {"P/0": [["1", "1/2^1"]]},
      "functions": {"f": {"a": "b", "b": "a"}, "c": {"": "a"}},
      "relations": {"P": {"a": "1/2^2", "b": "1"}}
    }

Argument tuples are written as comma-joined element names (the empty string
for 0-ary symbols).  A relation table may give a ``"*"`` entry used for every
tuple it does not list.  Without a ``d`` table the metric is discrete.
"""

from __future__ import annotations

import itertools
import json
from pathlib import Path
from typing import Any, Mapping

from .dyadic import Dyadic, parse_dyadic
from .formulas import Formula, Modulus, Signature, parse
from .semantics import FiniteStructure

__all__ = [
    "FormatError",
    "structure_from_dict",
    "structure_to_dict",
    "load_structure",
    "dump_structure",
    "read_sentences",
]

FORMAT = "cfolog-structure"


class FormatError(ValueError):
    pass


def _args_key(args: tuple) -> str:
    return ",".join(str(a) for a in args)


def _parse_modulus(steps) -> Modulus:
    try:
        return Modulus(tuple((parse_dyadic(str(e)), parse_dyadic(str(d))) for e, d in steps))
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad modulus {steps!r}: {exc}") from None


def structure_from_dict(doc: Mapping[str, Any]) -> FiniteStructure:
    if doc.get("format") != FORMAT:
        raise FormatError(f"expected format {FORMAT!r}")
    if doc.get("version") != 1:
        raise FormatError(f"unsupported version {doc.get('version')!r}")
    try:
        universe = [str(e) for e in doc["universe"]]
        sig_doc = doc.get("signature", {})
        rel_ar = {k: int(v) for k, v in sig_doc.get("relations", {}).items()}
        fun_ar = {k: int(v) for k, v in sig_doc.get("functions", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed structure header: {exc}") from None
    moduli = {}
    for key, steps in doc.get("moduli", {}).items():
        sym, _, i = key.partition("/")
        if not i.isdigit():
            raise FormatError(f"modulus key {key!r} must look like SYMBOL/INDEX")
        moduli[sym, int(i)] = _parse_modulus(steps)
    sig = Signature(rel_ar, fun_ar, moduli, sig_doc.get("metric", "d"))
    names = set(universe)

    def args_of(key: str, arity: int) -> tuple:
        parts = tuple(key.split(",")) if key else ()
        if len(parts) != arity or not set(parts) <= names:
            raise FormatError(f"bad argument tuple {key!r} for arity {arity}")
        return parts

    functions = {}
    for f, table in doc.get("functions", {}).items():
        if f not in fun_ar:
            raise FormatError(f"function {f!r} is not in the signature")
        out = {}
        for key, val in table.items():
            if str(val) not in names:
                raise FormatError(f"{f}({key}) = {val!r} is not an element")
            out[args_of(key, fun_ar[f])] = str(val)
        functions[f] = out
    relations = {}
    for r, table in doc.get("relations", {}).items():
        arity = sig.relations.get(r)
        if arity is None:
            raise FormatError(f"relation {r!r} is not in the signature")
        out = {}
        default = table.get("*")
        if default is not None:
            dv = parse_dyadic(str(default))
            for args in itertools.product(universe, repeat=arity):
                out[args] = dv
        for key, val in table.items():
            if key == "*":
                continue
            out[args_of(key, arity)] = parse_dyadic(str(val))
        relations[r] = out
    try:
        return FiniteStructure(sig, universe, functions, relations)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def structure_to_dict(M: FiniteStructure) -> dict:
    sig = M.signature
    doc = {
        "format": FORMAT,
        "version": 1,
        "universe": [str(e) for e in M.universe],
        "signature": {
            "relations": {k: v for k, v in sig.relations.items() if k != sig.metric},
            "functions": dict(sig.functions),
        },
        "functions": {
            f: {_args_key(a): str(v) for a, v in table.items()} for f, table in M.functions.items()
        },
        "relations": {
            r: {_args_key(a): str(v) for a, v in table.items()} for r, table in M.relations.items()
        },
    }
    if sig.metric != "d":
        doc["signature"]["metric"] = sig.metric
    trivial = Modulus.constant(Dyadic(1, 64))
    moduli = {
        f"{sym}/{i}": [[str(e), str(d)] for e, d in mod.steps]
        for (sym, i), mod in sorted(sig.moduli.items())
        if mod != trivial
    }
    if moduli:
        doc["moduli"] = moduli
    return doc


def load_structure(path: str | Path) -> FiniteStructure:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return structure_from_dict(doc)


def dump_structure(M: FiniteStructure, path: str | Path) -> None:
    Path(path).write_text(json.dumps(structure_to_dict(M), indent=2) + "\n")


def read_sentences(path: str | Path, signature: Signature | None = None) -> list[Formula]:
    """One formula per line; blank lines and lines starting with ``#`` are skipped."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse(line, signature))
    return out

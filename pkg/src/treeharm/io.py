"""JSON encodings for functions, regions, dyadic sets, atoms, kernels and CZ output."""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .czmax import CZOutput
from .funcspace import TailConstantFunction
from .hardy_bmo import Atom, AtomicDecomposition
from .measure import MeasureParams, ReferenceMeasure, Region, is_canonical
from .operators import FiniteKernel
from .tree import DyadicSet, TreeParams, cumulative_count


class MalformedInputError(ValueError):
    """Input JSON does not match the expected schema."""


def _require(obj: Any, key: str, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedInputError(f"missing field {key!r}")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise MalformedInputError(f"field {key!r} has the wrong type")
    return val


def _encode_float(x: float):
    return "inf" if math.isinf(x) else x


def _decode_float(x) -> float:
    if x in ("inf", "Infinity"):
        return math.inf
    if not isinstance(x, (int, float)) or isinstance(x, bool):
        raise MalformedInputError(f"expected a number, got {x!r}")
    return float(x)


# dyadic sets and regions


def dyadic_to_json(D: DyadicSet) -> dict:
    if D.is_whole:
        return {"kind": "whole"}
    return {"kind": D.kind, "vertex": D.vertex}


def dyadic_from_json(obj: dict) -> DyadicSet:
    kind = _require(obj, "kind", str)
    if kind == "whole":
        return DyadicSet.whole()
    if kind not in ("sector", "singleton"):
        raise MalformedInputError(f"unknown dyadic kind {kind!r}")
    v = _require(obj, "vertex", int)
    try:
        return DyadicSet.sector(v) if kind == "sector" else DyadicSet.singleton(v)
    except ValueError as e:
        raise MalformedInputError(str(e)) from None


def region_to_json(R: Region) -> dict:
    return {"sectors": sorted(R.sectors), "singletons": sorted(R.singletons)}


def region_from_json(obj: dict, tree: TreeParams) -> Region:
    sectors = _require(obj, "sectors", list)
    points = _require(obj, "singletons", list)
    if not all(isinstance(k, int) and k >= 0 for k in sectors + points):
        raise MalformedInputError("region vertices must be nonnegative integers")
    R = Region(frozenset(sectors), frozenset(points))
    if not is_canonical(tree, R):
        raise MalformedInputError("region not canonical")
    return R


# functions


def function_to_json(f: TailConstantFunction, mp: MeasureParams) -> dict:
    return {
        "q": f.q,
        "alpha": mp.alpha,
        "boundary_depth": f.boundary_depth,
        "values": [[k, float(v.real), float(v.imag)] for k, v in enumerate(f.values)],
    }


def function_from_json(obj: dict) -> tuple[TailConstantFunction, MeasureParams]:
    q = _require(obj, "q", int)
    alpha = _decode_float(_require(obj, "alpha"))
    N = _require(obj, "boundary_depth", int)
    rows = _require(obj, "values", list)
    try:
        mp = MeasureParams.of(q, alpha)
    except ValueError as e:
        raise MalformedInputError(str(e)) from None
    if N < 0:
        raise MalformedInputError("boundary_depth must be nonnegative")
    n = cumulative_count(mp.tree, N) + 1
    vals = np.zeros(n, dtype=complex)
    seen = np.zeros(n, dtype=bool)
    for row in rows:
        if not (isinstance(row, list) and len(row) in (2, 3) and isinstance(row[0], int)):
            raise MalformedInputError(f"bad value row {row!r}")
        k = row[0]
        if not 0 <= k < n:
            raise MalformedInputError(f"vertex {k} lies below the boundary depth {N}")
        if seen[k]:
            raise MalformedInputError(f"vertex {k} listed twice")
        im = _decode_float(row[2]) if len(row) == 3 else 0.0
        vals[k] = complex(_decode_float(row[1]), im)
        seen[k] = True
    if not seen.all():
        missing = int(np.flatnonzero(~seen)[0])
        raise MalformedInputError(f"values missing for {int((~seen).sum())} vertices (first: {missing})")
    return TailConstantFunction(mp.tree, N, vals), mp


# reference measures


def reference_to_json(sigma: ReferenceMeasure) -> dict:
    return {"radial_values": list(sigma.radial_values), "tail_ratio": sigma.tail_ratio}


def reference_from_json(obj: dict) -> ReferenceMeasure:
    vals = _require(obj, "radial_values", list)
    t = _decode_float(_require(obj, "tail_ratio"))
    try:
        return ReferenceMeasure(tuple(_decode_float(v) for v in vals), t)
    except ValueError as e:
        raise MalformedInputError(str(e)) from None


# atoms


def atom_to_json(a: Atom, mp: MeasureParams) -> dict:
    if a.kind == Atom.CONSTANT:
        return {"kind": "constant", "p": _encode_float(a.p)}
    return {
        "kind": "standard",
        "set": dyadic_to_json(a.D),
        "values": function_to_json(a.values, mp),
        "p": _encode_float(a.p),
    }


def atom_from_json(obj: dict) -> Atom:
    kind = _require(obj, "kind", str)
    p = _decode_float(obj.get("p", "inf"))
    if kind == "constant":
        return Atom.constant(p)
    if kind != "standard":
        raise MalformedInputError(f"unknown atom kind {kind!r}")
    D = dyadic_from_json(_require(obj, "set", dict))
    f, _ = function_from_json(_require(obj, "values", dict))
    return Atom.standard(D, f, p)


def decomposition_to_json(dec: AtomicDecomposition, mp: MeasureParams) -> list:
    return [[[c.real, c.imag], atom_to_json(a, mp)] for c, a in dec.terms]


def decomposition_from_json(obj: list) -> AtomicDecomposition:
    if not isinstance(obj, list):
        raise MalformedInputError("decomposition must be a list")
    terms = []
    for row in obj:
        if not (isinstance(row, list) and len(row) == 2 and isinstance(row[0], list) and len(row[0]) == 2):
            raise MalformedInputError(f"bad decomposition term {row!r}")
        terms.append((complex(_decode_float(row[0][0]), _decode_float(row[0][1])), atom_from_json(row[1])))
    return AtomicDecomposition(terms)


# kernels


def kernel_to_json(K: FiniteKernel) -> dict:
    return {"entries": [[z, x, v.real, v.imag] for (z, x), v in sorted(K.entries.items())]}


def kernel_from_json(obj: dict, tree: TreeParams) -> FiniteKernel:
    rows = _require(obj, "entries", list)
    entries = {}
    for row in rows:
        if not (isinstance(row, list) and len(row) in (3, 4) and all(isinstance(k, int) and k >= 0 for k in row[:2])):
            raise MalformedInputError(f"bad kernel entry {row!r}")
        im = _decode_float(row[3]) if len(row) == 4 else 0.0
        entries[(row[0], row[1])] = complex(_decode_float(row[2]), im)
    return FiniteKernel.from_entries(tree, entries)


# CZ output


def cz_to_json(out: CZOutput, mp: MeasureParams) -> dict:
    return {
        "lambda": out.lam,
        "Q": [dyadic_to_json(D) for D in out.Q],
        "F": region_to_json(out.F),
        "g": function_to_json(out.g, mp),
        "b_parts": [{"set": dyadic_to_json(D), "function": function_to_json(b, mp)} for D, b in out.b_parts],
    }


def cz_from_json(obj: dict) -> tuple[CZOutput, MeasureParams]:
    g, mp = function_from_json(_require(obj, "g", dict))
    parts = []
    for row in _require(obj, "b_parts", list):
        parts.append((dyadic_from_json(_require(row, "set", dict)), function_from_json(_require(row, "function", dict))[0]))
    out = CZOutput(
        _decode_float(_require(obj, "lambda")),
        [dyadic_from_json(D) for D in _require(obj, "Q", list)],
        region_from_json(_require(obj, "F", dict), mp.tree),
        g,
        parts,
    )
    return out, mp


def load_json(path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise MalformedInputError(f"{path}: {e}") from None


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_default)


def _default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot encode {type(o).__name__}")

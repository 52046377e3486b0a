"""JSON files for systems, solutions and witness sets.

System file::

    {"variables": ["x0", "x1", "h"], "groups": [["x0", "x1", "h"]],
     "homogenizing": ["h"], "equations": ["(1.0+0.0*i)*x0^2 + ..."]}

``homogenizing`` is optional.  Solution points store one list of
``[re, im]`` pairs per factor plus a status string.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ugen.algebra.poly import PolySystem, Ring
from ugen.algebra.text import format_poly, parse_poly
from ugen.tracking.points import MultiProjPoint


class FormatError(ValueError):
    pass


def write_atomic(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(path: str | os.PathLike, data: Any) -> None:
    write_atomic(path, json.dumps(data, indent=1, sort_keys=True, default=_jsonable) + "\n")


def load_json(path: str | os.PathLike) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


def ring_to_dict(ring: Ring) -> dict:
    out = {"variables": list(ring.variables),
           "groups": [list(ring.group_names(g)) for g in range(ring.ngroups)]}
    if any(h is not None for h in ring.homogenizing):
        out["homogenizing"] = [None if h is None else ring.variables[h] for h in ring.homogenizing]
    return out


def ring_from_dict(data: dict) -> Ring:
    try:
        groups = data["groups"]
    except KeyError:
        raise FormatError("system file needs a 'groups' list") from None
    if "variables" in data and sorted(data["variables"]) != sorted(v for g in groups for v in g):
        raise FormatError("'variables' and 'groups' name different variables")
    ring = Ring.from_names(groups, data.get("homogenizing"))
    if "variables" in data and list(ring.variables) != list(data["variables"]):
        raise FormatError("variable order must follow the groups")
    return ring


def system_to_dict(system: PolySystem, name: str | None = None) -> dict:
    out = ring_to_dict(system.ring)
    out["equations"] = [format_poly(p) for p in system]
    if name:
        out["name"] = name
    return out


def system_from_dict(data: dict) -> PolySystem:
    ring = ring_from_dict(data)
    eqs = data.get("equations")
    if not isinstance(eqs, list):
        raise FormatError("system file needs an 'equations' list")
    return PolySystem(ring, tuple(parse_poly(e, ring) for e in eqs))


def save_system(path, system: PolySystem, name: str | None = None) -> None:
    dump_json(path, system_to_dict(system, name))


def load_system(path) -> PolySystem:
    return system_from_dict(load_json(path))


def point_to_dict(p: MultiProjPoint) -> dict:
    factors = [[[float(z.real), float(z.imag)] for z in p.factor(g)] for g in range(p.nfactors)]
    return {"coordinates": factors, "status": p.status or "Success"}


def point_from_dict(data: dict, ring: Ring) -> MultiProjPoint:
    factors = data.get("coordinates")
    if not isinstance(factors, list) or len(factors) != ring.ngroups:
        raise FormatError(f"point needs {ring.ngroups} coordinate lists")
    x = np.zeros(ring.nvars, dtype=complex)
    for g, (members, vals) in enumerate(zip(ring.groups, factors)):
        if len(vals) != len(members):
            raise FormatError(f"factor {g} has {len(vals)} coordinates, expected {len(members)}")
        x[list(members)] = [complex(re, im) for re, im in vals]
    return MultiProjPoint(x, ring.groups, data.get("status"))


def solutions_to_dict(points: Sequence[MultiProjPoint], ring: Ring, **meta) -> dict:
    return {**meta, **ring_to_dict(ring), "points": [point_to_dict(p) for p in points]}


def save_solutions(path, points: Sequence[MultiProjPoint], ring: Ring, **meta) -> None:
    dump_json(path, solutions_to_dict(points, ring, **meta))


def load_solutions(path, ring: Ring) -> list[MultiProjPoint]:
    data = load_json(path)
    if not isinstance(data, dict) or not isinstance(data.get("points"), list):
        raise FormatError("solution file needs a 'points' list")
    return [point_from_dict(p, ring) for p in data["points"]]


def witness_to_dict(w) -> dict:
    return {**ring_to_dict(w.ring),
            "dim": w.dim,
            "equations": [format_poly(p) for p in w.F],
            "slice": [format_poly(p) for p in w.L],
            "points": [point_to_dict(p) for p in w.W],
            "warnings": list(w.warnings),
            "diagnostics": [d.to_dict() for d in w.diagnostics]}

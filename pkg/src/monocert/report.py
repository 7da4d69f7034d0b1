"""Stable JSON report schema shared by every CLI command."""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from . import __version__

SCHEMA_VERSION = 1


def jsonable(obj):
    """Plain-JSON form of the library's dataclasses, arrays, and scalars."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return float(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {"_type": type(obj).__name__}
        for f in dataclasses.fields(obj):
            out[f.name] = jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, frozenset, set)):
        items = list(obj)
        if isinstance(obj, (set, frozenset)):
            items = sorted(items, key=str)
        return [jsonable(v) for v in items]
    raise TypeError(f"cannot serialize {type(obj)!r}")


def build_report(command, seed, tolerances, payload, wall_ms):
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": list(command),
        "seed": int(seed),
        "tolerances": jsonable(tolerances),
        "payload": jsonable(payload),
        "wall_time_ms": float(wall_ms),
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def write_report(path: str, report: dict) -> None:
    with open(path, "w") as fh:
        fh.write(dump_report(report))


def load_report(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def reports_equal_modulo_walltime(a: dict, b: dict) -> bool:
    a = dict(a)
    b = dict(b)
    a.pop("wall_time_ms", None)
    b.pop("wall_time_ms", None)
    return json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

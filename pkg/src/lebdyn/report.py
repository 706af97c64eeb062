"""Deterministic serialization: JSON/CSV report writers and object round-trips.

Byte stability is a contract here. Floats are always rendered with 17
significant digits (enough to round-trip a double exactly), dict keys keep
insertion order, and nothing in this module consults the clock, the
environment, or random state.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

import numpy as np

from .cover_calc import Cover
from .dynamics import DynMap, RateSequence
from .errors import UsageError
from .metric_core import FiniteMetricSpace
from .rates import InequalityReport
from .systems import SystemSpec

SCHEMA_VERSION = 1

_MODE_NAMES = {0: "euclidean", 1: "max"}
_MODE_IDS = {v: k for k, v in _MODE_NAMES.items()}


def fmt_float(x: float) -> str:
    """17-significant-digit decimal form of a finite double."""
    return format(float(x), ".17g")


def _json_fragment(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        x = float(obj)
        # reports carry finite numbers; a stray inf/nan serializes as null
        # rather than producing invalid JSON
        out.append(fmt_float(x) if math.isfinite(x) else "null")
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(",")
            out.append(json.dumps(str(k)))
            out.append(":")
            _json_fragment(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        for i, v in enumerate(seq):
            if i:
                out.append(",")
            _json_fragment(v, out)
        out.append("]")
    else:
        raise UsageError(f"cannot serialize {type(obj).__name__} to JSON")


def json_text(obj: Any) -> str:
    """Compact JSON with insertion-ordered keys and 17-digit floats."""
    out: list[str] = []
    _json_fragment(obj, out)
    return "".join(out)


# -- CSV fragments -----------------------------------------------------------

RATE_COLUMNS = ("system", "cover_id", "n", "delta_n", "a_n", "capped")
INEQUALITY_COLUMNS = ("name", "lhs", "rhs", "slack", "tol", "pass",
                      "lhs_src", "rhs_src")


def rate_sequence_rows(system: str, cover_id: str, seq: RateSequence):
    """One CSV row per horizon step."""
    rows = []
    a = seq.a_n
    for i in range(seq.horizon):
        rows.append((system, cover_id, str(i + 1), fmt_float(seq.values[i]),
                     fmt_float(a[i]), "true" if seq.capped[i] else "false"))
    return rows


def inequality_rows(report: InequalityReport):
    rows = []
    for r in report.rows:
        rows.append((r.name,
                     "" if r.lhs is None else fmt_float(r.lhs),
                     "" if r.rhs is None else fmt_float(r.rhs),
                     "" if r.slack is None else fmt_float(r.slack),
                     fmt_float(r.tol),
                     "skip" if r.passed is None else ("true" if r.passed else "false"),
                     r.lhs_src, r.rhs_src))
    return rows


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


# -- object round-trips ------------------------------------------------------

def space_to_obj(space: FiniteMetricSpace) -> dict:
    """JSON-ready form: coordinates plus metric record, or a lower triangle."""
    obj: dict[str, Any] = {}
    if space._points is not None:
        obj["points"] = space._points
        obj["metric"] = {
            "mode": _MODE_NAMES[space._mode],
            "wraps": [bool(w) for w in space._wraps],
            "scale": space._scale,
        }
    else:
        D = space.matrix()
        obj["matrix"] = [D[i, : i + 1] for i in range(space.point_count)]
    if space.labels is not None:
        obj["labels"] = list(space.labels)
    return obj


def space_from_obj(obj: dict) -> FiniteMetricSpace:
    labels = obj.get("labels")
    if "points" in obj:
        met = obj.get("metric", {})
        mode = met.get("mode", "euclidean")
        if mode not in _MODE_IDS:
            raise UsageError(f"unknown metric mode {mode!r}")
        pts = np.asarray(obj["points"], dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        wraps = met.get("wraps")
        return FiniteMetricSpace(points=pts, wraps=wraps, mode=_MODE_IDS[mode],
                                 scale=float(met.get("scale", 1.0)),
                                 labels=labels)
    if "matrix" in obj:
        rows = obj["matrix"]
        n = len(rows)
        D = np.zeros((n, n), dtype=np.float64)
        for i, row in enumerate(rows):
            if len(row) == i + 1:      # lower triangle incl. diagonal
                D[i, : i + 1] = row
                D[: i + 1, i] = row
            elif len(row) == n:        # full square accepted as-is
                D[i, :] = row
            else:
                raise UsageError(
                    f"matrix row {i} has {len(row)} entries; expected {i + 1} "
                    f"(lower triangle) or {n} (full row)")
        return FiniteMetricSpace(matrix=D, labels=labels)
    raise UsageError("space object needs 'points' or 'matrix'")


def cover_to_obj(cover: Cover) -> dict:
    members = [np.flatnonzero(row) for row in cover.masks]
    return {"members": members}


def cover_from_obj(obj: dict, point_count: int) -> Cover:
    members = obj.get("members")
    if members is None:
        raise UsageError("cover object needs 'members'")
    return Cover(members, point_count)


def map_to_obj(f: DynMap) -> dict:
    return {"image": f.image}


def map_from_obj(obj: dict, point_count: int) -> DynMap:
    image = obj.get("image")
    if image is None:
        raise UsageError("map object needs 'image'")
    img = np.asarray(image, dtype=np.int64)
    return DynMap(image=img, point_count=point_count)


def spec_to_obj(spec: SystemSpec) -> dict:
    return {"family": spec.family, "params": dict(spec.params),
            "mesh_radii": list(spec.mesh_radii), "horizon": spec.horizon}


def spec_from_obj(obj: dict) -> SystemSpec:
    if not isinstance(obj, dict) or "family" not in obj:
        raise UsageError("system spec needs a 'family' field")
    family = obj["family"]
    if not isinstance(family, str):
        raise UsageError("'family' must be a string")
    params = obj.get("params", {})
    if not isinstance(params, dict):
        raise UsageError("'params' must be an object")
    radii = obj.get("mesh_radii", ())
    try:
        radii = tuple(float(r) for r in radii)
    except (TypeError, ValueError):
        raise UsageError("'mesh_radii' must be a list of numbers") from None
    horizon = obj.get("horizon", 0)
    if not isinstance(horizon, int) or isinstance(horizon, bool):
        raise UsageError("'horizon' must be an integer")
    return SystemSpec(family=family, params=dict(params),
                      mesh_radii=radii, horizon=horizon)


def load_json(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def write_text(path: str | None, text: str) -> None:
    """Write to a path, or stdout when path is None."""
    if path is None:
        import sys
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)

"""Mechanism description files and delimited/JSON serialisation helpers.

A mechanism file is a JSON object::

    {"kind": "biglide", "geometry": {"strut_length": 5.0},
     "joint_limits": [[-10, 10], [-10, 10]]}

Geometry fields per kind:

* ``bipod``: ``base_points`` (two ``[x, y]`` pairs)
* ``biglide``: ``strut_length``
* ``3rpr``: ``base_points`` and ``platform_points`` (three ``[x, y]`` pairs each)
* ``orthoglide``: ``leg_length``

``joint_limits`` is optional; omitted or ``null`` means unlimited actuators.
"""

import csv
import json
import math

import numpy as np

from .errors import MechanismFileError
from .mechanisms import Kind, bipod, biglide, orthoglide, three_rpr

_GEOMETRY_FIELDS = {
    Kind.BIPOD: ("base_points",),
    Kind.BIGLIDE: ("strut_length",),
    Kind.THREE_RPR: ("base_points", "platform_points"),
    Kind.ORTHOGLIDE: ("leg_length",),
}


def _number(value, field):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise MechanismFileError("expected a finite number", field)
    return float(value)


def _points(value, count, field):
    if not isinstance(value, list) or len(value) != count:
        raise MechanismFileError(f"expected a list of {count} [x, y] points", field)
    out = []
    for i, p in enumerate(value):
        if not isinstance(p, list) or len(p) != 2:
            raise MechanismFileError("expected an [x, y] pair", f"{field}[{i}]")
        out.append([_number(c, f"{field}[{i}]") for c in p])
    return out


def model_from_dict(doc):
    if not isinstance(doc, dict):
        raise MechanismFileError("expected a JSON object", "<root>")
    if "kind" not in doc:
        raise MechanismFileError("missing", "kind")
    try:
        kind = Kind(doc["kind"])
    except ValueError:
        raise MechanismFileError(f"unknown kind {doc['kind']!r}", "kind") from None
    geom = doc.get("geometry")
    if not isinstance(geom, dict):
        raise MechanismFileError("missing or not an object", "geometry")
    for name in _GEOMETRY_FIELDS[kind]:
        if name not in geom:
            raise MechanismFileError("missing", f"geometry.{name}")

    limits = doc.get("joint_limits")
    if limits is not None:
        if not isinstance(limits, list):
            raise MechanismFileError("expected a list of [min, max] pairs", "joint_limits")
        parsed = []
        for i, pair in enumerate(limits):
            if not isinstance(pair, list) or len(pair) != 2:
                raise MechanismFileError("expected a [min, max] pair", f"joint_limits[{i}]")
            parsed.append(tuple(_number(v, f"joint_limits[{i}]") for v in pair))
        limits = parsed

    try:
        if kind is Kind.BIGLIDE:
            return biglide(_number(geom["strut_length"], "geometry.strut_length"), limits)
        if kind is Kind.ORTHOGLIDE:
            return orthoglide(_number(geom["leg_length"], "geometry.leg_length"), limits)
        if kind is Kind.BIPOD:
            return bipod(_points(geom["base_points"], 2, "geometry.base_points"), limits)
        return three_rpr(_points(geom["base_points"], 3, "geometry.base_points"),
                         _points(geom["platform_points"], 3, "geometry.platform_points"), limits)
    except MechanismFileError:
        raise
    except (ValueError, TypeError) as exc:
        field = "joint_limits" if "joint limit" in str(exc) else "geometry"
        raise MechanismFileError(str(exc), field) from None


def model_to_dict(model):
    g = model.geometry
    if model.kind is Kind.BIGLIDE:
        geom = {"strut_length": g.strut_length}
    elif model.kind is Kind.ORTHOGLIDE:
        geom = {"leg_length": g.leg_length}
    elif model.kind is Kind.BIPOD:
        geom = {"base_points": [list(p) for p in g.base_points]}
    else:
        geom = {"base_points": [list(p) for p in g.base_points],
                "platform_points": [list(p) for p in g.platform_points]}
    limits = None if model.joint_limits is None else [list(p) for p in model.joint_limits]
    return {"kind": model.kind.value, "geometry": geom, "joint_limits": limits}


def load_model(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MechanismFileError(f"invalid JSON ({exc.msg} at line {exc.lineno})", "<root>") from None
    return model_from_dict(doc)


def save_model(model, path):
    write_json(model_to_dict(model), path)


def jsonable(obj):
    """Convert numpy values and infinities into JSON-ready objects (``inf`` becomes ``"inf"``)."""
    if isinstance(obj, dict):
        return {k: jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return None
        return v
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(doc):
    return json.dumps(jsonable(doc), indent=2) + "\n"


def write_json(doc, path):
    with open(path, "w") as fh:
        fh.write(dumps(doc))


def fmt(value):
    """17 significant digits, ``inf`` literal, empty string for missing values."""
    if value is None:
        return ""
    v = float(value)
    if math.isnan(v):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def grid_header(model, with_dextrous=False):
    cols = list(model.pose_axes) + ["reachable", "in_limits", "sigma_min", "sigma_max", "kappa", "class"]
    return cols + ["dextrous"] if with_dextrous else cols


def write_grid_csv(model, grid, fh, dextrous=None):
    """One row per cell, row-major; metric fields are empty for unreachable cells."""
    fh.write(",".join(grid_header(model, dextrous is not None)) + "\n")
    for k in range(len(grid)):
        row = [fmt(v) for v in grid.poses[k]]
        if grid.reachable[k]:
            row += ["1", "1" if grid.within_limits[k] else "0", fmt(grid.sigma_min[k]),
                    fmt(grid.sigma_max[k]), fmt(grid.kappa[k]), grid.classes[k]]
        else:
            row += ["0", "0", "", "", "", ""]
        if dextrous is not None:
            row.append("1" if dextrous[k] else "0")
        fh.write(",".join(row) + "\n")


def read_grid_csv(fh):
    """Parse a grid CSV back into a dict of numpy columns (missing metrics become NaN)."""
    rows = list(csv.DictReader(fh))
    cols = {}
    for name in rows[0].keys() if rows else []:
        values = [r[name] for r in rows]
        if name == "class":
            cols[name] = np.array([v or None for v in values], dtype=object)
        elif name in ("reachable", "in_limits", "dextrous"):
            cols[name] = np.array([v == "1" for v in values])
        else:
            cols[name] = np.array([float(v) if v else math.nan for v in values])
    return cols

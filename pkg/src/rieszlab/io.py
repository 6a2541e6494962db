"""Measure files (CSV / JSON), JSON payloads and report serialisation.

CSV layout::

    # dim=2
    0.25,0.5,0.125
    ...

one row per atom, coordinates followed by the weight.  JSON layout is
``{"dim": d, "points": [[...], ...], "weights": [...]}``.
"""
import csv
import io as _io
import json
import math
import os
import re
from pathlib import Path

import numpy as np

from .errors import MeasureFormatError, ValidationError
from .measure import DiscreteMeasure

_DIM_RE = re.compile(r"^#\s*dim\s*=\s*(\d+)\s*$")


def parse_measure_csv(text):
    dim = None
    points, weights = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _DIM_RE.match(line)
            if m:
                if dim is not None:
                    raise MeasureFormatError(f"line {lineno}: duplicate dim header")
                dim = int(m.group(1))
            continue
        if dim is None:
            raise MeasureFormatError(f"line {lineno}: data before the '# dim=<d>' header")
        fields = next(csv.reader([line]))
        if len(fields) != dim + 1:
            raise MeasureFormatError(
                f"line {lineno}: expected {dim + 1} fields (dim={dim} plus weight), got {len(fields)}"
            )
        try:
            vals = [float(f) for f in fields]
        except ValueError:
            raise MeasureFormatError(f"line {lineno}: non-numeric field in {line!r}") from None
        points.append(vals[:-1])
        weights.append(vals[-1])
    if dim is None:
        raise MeasureFormatError("missing '# dim=<d>' header")
    if dim < 1:
        raise MeasureFormatError("dim must be >= 1")
    if not points:
        raise MeasureFormatError("no atoms")
    return _build(points, weights, dim)


def parse_measure_json(text):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MeasureFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or not {"dim", "points", "weights"} <= set(data):
        raise MeasureFormatError("measure JSON needs keys dim, points, weights")
    dim = data["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise MeasureFormatError("dim must be a positive integer")
    points = data["points"]
    if not isinstance(points, list) or any(
        not isinstance(p, list) or len(p) != dim for p in points
    ):
        raise MeasureFormatError(f"every point must be a list of {dim} numbers")
    return _build(points, data["weights"], dim)


def _build(points, weights, dim):
    try:
        pts = np.asarray(points, dtype=float).reshape(-1, dim)
        w = np.asarray(weights, dtype=float)
        return DiscreteMeasure(pts, w)
    except (TypeError, ValueError) as exc:
        raise MeasureFormatError(str(exc)) from None


def read_measure(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    if path.suffix.lower() == ".csv":
        return parse_measure_csv(text)
    if path.suffix.lower() == ".json":
        return parse_measure_json(text)
    raise ValidationError(f"unknown measure file type {path.suffix!r} (use .csv or .json)")


def measure_to_csv(mu):
    buf = _io.StringIO()
    buf.write(f"# dim={mu.dim}\n")
    writer = csv.writer(buf, lineterminator="\n")
    for p, w in zip(mu.points, mu.weights):
        writer.writerow([repr(float(v)) for v in p] + [repr(float(w))])
    return buf.getvalue()


def measure_to_json(mu):
    return {"dim": mu.dim, "points": mu.points.tolist(), "weights": mu.weights.tolist()}


def write_measure(mu, path):
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".csv":
        text = measure_to_csv(mu)
    elif suffix == ".json":
        text = dumps(measure_to_json(mu))
    else:
        raise ValidationError(f"unknown measure file type {path.suffix!r} (use .csv or .json)")
    atomic_write(path, text)


def atomic_write(path, text):
    """Write via a temporary sibling so a failed run leaves no partial file."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def to_jsonable(obj):
    """Convert numpy containers and non-finite floats into plain JSON values.

    Non-finite floats become the strings ``"inf"``, ``"-inf"`` and ``"nan"``.
    """
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def dumps(obj):
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def vector_field_to_json(values):
    """Array of d-vectors in the atom order of the input measure."""
    return to_jsonable(np.asarray(values, dtype=float))


def vector_field_from_json(data, mu=None):
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2:
        raise ValidationError("vector field must be an array of arrays")
    if mu is not None and arr.shape != (mu.size, mu.dim):
        raise ValidationError(f"vector field shape {arr.shape} does not match the measure")
    return arr


def read_test_function(path):
    from .defect import TestFunction

    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read test function {path}: {exc}") from None
    return TestFunction.from_json(data)

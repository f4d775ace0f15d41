"""NDJSON ingestion and deterministic JSON / CSV emission.

Floats are written with 17 significant digits so doubles round-trip
exactly; non-finite values are written as the strings ``"inf"``,
``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from .distributions import PredictiveDistribution, from_params
from .mcmd import SampleSet


class DataError(ValueError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message: str, path=None, line: int | None = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


def format_float(v: float) -> str:
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.17g}"


def _json_number(v: float) -> str:
    if not math.isfinite(v):
        return json.dumps(format_float(v))
    text = f"{v:.17g}"
    # keep floats recognisable as floats
    return text if any(c in text for c in ".en") else text + ".0"


def _emit(obj, indent, level, out):
    pad = "" if indent is None else "\n" + " " * (indent * (level + 1))
    end = "" if indent is None else "\n" + " " * (indent * level)
    sep = ", " if indent is None else ","
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        keys = sorted(obj) if indent is not None else list(obj)
        out.append("{")
        for i, k in enumerate(keys):
            out.append((sep if i else "") + pad + json.dumps(str(k)) + ": ")
            _emit(obj[k], indent, level + 1, out)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, v in enumerate(obj):
            out.append((sep if i else "") + pad)
            _emit(v, indent, level + 1, out)
        out.append(end + "]")
    elif obj is None or isinstance(obj, (bool, np.bool_)):
        out.append(json.dumps(None if obj is None else bool(obj)))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_json_number(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int | None = None) -> str:
    """JSON text with 17-significant-digit floats; keys sorted when indented."""
    out: List[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj, indent=2) + "\n")


def write_ndjson(path, rows: Iterable[dict]) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(dumps(row) + "\n")


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _read_rows(path) -> List[Tuple[int, dict]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read file: {exc.strerror}", path) from None
    rows = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid JSON ({exc.msg})", path, i) from None
        if not isinstance(row, dict):
            raise DataError("expected a JSON object", path, i)
        rows.append((i, row))
    if not rows:
        raise DataError("no rows", path)
    return rows


def _number(v, what, path, line) -> float:
    if isinstance(v, str) and v in ("inf", "-inf", "nan"):
        return float(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise DataError(f"{what} must be a number, got {v!r}", path, line)
    return float(v)


def _vector(row, path, line) -> List[float]:
    x = row.get("x")
    if not isinstance(x, list) or not x:
        raise DataError('"x" must be a nonempty list of numbers', path, line)
    return [_number(v, '"x" entry', path, line) for v in x]


def _check_dims(xs, path, lines):
    d = len(xs[0])
    for x, line in zip(xs, lines):
        if len(x) != d:
            raise DataError(f"dimension mismatch: expected {d}, got {len(x)}", path, line)


def read_dataset(path) -> SampleSet:
    """Rows ``{"x": [...], "y": float}``."""
    rows = _read_rows(path)
    xs, ys, lines = [], [], []
    for line, row in rows:
        xs.append(_vector(row, path, line))
        if "y" not in row:
            raise DataError('missing "y"', path, line)
        ys.append(_number(row["y"], '"y"', path, line))
        lines.append(line)
    _check_dims(xs, path, lines)
    return SampleSet(np.array(xs), np.array(ys))


def read_queries(path) -> np.ndarray:
    """Rows carrying at least ``{"x": [...]}``."""
    rows = _read_rows(path)
    xs = [_vector(row, path, line) for line, row in rows]
    _check_dims(xs, path, [line for line, _ in rows])
    return np.array(xs)


def read_predictions(path) -> Tuple[np.ndarray, List[PredictiveDistribution]]:
    """Rows ``{"x": [...], "family": name, "params": [...]}``."""
    rows = _read_rows(path)
    xs, dists = [], []
    for line, row in rows:
        xs.append(_vector(row, path, line))
        params = row.get("params")
        if not isinstance(params, list):
            raise DataError('"params" must be a list of numbers', path, line)
        params = [_number(v, '"params" entry', path, line) for v in params]
        try:
            dists.append(from_params(row.get("family"), params))
        except (ValueError, TypeError) as exc:
            raise DataError(str(exc), path, line) from None
    _check_dims(xs, path, [line for line, _ in rows])
    return np.array(xs), dists


def dataset_rows(xs, ys):
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    for x, y in zip(xs, np.asarray(ys, dtype=float).ravel()):
        yield {"x": x.tolist(), "y": float(y)}


def prediction_rows(xs, dists: Sequence[PredictiveDistribution]):
    xs = np.asarray(xs, dtype=float)
    if xs.ndim == 1:
        xs = xs[:, None]
    for x, d in zip(xs, dists):
        yield {"x": x.tolist(), "family": d.family, "params": [float(p) for p in d.params]}

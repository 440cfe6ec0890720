"""On-disk formats: JSON model documents and CSV data tables.

Model documents are JSON objects with integer fields n, m, p, tau and
matrix fields F, C, H, S, R, each given either as one 2-D array (held
constant over the horizon) or as an array of 2-D arrays (one per step;
F, H, S, R need tau+1 entries, C needs tau).  Optional fields f, g, w
describe input sequences, either as an explicit array of vectors or as a
list of component expressions in the step variable k (e.g.
``"2.0 * sin(k) / (k + 1.0)"``), evaluated deterministically.

All CSV tables carry a header row, comma delimiters, a dot decimal
separator, LF line endings and 17 significant digits, so writing and
re-reading a table is lossless for float64 and byte-identical across
runs.  Infinities serialize as the literal tokens ``inf`` and ``-inf``.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .errors import ParseError
from .model import DescriptorModel

__all__ = [
    "format_number",
    "load_model",
    "load_model_file",
    "load_inputs_file",
    "write_table",
    "read_table",
    "measurement_rows",
]

_EXPR_NAMES = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "floor": math.floor,
    "ceil": math.ceil,
    "abs": abs,
    "min": min,
    "max": max,
    "pi": math.pi,
    "e": math.e,
}


def format_number(value) -> str:
    """Render one float at 17 significant digits (lossless for float64)."""
    return f"{float(value):.17g}"


def _matrix_sequence(doc, name, count, shape):
    if name not in doc:
        raise ParseError(f"missing required field {name!r}")
    try:
        arr = np.asarray(doc[name], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {name!r} is not numeric: {exc}") from exc
    if count == 0:
        return ()
    if arr.ndim == 2:
        if arr.shape != shape:
            raise ParseError(f"field {name!r} has shape {arr.shape}, expected {shape}")
        return (arr,) * count
    if arr.ndim == 3:
        if arr.shape != (count,) + shape:
            raise ParseError(
                f"field {name!r} has shape {arr.shape}, expected {(count,) + shape}"
            )
        return tuple(arr[i] for i in range(count))
    raise ParseError(f"field {name!r} must be a matrix or a list of matrices")


def _evaluate_series(exprs, count, dim, name):
    if len(exprs) != dim:
        raise ParseError(f"field {name!r} has {len(exprs)} expressions, expected {dim}")
    try:
        codes = [compile(expr, f"<{name}[{i}]>", "eval") for i, expr in enumerate(exprs)]
    except SyntaxError as exc:
        raise ParseError(f"field {name!r}: bad expression: {exc}") from exc
    out = np.zeros((count, dim))
    for k in range(count):
        scope = dict(_EXPR_NAMES, k=k)
        for i, code in enumerate(codes):
            try:
                out[k, i] = float(eval(code, {"__builtins__": {}}, scope))
            except Exception as exc:
                raise ParseError(
                    f"field {name!r}: expression {exprs[i]!r} failed at k={k}: {exc}"
                ) from exc
    return out


def _input_series(doc, name, count, dim):
    value = doc.get(name)
    if value is None:
        return None
    if isinstance(value, list) and value and all(isinstance(v, str) for v in value):
        return _evaluate_series(value, count, dim, name)
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"field {name!r} is not numeric: {exc}") from exc
    if dim == 1 and arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.shape != (count, dim):
        raise ParseError(f"field {name!r} has shape {arr.shape}, expected {(count, dim)}")
    return arr


def load_model(doc: dict):
    """Build ``(DescriptorModel, inputs)`` from a parsed model document.

    ``inputs`` is a dict with keys f, g, w mapping to evaluated arrays or
    None when the document does not carry that sequence.
    """
    if not isinstance(doc, dict):
        raise ParseError("model document must be a JSON object")
    dims = {}
    for name in ("n", "m", "p", "tau"):
        if name not in doc:
            raise ParseError(f"missing required field {name!r}")
        value = doc[name]
        if not isinstance(value, int) or isinstance(value, bool):
            raise ParseError(f"field {name!r} must be an integer")
        dims[name] = value
    n, m, p, tau = dims["n"], dims["m"], dims["p"], dims["tau"]
    if min(n, m, p) < 1 or tau < 0:
        raise ParseError(f"bad dimensions n={n} m={m} p={p} tau={tau}")
    model = DescriptorModel(
        n=n,
        m=m,
        p=p,
        tau=tau,
        F=_matrix_sequence(doc, "F", tau + 1, (m, n)),
        C=_matrix_sequence(doc, "C", tau, (m, n)),
        H=_matrix_sequence(doc, "H", tau + 1, (p, n)),
        S=_matrix_sequence(doc, "S", tau + 1, (m, m)),
        R=_matrix_sequence(doc, "R", tau + 1, (p, p)),
    )
    inputs = {
        "f": _input_series(doc, "f", tau + 1, m),
        "g": _input_series(doc, "g", tau + 1, p),
        "w": _input_series(doc, "w", tau + 1, n),
    }
    return model, inputs


def _load_json(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc


def load_model_file(path):
    """Read and interpret a JSON model document; see :func:`load_model`."""
    return load_model(_load_json(path))


def load_inputs_file(path, model: DescriptorModel):
    """Read a JSON document holding only input sequences f, g, w."""
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: inputs document must be a JSON object")
    count = model.tau + 1
    return {
        "f": _input_series(doc, "f", count, model.m),
        "g": _input_series(doc, "g", count, model.p),
        "w": _input_series(doc, "w", count, model.n),
    }


def write_table(path, header, rows) -> None:
    """Write one CSV table; floats at 17 significant digits, ints verbatim."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    str(cell) if isinstance(cell, (int, np.integer)) else format_number(cell)
                    for cell in row
                ]
            )


def read_table(path):
    """Read one CSV table back as ``(header, rows)`` with float cells."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file") from None
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    rows.append([float(cell) for cell in row])
                except ValueError as exc:
                    raise ParseError(f"{path}: line {lineno}: {exc}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return header, rows


def measurement_rows(path, model: DescriptorModel) -> np.ndarray:
    """Extract the measurement block y_0..y_tau from a CSV table.

    Accepts either a plain measurement table (columns k, y0..y{p-1}) or a
    full trajectory table; columns are matched by name, falling back to
    "the p columns after k" when no y-columns are named.  Rows must cover
    k = 0..tau exactly.
    """
    header, rows = read_table(path)
    if "k" not in header:
        raise ParseError(f"{path}: no 'k' column in header {header}")
    k_col = header.index("k")
    y_cols = [
        i for i, name in enumerate(header) if name.startswith("y") and name[1:].isdigit()
    ]
    if y_cols:
        y_cols.sort(key=lambda i: int(header[i][1:]))
        if len(y_cols) != model.p:
            raise ParseError(
                f"{path}: found {len(y_cols)} y-columns, model has p = {model.p}"
            )
    else:
        y_cols = list(range(k_col + 1, k_col + 1 + model.p))
        if len(header) < k_col + 1 + model.p:
            raise ParseError(f"{path}: too few columns for p = {model.p}")
    want = model.tau + 1
    if len(rows) != want:
        raise ParseError(f"{path}: got {len(rows)} rows, expected k = 0..{model.tau}")
    ys = np.zeros((want, model.p))
    seen = set()
    for row in rows:
        k = int(row[k_col])
        if not 0 <= k < want or k in seen:
            raise ParseError(f"{path}: step index {k} outside 0..{model.tau} or repeated")
        seen.add(k)
        ys[k] = [row[i] for i in y_cols]
    return ys

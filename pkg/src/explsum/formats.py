"""File formats: the explanation-matrix input document and canonical JSON.

Canonical serialization pins byte-level determinism: fixed key order (dicts
are built in schema order), floats rounded to nine significant digits,
compact separators, UTF-8, trailing newline. Parsing and re-serializing a
canonical document reproduces it byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ShapeError
from .matrix import ColMeta, ExplanationMatrix, RowMeta, normalize


def canonical_value(obj):
    """Recursively round floats to nine significant digits."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ShapeError("non-finite value in a canonical document")
        return float(f"{obj:.9g}")
    if isinstance(obj, dict):
        return {k: canonical_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical_value(v) for v in obj]
    return obj


def dumps_canonical(obj) -> str:
    return (
        json.dumps(
            canonical_value(obj),
            separators=(",", ":"),
            ensure_ascii=False,
            allow_nan=False,
        )
        + "\n"
    )


# ---------------------------------------------------------------------------
# explanation-matrix input document ("explmat-json v1")


def parse_explmat(doc: dict):
    """Validate an explmat document; returns (shape, entries, row_meta, col_meta)."""
    if not isinstance(doc, dict):
        raise ShapeError("document must be a JSON object")
    for key in ("shape", "entries", "rows", "cols"):
        if key not in doc:
            raise ShapeError(f"missing field {key!r}")
    shape = doc["shape"]
    if (
        not isinstance(shape, list)
        or len(shape) != 2
        or not all(isinstance(x, int) and x > 0 for x in shape)
    ):
        raise ShapeError("shape must be [m, n] with positive integers")
    m, n = shape
    if len(doc["rows"]) != m:
        raise ShapeError(f"rows metadata has {len(doc['rows'])} records, not {m}")
    if len(doc["cols"]) != n:
        raise ShapeError(f"cols metadata has {len(doc['cols'])} records, not {n}")
    entries = []
    for e in doc["entries"]:
        if not isinstance(e, list) or len(e) != 3:
            raise ShapeError(f"bad entry {e!r}: expected [row, col, value]")
        r, c, v = e
        if not isinstance(r, int) or not isinstance(c, int):
            raise ShapeError(f"bad entry {e!r}: indices must be integers")
        entries.append((r, c, float(v)))
    row_meta = []
    for i, rec in enumerate(doc["rows"]):
        try:
            row_meta.append(
                RowMeta(str(rec["id"]), str(rec["class"]), str(rec["pred"]))
            )
        except (KeyError, TypeError) as err:
            raise ShapeError(f"bad row record {i}: {err}") from None
    col_meta = []
    for j, rec in enumerate(doc["cols"]):
        try:
            col_meta.append(
                ColMeta(str(rec["id"]), str(rec["name"]), rec.get("group"))
            )
        except (KeyError, TypeError) as err:
            raise ShapeError(f"bad col record {j}: {err}") from None
    ids = [r.id for r in row_meta]
    if len(set(ids)) != len(ids):
        raise ShapeError("duplicate instance ids")
    ids = [c.id for c in col_meta]
    if len(set(ids)) != len(ids):
        raise ShapeError("duplicate feature ids")
    return (m, n), entries, tuple(row_meta), tuple(col_meta)


def load_matrix(
    path: str | Path, signed: bool = False, per_feature: bool = False
) -> ExplanationMatrix:
    """Read an explmat-json v1 file and normalize it."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ShapeError(f"not valid JSON: {err}") from None
    shape, entries, row_meta, col_meta = parse_explmat(doc)
    return normalize(
        shape,
        entries,
        row_meta=row_meta,
        col_meta=col_meta,
        signed=signed,
        per_feature=per_feature,
    )


def matrix_document(matrix: ExplanationMatrix) -> dict:
    """explmat-json v1 document for a matrix (canonical field order)."""
    cols = []
    for meta in matrix.col_meta:
        rec = {"id": meta.id, "name": meta.name}
        if meta.group is not None:
            rec["group"] = meta.group
        cols.append(rec)
    return {
        "shape": [matrix.n_rows, matrix.n_cols],
        "entries": [
            [int(r), int(c), float(v)]
            for r, c, v in zip(matrix.rows, matrix.cols, matrix.vals)
        ],
        "rows": [
            {"id": meta.id, "class": meta.class_label, "pred": meta.predicted}
            for meta in matrix.row_meta
        ],
        "cols": cols,
    }


def save_matrix(matrix: ExplanationMatrix, path: str | Path) -> None:
    Path(path).write_text(dumps_canonical(matrix_document(matrix)), encoding="utf-8")

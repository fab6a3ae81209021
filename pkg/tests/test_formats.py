from __future__ import annotations

import json

import numpy as np
import pytest

from explsum.errors import ShapeError
from explsum.formats import (
    canonical_value,
    dumps_canonical,
    load_matrix,
    matrix_document,
    parse_explmat,
    save_matrix,
)

DOC = {
    "shape": [2, 2],
    "entries": [[0, 0, 0.25], [0, 1, 0.25], [1, 1, 0.5]],
    "rows": [
        {"id": "r1", "class": "A", "pred": "A"},
        {"id": "r2", "class": "B", "pred": "A"},
    ],
    "cols": [
        {"id": "c1", "name": "feature one"},
        {"id": "c2", "name": "feature two", "group": "g"},
    ],
}


class TestCanonicalJson:
    def test_floats_rounded_to_nine_significant_digits(self):
        assert canonical_value(0.1 + 0.2) == 0.3
        assert canonical_value(1.0 / 3.0) == 0.333333333

    def test_roundtrip_is_byte_identical(self):
        obj = {
            "a": [1, 2.123456789123, {"b": 1e-12, "c": "text", "d": None}],
            "e": True,
        }
        once = dumps_canonical(obj)
        twice = dumps_canonical(json.loads(once))
        assert once == twice

    def test_rejects_non_finite(self):
        with pytest.raises(ShapeError):
            dumps_canonical({"x": float("inf")})

    def test_trailing_newline_and_compact_separators(self):
        assert dumps_canonical({"a": 1}) == '{"a":1}\n'


class TestExplmatFormat:
    def test_parse_and_load(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps(DOC), encoding="utf-8")
        matrix = load_matrix(path)
        assert matrix.n_rows == 2 and matrix.n_cols == 2
        assert np.isclose(matrix.total(), 1.0)
        assert matrix.row_meta[1].correct is False
        assert matrix.col_meta[1].group == "g"

    def test_save_load_roundtrip(self, tmp_path, worked_matrix):
        path = tmp_path / "m.json"
        save_matrix(worked_matrix, path)
        back = load_matrix(path)
        assert np.allclose(back.to_dense(), worked_matrix.to_dense(), atol=1e-9)
        assert back.row_meta == worked_matrix.row_meta
        # canonical file writes are stable
        save_matrix(back, tmp_path / "m2.json")
        assert (tmp_path / "m.json").read_bytes() == (
            tmp_path / "m2.json"
        ).read_bytes()

    def test_missing_fields(self):
        for key in ("shape", "entries", "rows", "cols"):
            doc = {k: v for k, v in DOC.items() if k != key}
            with pytest.raises(ShapeError):
                parse_explmat(doc)

    def test_bad_shapes_and_entries(self):
        bad = dict(DOC, shape=[0, 2])
        with pytest.raises(ShapeError):
            parse_explmat(bad)
        bad = dict(DOC, entries=[[0, 0]])
        with pytest.raises(ShapeError):
            parse_explmat(bad)
        bad = dict(DOC, rows=DOC["rows"][:1])
        with pytest.raises(ShapeError):
            parse_explmat(bad)

    def test_duplicate_ids_rejected(self):
        bad = dict(
            DOC,
            rows=[
                {"id": "same", "class": "A", "pred": "A"},
                {"id": "same", "class": "B", "pred": "B"},
            ],
        )
        with pytest.raises(ShapeError):
            parse_explmat(bad)

    def test_invalid_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ShapeError):
            load_matrix(path)

    def test_document_field_order(self, worked_matrix):
        doc = matrix_document(worked_matrix)
        assert list(doc.keys()) == ["shape", "entries", "rows", "cols"]

"""Raw-data ingestion: tabular discretization and word-to-topic aggregation.

Tabular attributes become one-hot "logic" columns (quantile ranges for
numeric/ordinal attributes, levels for categorical ones) so downstream
explainers can attribute importance to interpretable conditions. Word-level
explanation matrices densify into topic-level ones by taking the maximum
importance among a topic's member words.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, ShapeError, UnmappedFeatureError
from .matrix import ColMeta, ExplanationMatrix


@dataclass(frozen=True)
class LogicColumn:
    """One 0/1 output column: a quantile range or a categorical level."""

    attribute: str
    name: str
    kind: str  # "range" | "level"
    low: float | None = None  # range: inclusive lower edge (None = open)
    high: float | None = None  # range: exclusive upper edge (None = open)
    level: str | None = None


def sturges_bins(n_rows: int) -> int:
    """Bin count from the classic sample-size rule: ceil(1 + log2 N)."""
    if n_rows < 1:
        raise ConfigError("need at least one row")
    return math.ceil(1.0 + math.log2(n_rows))


def _quantile_edges(values: np.ndarray, k: int) -> list[float]:
    """Interior cut points at i/k quantiles, deduplicated."""
    qs = np.quantile(values, [i / k for i in range(1, k)])
    edges: list[float] = []
    for e in qs:
        e = float(e)
        if not edges or e > edges[-1]:
            edges.append(e)
    return edges


def discretize_tabular(
    table: dict[str, list],
    types: dict[str, str],
    edges: dict[str, list[float]] | None = None,
) -> tuple[np.ndarray, list[LogicColumn], dict[str, list[float]]]:
    """One-hot logic matrix from a columnar table.

    Numeric and ordinal attributes split into ceil(1 + log2 N) quantile bins
    computed from the data (or reuse precomputed ``edges`` so new data scores
    on the same grid); each categorical level becomes its own column. Exactly
    one column per attribute fires per row. Returns the 0/1 matrix, the
    column descriptions, and the bin edges used.
    """
    if not table:
        raise ConfigError("empty table")
    n_rows = len(next(iter(table.values())))
    if n_rows < 1:
        raise ConfigError("need at least one row")
    for name, column in table.items():
        if len(column) != n_rows:
            raise ShapeError(f"column {name!r} has {len(column)} rows, not {n_rows}")
    unknown = [a for a in types if a not in table]
    if unknown:
        raise ConfigError(f"typed attributes missing from the table: {unknown}")

    out_edges: dict[str, list[float]] = {}
    columns: list[LogicColumn] = []
    blocks: list[np.ndarray] = []
    for attr, kind in types.items():
        if kind not in ("numeric", "ordinal", "categorical"):
            raise ConfigError(f"unknown attribute type {kind!r} for {attr!r}")
        raw = table[attr]
        if kind == "categorical":
            levels = sorted({str(v) for v in raw})
            block = np.zeros((n_rows, len(levels)))
            index = {lev: j for j, lev in enumerate(levels)}
            for i, v in enumerate(raw):
                block[i, index[str(v)]] = 1.0
            for lev in levels:
                columns.append(
                    LogicColumn(attr, f"{attr} = {lev}", "level", level=lev)
                )
            blocks.append(block)
            continue
        values = np.asarray([float(v) for v in raw])
        if edges is not None and attr in edges:
            cuts = list(edges[attr])
        elif np.unique(values).size < 2:
            warnings.warn(
                f"attribute {attr!r} is constant; emitting a single degenerate bin",
                stacklevel=2,
            )
            cuts = []
        else:
            cuts = _quantile_edges(values, sturges_bins(n_rows))
        out_edges[attr] = cuts
        bounds = [None, *cuts, None]
        block = np.zeros((n_rows, len(cuts) + 1))
        # right-open bins [lo, hi); the last bin absorbs the maximum
        bin_of = np.searchsorted(np.asarray(cuts), values, side="right")
        block[np.arange(n_rows), bin_of] = 1.0
        for j in range(len(cuts) + 1):
            lo, hi = bounds[j], bounds[j + 1]
            lo_s = "-inf" if lo is None else f"{lo:g}"
            hi_s = "inf" if hi is None else f"{hi:g}"
            columns.append(
                LogicColumn(attr, f"{attr} in [{lo_s}, {hi_s})", "range", lo, hi)
            )
        blocks.append(block)
    matrix = np.hstack(blocks) if blocks else np.zeros((n_rows, 0))
    return matrix, columns, out_edges


def aggregate_topics(
    word_matrix: ExplanationMatrix, word_to_topic: dict[str, str]
) -> ExplanationMatrix:
    """Collapse word columns into topic columns by maximum importance.

    Every word column must be mapped to exactly one topic; the result is
    renormalized. Topic columns are ordered by first appearance of their
    member words.
    """
    missing = [
        meta.id for meta in word_matrix.col_meta if meta.id not in word_to_topic
    ]
    if missing:
        raise UnmappedFeatureError(missing)
    topics: list[str] = []
    topic_index: dict[str, int] = {}
    col_to_topic = np.zeros(word_matrix.n_cols, dtype=np.int64)
    for j, meta in enumerate(word_matrix.col_meta):
        topic = word_to_topic[meta.id]
        if topic not in topic_index:
            topic_index[topic] = len(topics)
            topics.append(topic)
        col_to_topic[j] = topic_index[topic]
    best = np.zeros((word_matrix.n_rows, len(topics)))
    np.maximum.at(
        best, (word_matrix.rows, col_to_topic[word_matrix.cols]), word_matrix.vals
    )
    rows, cols = np.nonzero(best)
    vals = best[rows, cols]
    # plain sum renormalization: the inputs are already scaled, and taking
    # maxima must not shift the value floor the way a fresh min-max would
    vals = vals / vals.sum()
    return ExplanationMatrix(
        n_rows=word_matrix.n_rows,
        n_cols=len(topics),
        rows=rows.astype(np.int64),
        cols=cols.astype(np.int64),
        vals=vals,
        row_meta=word_matrix.row_meta,
        col_meta=tuple(ColMeta(t, t, "topic") for t in topics),
    )


def load_csv_table(
    csv_path: str | Path, schema_path: str | Path
) -> tuple[dict[str, list], dict[str, str], dict[str, str]]:
    """Columnar table plus attribute types from a CSV and its sidecar schema.

    The schema JSON carries {"columns": {attr: type, ...}} and optionally
    "id", "label" and "prediction" column names, returned as the third
    element for building row metadata.
    """
    schema = json.loads(Path(schema_path).read_text(encoding="utf-8"))
    if "columns" not in schema or not isinstance(schema["columns"], dict):
        raise ConfigError("schema must carry a 'columns' mapping")
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ConfigError("CSV file has no header row")
        rows = list(reader)
    if not rows:
        raise ConfigError("CSV file has no data rows")
    table: dict[str, list] = {name: [] for name in reader.fieldnames}
    for record in rows:
        for name in reader.fieldnames:
            table[name].append(record[name])
    meta_cols = {
        key: schema[key]
        for key in ("id", "label", "prediction")
        if key in schema
    }
    for key, col in meta_cols.items():
        if col not in table:
            raise ConfigError(f"schema {key!r} column {col!r} not in the CSV")
    return table, dict(schema["columns"]), meta_cols

"""Sparse explanation-matrix data model, normalization and value smoothing.

The central object is :class:`ExplanationMatrix`: a nonnegative sparse
instances-by-features matrix whose entries sum to one, so it can be read as a
joint distribution over (instance, feature) pairs.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import EmptyMatrixError, ShapeError

log = logging.getLogger("explsum")

#: entries smaller than this after normalization are treated as numeric noise
MASS_EPS = 1e-12


@dataclass(frozen=True)
class RowMeta:
    """Per-instance record."""

    id: str
    class_label: str
    predicted: str

    @property
    def correct(self) -> bool:
        return self.class_label == self.predicted


@dataclass(frozen=True)
class ColMeta:
    """Per-feature record."""

    id: str
    name: str
    group: str | None = None


def default_row_meta(m: int) -> tuple[RowMeta, ...]:
    return tuple(RowMeta(f"r{i + 1}", "all", "all") for i in range(m))


def default_col_meta(n: int) -> tuple[ColMeta, ...]:
    return tuple(ColMeta(f"c{j + 1}", f"c{j + 1}") for j in range(n))


@dataclass(frozen=True)
class ExplanationMatrix:
    """Normalized sparse explanation matrix (a joint distribution).

    Entry arrays are sorted by (row, col); values are strictly positive and
    sum to one. Immutable: every transformation returns a new instance.
    """

    n_rows: int
    n_cols: int
    rows: np.ndarray  # int64, sorted by (row, col)
    cols: np.ndarray  # int64
    vals: np.ndarray  # float64, > 0
    row_meta: tuple[RowMeta, ...] = field(repr=False, default=())
    col_meta: tuple[ColMeta, ...] = field(repr=False, default=())

    def __post_init__(self):
        if len(self.rows) != len(self.cols) or len(self.rows) != len(self.vals):
            raise ShapeError("entry arrays have mismatched lengths")
        if len(self.row_meta) != self.n_rows or len(self.col_meta) != self.n_cols:
            raise ShapeError("metadata length does not match matrix shape")

    @property
    def nnz(self) -> int:
        return len(self.vals)

    def total(self) -> float:
        return float(self.vals.sum())

    def row_masses(self) -> np.ndarray:
        return np.bincount(self.rows, weights=self.vals, minlength=self.n_rows)

    def col_masses(self) -> np.ndarray:
        return np.bincount(self.cols, weights=self.vals, minlength=self.n_cols)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.n_rows, self.n_cols))
        dense[self.rows, self.cols] = self.vals
        return dense

    def entry_dict(self) -> dict[tuple[int, int], float]:
        return {
            (int(r), int(c)): float(v)
            for r, c, v in zip(self.rows, self.cols, self.vals)
        }


def _coalesce(
    m: int, n: int, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sort by (row, col) and sum duplicate coordinates."""
    if len(rows) == 0:
        return rows, cols, vals
    if rows.min() < 0 or rows.max() >= m or cols.min() < 0 or cols.max() >= n:
        raise ShapeError("entry coordinates outside the declared shape")
    flat = rows.astype(np.int64) * n + cols.astype(np.int64)
    order = np.argsort(flat, kind="stable")
    flat, vals = flat[order], vals[order]
    uniq, inverse = np.unique(flat, return_inverse=True)
    summed = np.bincount(inverse, weights=vals)
    return (uniq // n).astype(np.int64), (uniq % n).astype(np.int64), summed


def normalize(
    shape: tuple[int, int],
    entries,
    row_meta: tuple[RowMeta, ...] | None = None,
    col_meta: tuple[ColMeta, ...] | None = None,
    signed: bool = False,
    per_feature: bool = False,
) -> ExplanationMatrix:
    """Build a normalized :class:`ExplanationMatrix` from raw sparse input.

    Raw values are min-max scaled (absolute values first when ``signed``) and
    then divided by the grand total so the entries sum to one. The min of the
    min-max range is the matrix minimum including implicit zeros, so for a
    sparse nonnegative matrix the scaling reduces to division by the maximum.
    Duplicate coordinates are summed; zeros are dropped.

    ``per_feature`` switches to column-wise min-max scaling.
    """
    m, n = int(shape[0]), int(shape[1])
    if m <= 0 or n <= 0:
        raise ShapeError(f"invalid shape {shape}")
    entries = list(entries)
    if entries:
        rows = np.array([e[0] for e in entries], dtype=np.int64)
        cols = np.array([e[1] for e in entries], dtype=np.int64)
        vals = np.array([e[2] for e in entries], dtype=np.float64)
    else:
        rows = cols = np.array([], dtype=np.int64)
        vals = np.array([], dtype=np.float64)
    rows, cols, vals = _coalesce(m, n, rows, cols, vals)

    if signed:
        vals = np.abs(vals)
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    if len(vals) == 0:
        raise EmptyMatrixError("matrix has no nonzero entries")
    if np.any(vals < 0):
        raise ShapeError("negative values in an unsigned matrix")

    if per_feature:
        scaled = vals.copy()
        for j in np.unique(cols):
            sel = cols == j
            col_vals = vals[sel]
            lo = 0.0 if np.count_nonzero(sel) < m else float(col_vals.min())
            hi = col_vals.max()
            if hi > lo:
                scaled[sel] = (col_vals - lo) / (hi - lo)
            # constant column: leave as-is, grand-total division handles it
        vals = scaled
    else:
        # implicit zeros participate in the range whenever the matrix is sparse
        lo = 0.0 if len(vals) < m * n else float(vals.min())
        hi = float(vals.max())
        if hi > lo:
            vals = (vals - lo) / (hi - lo)

    keep = vals > 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    if len(vals) == 0:
        raise EmptyMatrixError("matrix is empty after min-max scaling")
    vals = vals / vals.sum()
    keep = vals >= MASS_EPS
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    vals = vals / vals.sum()

    density = len(vals) / (m * n)
    if density > 0.5:
        warnings.warn(
            f"explanation matrix density {density:.2f} exceeds 0.5; "
            "the sparsity assumption is violated",
            stacklevel=2,
        )

    return ExplanationMatrix(
        n_rows=m,
        n_cols=n,
        rows=rows,
        cols=cols,
        vals=vals,
        row_meta=tuple(row_meta) if row_meta else default_row_meta(m),
        col_meta=tuple(col_meta) if col_meta else default_col_meta(n),
    )


@dataclass(frozen=True)
class ValueDistribution:
    """Descending-sorted nonzero values with an optional detected knee."""

    sorted_values: np.ndarray
    knee_index: int | None = None
    cap_value: float | None = None

    def __post_init__(self):
        if np.any(np.diff(self.sorted_values) > 0):
            raise ShapeError("sorted_values must be non-increasing")
        if self.knee_index is not None and not (
            0 <= self.knee_index < len(self.sorted_values)
        ):
            raise ShapeError("knee_index out of bounds")


def value_distribution(matrix: ExplanationMatrix) -> ValueDistribution:
    return ValueDistribution(np.sort(matrix.vals)[::-1])


def find_knee(dist: ValueDistribution, sensitivity: float = 1.0) -> float | None:
    """Locate the knee of a descending value distribution.

    The curve is the sorted values against normalized rank, rescaled to the
    unit square. The knee is the interior point of maximum discrete curvature
    (largest absolute second difference of the rescaled curve). Returns the
    value at that point, or ``None`` when the curvature never exceeds
    ``sensitivity`` times the mean rank spacing -- in particular for straight
    lines and for distributions with fewer than three distinct values.
    """
    y = np.asarray(dist.sorted_values, dtype=np.float64)
    n = len(y)
    if n < 3 or len(np.unique(y)) < 3:
        return None
    lo, hi = y[-1], y[0]
    yn = (y - lo) / (hi - lo)
    # second differences of the rank-normalized curve (interior points only)
    curvature = np.abs(yn[:-2] - 2.0 * yn[1:-1] + yn[2:])
    threshold = sensitivity / (n - 1)
    best = int(np.argmax(curvature))
    if curvature[best] <= threshold:
        return None
    return float(y[best + 1])


def locate_knee(
    dist: ValueDistribution, sensitivity: float = 1.0
) -> ValueDistribution:
    """Return a copy of ``dist`` with knee fields filled in (if any)."""
    cap = find_knee(dist, sensitivity)
    if cap is None:
        return replace(dist, knee_index=None, cap_value=None)
    idx = int(np.argmax(dist.sorted_values <= cap))
    return replace(dist, knee_index=idx, cap_value=cap)


def smooth(matrix: ExplanationMatrix, sensitivity: float = 1.0) -> ExplanationMatrix:
    """Cap values above the knee of the value distribution and renormalize.

    Without a detectable knee the matrix is returned unchanged. Capping never
    increases a value and preserves the zero pattern.
    """
    cap = find_knee(value_distribution(matrix), sensitivity)
    if cap is None:
        return matrix
    vals = np.minimum(matrix.vals, cap)
    vals = vals / vals.sum()
    log.debug("smoothing capped %d values at %.3e", int((matrix.vals > cap).sum()), cap)
    return replace(matrix, vals=vals)


def check_normalized(matrix: ExplanationMatrix, tol: float = 1e-9) -> None:
    total = matrix.total()
    if not math.isclose(total, 1.0, abs_tol=tol):
        raise ShapeError(f"matrix mass {total} is not 1 within {tol}")

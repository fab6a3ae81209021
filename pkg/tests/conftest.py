from __future__ import annotations

import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from explsum.cost import Cluster, Clustering
from explsum.matrix import ColMeta, ExplanationMatrix, RowMeta, normalize

# the 4x4 joint distribution used as the worked example throughout the suite
WORKED_DENSE = np.array(
    [
        [0.1, 0.1, 0.0, 0.0],
        [0.1, 0.1, 0.0, 0.0],
        [0.0, 0.0, 0.2, 0.2],
        [0.0, 0.0, 0.0, 0.2],
    ]
)


def matrix_from_dense(dense, row_meta=None, col_meta=None) -> ExplanationMatrix:
    dense = np.asarray(dense, dtype=float)
    rows, cols = np.nonzero(dense)
    entries = [(int(r), int(c), float(dense[r, c])) for r, c in zip(rows, cols)]
    with warnings.catch_warnings():
        # random test matrices may exceed the density advisory on purpose
        warnings.simplefilter("ignore", UserWarning)
        return normalize(dense.shape, entries, row_meta=row_meta, col_meta=col_meta)


@pytest.fixture
def worked_matrix() -> ExplanationMatrix:
    row_meta = (
        RowMeta("r1", "A", "A"),
        RowMeta("r2", "A", "A"),
        RowMeta("r3", "B", "B"),
        RowMeta("r4", "B", "A"),
    )
    col_meta = tuple(ColMeta(f"c{j + 1}", f"feature {j + 1}") for j in range(4))
    return matrix_from_dense(WORKED_DENSE, row_meta, col_meta)


@pytest.fixture
def worked_clustering() -> Clustering:
    return Clustering(
        (Cluster(0, (0, 1)), Cluster(1, (2, 3))),
        (Cluster(0, (0, 1)), Cluster(1, (2, 3))),
    )


def random_matrix(
    rng: np.random.Generator,
    m: int | None = None,
    n: int | None = None,
    density: float = 0.5,
    empty_row: bool = False,
) -> ExplanationMatrix:
    m = int(m if m is not None else rng.integers(2, 9))
    n = int(n if n is not None else rng.integers(2, 9))
    mask = rng.random((m, n)) < density
    if empty_row and m > 1:
        mask[int(rng.integers(0, m))] = False
    if not mask.any():
        mask[int(rng.integers(0, m)), int(rng.integers(0, n))] = True
    dense = np.zeros((m, n))
    dense[mask] = rng.uniform(0.2, 1.0, size=int(mask.sum()))
    if not dense.any():
        dense[0, 0] = 1.0
    return matrix_from_dense(dense)


def random_clustering(rng: np.random.Generator, m: int, n: int) -> Clustering:
    ra = rng.integers(0, max(2, m // 2 + 1), size=m)
    ca = rng.integers(0, max(2, n // 2 + 1), size=n)
    return Clustering.from_assignments(ra, ca)

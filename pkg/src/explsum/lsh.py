"""Locality-sensitive hashing over row/column vectors for candidate retrieval.

Each vector is hashed into ``n_tables`` tables; the key within a table
concatenates ``hashes_per_table`` quantized Gaussian projections
floor((a.v + b) / w), so collision probability decays with Euclidean
distance. A registry maps entries to their current cluster; the top-k query
tallies collided entries by cluster, normalized by cluster size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, NotFoundError


@dataclass(frozen=True)
class LshConfig:
    n_tables: int = 8
    hashes_per_table: int = 4
    bucket_width: float | None = None  # resolved from the data when None
    seed: int = 0

    def validate(self) -> None:
        if self.n_tables < 1 or self.hashes_per_table < 1:
            raise ConfigError("n_tables and hashes_per_table must be >= 1")
        if self.bucket_width is not None and self.bucket_width <= 0:
            raise ConfigError("bucket_width must be positive")


def default_bucket_width(vectors: sp.spmatrix) -> float:
    """Bucket width scaled to the data: half the mean nonzero vector norm.

    Norm scale (not entry scale) keeps collision behavior stable across
    matrix sizes, since projection magnitudes grow with vector norms. The
    factor is tuned so near-duplicate vectors collide in most tables while
    vectors with disjoint support almost never do.
    """
    csr = sp.csr_matrix(vectors)
    norms = np.sqrt(np.asarray(csr.multiply(csr).sum(axis=1)).ravel())
    nz = norms[norms > 0]
    if len(nz) == 0:
        return 1.0
    return 0.5 * float(nz.mean())


class LshTable:
    """Hash tables plus the entry-to-cluster registry."""

    def __init__(
        self,
        n_entries: int,
        keys: np.ndarray,  # (n_entries, L, kappa) int64
        config: LshConfig,
        width: float,
        assignment: np.ndarray,
    ):
        self.config = config
        self.width = width
        self.n_entries = n_entries
        self._keys = keys
        self.buckets: list[dict[bytes, np.ndarray]] = []
        for t in range(keys.shape[1]):
            table: dict[bytes, list[int]] = {}
            view = keys[:, t, :]
            for i in range(n_entries):
                table.setdefault(view[i].tobytes(), []).append(i)
            self.buckets.append(
                {k: np.array(v, dtype=np.int64) for k, v in table.items()}
            )
        self.registry = assignment.astype(np.int64).copy()
        self.cluster_entries: dict[int, list[int]] = {}
        for i, c in enumerate(self.registry):
            self.cluster_entries.setdefault(int(c), []).append(i)

    def entries_of(self, cluster_id: int) -> list[int]:
        try:
            return self.cluster_entries[cluster_id]
        except KeyError:
            raise NotFoundError(f"unknown cluster id {cluster_id}") from None

    def collided(self, entries: Iterable[int]) -> np.ndarray:
        """Entries sharing any bucket with any of ``entries`` (those excluded)."""
        members = np.asarray(list(entries), dtype=np.int64)
        if len(members) and (
            members.min() < 0 or members.max() >= self.n_entries
        ):
            raise NotFoundError("entry was never indexed")
        chunks = []
        for t, table in enumerate(self.buckets):
            for i in members:
                chunks.append(table[self._keys[i, t, :].tobytes()])
        if not chunks:
            return np.array([], dtype=np.int64)
        return np.setdiff1d(np.concatenate(chunks), members)


def build_lsh_table(
    vectors, config: LshConfig, assignment: np.ndarray | None = None
) -> LshTable:
    """Hash every vector (a matrix row) into ``config.n_tables`` tables.

    ``assignment`` seeds the entry-to-cluster registry; by default every
    entry starts as its own cluster.
    """
    config.validate()
    csr = sp.csr_matrix(vectors)
    n_entries, dim = csr.shape
    if n_entries < 1:
        raise ConfigError("need at least one vector")
    width = config.bucket_width or default_bucket_width(csr)
    rng = np.random.default_rng(config.seed)
    n_proj = config.n_tables * config.hashes_per_table
    proj = rng.standard_normal((dim, n_proj))
    offsets = rng.uniform(0.0, width, size=n_proj)
    scores = (csr @ proj + offsets) / width
    keys = np.floor(scores).astype(np.int64).reshape(
        n_entries, config.n_tables, config.hashes_per_table
    )
    if assignment is None:
        assignment = np.arange(n_entries, dtype=np.int64)
    elif len(assignment) != n_entries:
        raise ConfigError("assignment length must match the number of vectors")
    return LshTable(n_entries, keys, config, width, np.asarray(assignment))


def query_lsh_table(cluster: Iterable[int], table: LshTable) -> np.ndarray:
    """All entries colliding with any member of ``cluster``, members excluded."""
    return table.collided(cluster)


def topk_neighbors(
    cluster_id: int,
    candidate_ids: Iterable[int],
    table: LshTable,
    k: int,
) -> list[int]:
    """The k candidate clusters with the highest size-normalized collision tally.

    Every collided entry adds 1/|candidate| to its cluster's tally; ties rank
    by lower cluster id; fewer than k clusters may return.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    collided = table.collided(table.entries_of(cluster_id))
    if len(collided) == 0:
        return []
    owners, counts = np.unique(table.registry[collided], return_counts=True)
    candidates = np.unique(np.asarray(list(candidate_ids), dtype=np.int64))
    keep = np.isin(owners, candidates, assume_unique=True) & (owners != cluster_id)
    owners, counts = owners[keep], counts[keep]
    if len(owners) == 0:
        return []
    tallies = counts / np.array(
        [len(table.cluster_entries[int(o)]) for o in owners], dtype=float
    )
    order = np.lexsort((owners, -tallies))  # ties rank by lower cluster id
    return [int(owners[i]) for i in order[:k]]


def on_merge(table: LshTable, absorbed: int, survivor: int) -> None:
    """Point the absorbed cluster's entries at the survivor; buckets untouched."""
    if survivor not in table.cluster_entries:
        raise NotFoundError(f"unknown cluster id {survivor}")
    moved = table.cluster_entries.pop(absorbed, None)
    if moved is None:
        raise NotFoundError(f"unknown cluster id {absorbed}")
    table.registry[moved] = survivor
    table.cluster_entries[survivor].extend(moved)

"""Spectral cold-start clustering: SVD embeddings plus seeded k-means.

Produces a coarse initial clustering that the merge engine then compresses.
The matrix is degree-normalized on both sides, its leading singular vectors
(skipping the first) become row/column embeddings, and each side is k-means
clustered separately. Zero-degree rows and columns are split out first and
appended as singleton clusters.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .cost import Cluster, Clustering
from .errors import ConfigError, ConvergenceError, ZeroDegreeError
from .matrix import ExplanationMatrix

log = logging.getLogger("explsum")

K_CAP = 200


@dataclass(frozen=True)
class SpectralConfig:
    k_rows: int | None = None  # default: ceil(sqrt(m)), capped
    k_cols: int | None = None
    n_singular_vectors: int | None = None  # default: ceil(log2(max(k))) + 1
    power_iterations: int = 12
    seed: int = 0

    def validate(self) -> None:
        for k in (self.k_rows, self.k_cols):
            if k is not None and k < 1:
                raise ConfigError("cluster counts must be >= 1")
        if self.n_singular_vectors is not None and self.n_singular_vectors < 1:
            raise ConfigError("n_singular_vectors must be >= 1")
        if self.power_iterations < 0:
            raise ConfigError("power_iterations must be >= 0")


def _csr(matrix: ExplanationMatrix) -> sp.csr_matrix:
    return sp.csr_matrix(
        (matrix.vals, (matrix.rows, matrix.cols)),
        shape=(matrix.n_rows, matrix.n_cols),
    )


def degree_normalize(matrix: ExplanationMatrix) -> sp.csr_matrix:
    """Scale entries by 1/sqrt(row sum * column sum).

    Zero-degree rows or columns must be split out by the caller; hitting one
    here is a bug guard.
    """
    d1 = matrix.row_masses()
    d2 = matrix.col_masses()
    if np.any(d1 <= 0) or np.any(d2 <= 0):
        raise ZeroDegreeError("zero-degree row/column reached degree_normalize")
    return _scale(_csr(matrix), d1, d2)


def _scale(csr: sp.csr_matrix, d1: np.ndarray, d2: np.ndarray) -> sp.csr_matrix:
    r = sp.diags(1.0 / np.sqrt(d1))
    c = sp.diags(1.0 / np.sqrt(d2))
    return (r @ csr @ c).tocsr()


def truncated_svd(
    a,
    n_components: int,
    power_iterations: int = 12,
    seed: int = 0,
    oversample: int = 6,
    tol: float = 5e-3,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Leading singular triplets via randomized subspace iteration.

    Returns (U, s, V) with orthonormal columns, non-increasing singular
    values, and each U column's largest-magnitude component positive (the
    paired V column is flipped along with it). Raises
    :class:`ConvergenceError` when the singular values have not stabilized
    within the iteration budget.
    """
    a = sp.csr_matrix(a) if sp.issparse(a) else np.asarray(a, dtype=float)
    m, n = a.shape
    if not 1 <= n_components <= min(m, n):
        raise ConfigError(f"n_components must be in 1..{min(m, n)}")

    def project(q):  # q.T @ a without densifying a
        if sp.issparse(a):
            return np.asarray((a.T @ q).T)
        return q.T @ a

    rng = np.random.default_rng(seed)
    p = min(n, n_components + oversample)
    q_mat, _ = np.linalg.qr(a @ rng.standard_normal((n, p)))
    prev: np.ndarray | None = None
    residual = math.inf
    for _ in range(max(power_iterations, 1)):
        q_mat, _ = np.linalg.qr(a.T @ q_mat)
        q_mat, _ = np.linalg.qr(a @ q_mat)
        s_now = np.linalg.svd(project(q_mat), compute_uv=False)[:n_components]
        if prev is not None:
            scale = max(float(prev[0]), 1e-300)
            residual = float(np.max(np.abs(s_now - prev))) / scale
        prev = s_now
    if residual > tol and power_iterations > 1:
        raise ConvergenceError(
            "singular values did not stabilize within the iteration budget",
            residual=residual if residual != math.inf else 1.0,
        )
    b = project(q_mat)
    ub, s, vt = np.linalg.svd(b, full_matrices=False)
    u = q_mat @ ub
    u = u[:, :n_components]
    s = s[:n_components]
    vt = vt[:n_components]
    for i in range(n_components):
        j = int(np.argmax(np.abs(u[:, i])))
        if u[j, i] < 0:
            u[:, i] = -u[:, i]
            vt[i, :] = -vt[i, :]
    return u, s, vt.T


def kmeans(
    points: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iterations: int = 50,
    n_restarts: int = 5,
) -> np.ndarray:
    """Seeded k-means++ with Lloyd iterations and multi-restart.

    Empty clusters re-seed at the point farthest from its assigned center;
    the restart with the lowest within-cluster squared distance wins.
    Returns per-point labels.
    """
    n = len(points)
    if not 1 <= k <= n:
        raise ConfigError(f"k must be in 1..{n}")
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    best_labels: np.ndarray | None = None
    best_inertia = math.inf
    for _ in range(max(1, n_restarts)):
        labels, inertia = _kmeans_once(points, k, rng, max_iterations)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    assert best_labels is not None
    return best_labels


def _kmeans_once(
    points: np.ndarray, k: int, rng: np.random.Generator, max_iterations: int
) -> tuple[np.ndarray, float]:
    n = len(points)
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[int(rng.integers(n))]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[i] = points[idx]
        d2 = np.minimum(d2, ((points - centers[i]) ** 2).sum(axis=1))
    labels = np.zeros(n, dtype=np.int64)
    dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    for _ in range(max_iterations):
        new_labels = dists.argmin(axis=1)
        for j in range(k):
            sel = new_labels == j
            if sel.any():
                centers[j] = points[sel].mean(axis=0)
            else:
                # re-seed an empty cluster at the farthest point
                far = int(dists[np.arange(n), new_labels].argmax())
                centers[j] = points[far]
                new_labels[far] = j
        dists = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(dists[np.arange(n), labels].sum())
    return labels, inertia


def resolve_k(requested: int | None, n_lines: int) -> int:
    if requested is not None:
        return requested
    return min(max(1, math.ceil(math.sqrt(n_lines))), K_CAP, n_lines)


def precluster(matrix: ExplanationMatrix, config: SpectralConfig) -> Clustering:
    """Coarse co-clustering from spectral embeddings.

    Rows are clustered on D1^(-1/2) U[:, 1..l], columns on D2^(-1/2) V[:, 1..l]
    where U, V come from the degree-normalized matrix; each side runs its own
    seeded k-means. Zero-degree lines become trailing singleton clusters.
    """
    config.validate()
    d1 = matrix.row_masses()
    d2 = matrix.col_masses()
    live_r = np.flatnonzero(d1 > 0)
    live_c = np.flatnonzero(d2 > 0)
    k_rows = resolve_k(config.k_rows, len(live_r))
    k_cols = resolve_k(config.k_cols, len(live_c))
    if k_rows > len(live_r) or k_cols > len(live_c):
        raise ConfigError(
            f"requested {k_rows}x{k_cols} clusters but only "
            f"{len(live_r)}x{len(live_c)} nonzero lines exist"
        )
    seeds = np.random.SeedSequence(config.seed).spawn(3)
    rng_rows = np.random.default_rng(seeds[0])
    rng_cols = np.random.default_rng(seeds[1])
    svd_seed = int(seeds[2].generate_state(1)[0])

    # compact to the live lines, normalize, embed
    rmap = {int(r): i for i, r in enumerate(live_r)}
    cmap = {int(c): i for i, c in enumerate(live_c)}
    rows = np.array([rmap[int(r)] for r in matrix.rows], dtype=np.int64)
    cols = np.array([cmap[int(c)] for c in matrix.cols], dtype=np.int64)
    csr = sp.csr_matrix(
        (matrix.vals, (rows, cols)), shape=(len(live_r), len(live_c))
    )
    d1_live = d1[live_r]
    d2_live = d2[live_c]
    n_vec = config.n_singular_vectors
    if n_vec is None:
        n_vec = math.ceil(math.log2(max(k_rows, k_cols, 2))) + 1
    min_side = min(len(live_r), len(live_c))
    if min_side < 2:
        # no spectral structure to exploit: embed lines by their mass
        row_emb = d1_live[:, None]
        col_emb = d2_live[:, None]
    else:
        n_vec = min(n_vec, min_side - 1)
        a_n = _scale(csr, d1_live, d2_live)
        u, s, v = truncated_svd(
            a_n, n_vec + 1, config.power_iterations, seed=svd_seed
        )
        # the leading vector is kept: after the D^(-1/2) scaling it is constant
        # on connected data (harmless to k-means) but carries the component
        # contrast when the graph is disconnected and the top singular value
        # is degenerate, where an arbitrary rotation mixes it into the rest.
        # dimensions are weighted by their singular values so that null-space
        # directions of low-rank matrices cannot dominate the geometry
        row_emb = (u * s[None, :]) / np.sqrt(d1_live)[:, None]
        col_emb = (v * s[None, :]) / np.sqrt(d2_live)[:, None]
    row_labels = kmeans(row_emb, k_rows, rng_rows)
    col_labels = kmeans(col_emb, k_cols, rng_cols)

    def build(live, labels, k, dead, size):
        clusters = []
        next_id = 0
        for lab in range(k):
            members = tuple(int(live[i]) for i in np.flatnonzero(labels == lab))
            if members:
                clusters.append(Cluster(next_id, members))
                next_id += 1
        for idx in dead:
            clusters.append(Cluster(next_id, (int(idx),)))
            next_id += 1
        return tuple(clusters)

    dead_r = [int(i) for i in range(matrix.n_rows) if d1[i] <= 0]
    dead_c = [int(j) for j in range(matrix.n_cols) if d2[j] <= 0]
    clustering = Clustering(
        build(live_r, row_labels, k_rows, dead_r, matrix.n_rows),
        build(live_c, col_labels, k_cols, dead_c, matrix.n_cols),
    )
    clustering.validate(matrix.n_rows, matrix.n_cols)
    log.debug(
        "preclustered to %d row and %d column clusters",
        len(clustering.row_clusters),
        len(clustering.col_clusters),
    )
    return clustering

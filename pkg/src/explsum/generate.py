"""Synthetic explanation matrices for benchmarks and recovery tests."""

from __future__ import annotations

import warnings

import numpy as np

from .errors import ConfigError
from .matrix import ColMeta, ExplanationMatrix, RowMeta, normalize


def planted_blocks(
    m: int,
    n: int,
    k_blocks: int,
    noise: float = 0.05,
    density: float = 0.85,
    spike_rate: float = 0.02,
    spike_scale: float = 20.0,
    accuracy: float = 0.9,
    block_scale: float = 0.45,
    noise_value_scale: float = 0.3,
    jitter: float = 0.5,
    seed: int = 0,
) -> tuple[ExplanationMatrix, np.ndarray, np.ndarray]:
    """Block-diagonal sparse matrix with off-block noise and value spikes.

    Rows and columns are split evenly into ``k_blocks`` groups. Cells inside a
    matching block are nonzero with probability ``density``; cells elsewhere
    with probability ``density * noise`` at ``noise_value_scale`` of the
    block's value level. Block value levels decay geometrically by
    ``block_scale`` so mass is uneven across groups, and a small fraction of
    in-block values is inflated by ``spike_scale`` so smoothing has work to
    do. Returns the matrix plus the planted row and column labels.
    """
    if k_blocks < 1 or k_blocks > min(m, n):
        raise ConfigError("k_blocks must be between 1 and min(m, n)")
    rng = np.random.default_rng(seed)
    row_labels = (np.arange(m) * k_blocks) // m
    col_labels = (np.arange(n) * k_blocks) // n
    same = row_labels[:, None] == col_labels[None, :]
    prob = np.where(same, density, density * noise)
    mask = rng.random((m, n)) < prob
    # keep every row alive so planted labels stay meaningful
    for i in np.flatnonzero(~mask.any(axis=1)):
        block_cols = np.flatnonzero(col_labels == row_labels[i])
        mask[i, rng.choice(block_cols)] = True
    rows, cols = np.nonzero(mask)
    vals = rng.uniform(1.0 - jitter, 1.0 + jitter, size=len(rows))
    # noise rides at the quieter of the two blocks it bridges, so heavy
    # blocks cannot drown the signal of light ones
    level = block_scale ** np.maximum(
        row_labels[rows], col_labels[cols]
    ).astype(float)
    in_block = row_labels[rows] == col_labels[cols]
    vals *= level * np.where(in_block, 1.0, noise_value_scale)
    # spikes live in the heaviest block: a relative spike inside a quiet
    # block would sit below any global value cap and could never be smoothed
    spikes = (
        (rng.random(len(vals)) < spike_rate) & in_block & (row_labels[rows] == 0)
    )
    vals[spikes] *= spike_scale
    classes = [f"class{int(b)}" for b in row_labels]
    preds = []
    for b in row_labels:
        if rng.random() < accuracy or k_blocks == 1:
            preds.append(f"class{int(b)}")
        else:
            other = (int(b) + 1 + int(rng.integers(k_blocks - 1))) % k_blocks
            preds.append(f"class{other}")
    row_meta = tuple(
        RowMeta(f"r{i + 1}", classes[i], preds[i]) for i in range(m)
    )
    col_meta = tuple(
        ColMeta(f"c{j + 1}", f"feature {j + 1}", f"group{int(col_labels[j])}")
        for j in range(n)
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        matrix = normalize(
            (m, n),
            list(zip(rows.tolist(), cols.tolist(), vals.tolist())),
            row_meta=row_meta,
            col_meta=col_meta,
        )
    return matrix, row_labels, col_labels


def random_sparse(
    m: int, n: int, density: float = 0.4, seed: int = 0
) -> ExplanationMatrix:
    """Unstructured sparse matrix; at least one nonzero guaranteed."""
    rng = np.random.default_rng(seed)
    mask = rng.random((m, n)) < density
    if not mask.any():
        mask[int(rng.integers(m)), int(rng.integers(n))] = True
    vals = rng.uniform(0.2, 1.0, size=int(mask.sum()))
    rows, cols = np.nonzero(mask)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        return normalize(
            (m, n), list(zip(rows.tolist(), cols.tolist(), vals.tolist()))
        )


def adjusted_rand_index(labels_a, labels_b) -> float:
    """Chance-corrected agreement between two labelings of the same items."""
    a = np.asarray(labels_a)
    b = np.asarray(labels_b)
    if a.shape != b.shape:
        raise ConfigError("labelings must have equal length")
    n = len(a)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ka, kb = ai.max() + 1, bi.max() + 1
    contingency = np.zeros((ka, kb), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_ij = comb2(contingency).sum()
    sum_a = comb2(contingency.sum(axis=1)).sum()
    sum_b = comb2(contingency.sum(axis=0)).sum()
    total = comb2(n)
    expected = sum_a * sum_b / total if total > 0 else 0.0
    max_index = 0.5 * (sum_a + sum_b)
    if max_index == expected:
        return 1.0
    return float((sum_ij - expected) / (max_index - expected))

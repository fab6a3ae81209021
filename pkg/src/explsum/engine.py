"""Randomized bottom-up co-cluster merging.

Rows and columns start as singleton clusters (or as a supplied coarse
clustering). Each step pops a uniformly random cluster from one side's active
list, scores a merge against every remaining cluster on that side -- active
and finalized alike -- and either merges it into the best candidate when the
cost reduction is strictly positive, or finalizes it. Sides alternate; once
one active list drains the other continues alone; the run ends when both are
empty.

Candidate retrieval is pluggable: ``exhaustive`` scans the whole pool,
``lsh`` asks the hash index for the top-k nearest clusters.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from . import lsh as lsh_mod
from .cost import Clustering, CostBreakdown, CostState, total_cost
from .errors import (
    ConfigError,
    EmptyPoolError,
    IterationCapError,
    TooLargeError,
)
from .lsh import LshConfig
from .matrix import ExplanationMatrix

log = logging.getLogger("explsum")

TRACE_CAP = 100_000


@dataclass(frozen=True)
class EngineConfig:
    beta_r: float = 0.05
    beta_c: float = 0.05
    seed: int = 0
    candidate_mode: str = "exhaustive"  # exhaustive | lsh
    k_neighbors: int = 10
    max_iterations: int | None = None
    loss_mode: str = "marginal"
    lsh: LshConfig = field(default_factory=LshConfig)

    def validate(self) -> None:
        if self.beta_r < 0 or self.beta_c < 0:
            raise ConfigError("cluster-count penalties must be nonnegative")
        if self.candidate_mode not in ("exhaustive", "lsh"):
            raise ConfigError(f"unknown candidate mode {self.candidate_mode!r}")
        if self.k_neighbors < 1:
            raise ConfigError("k_neighbors must be >= 1")
        self.lsh.validate()


@dataclass(frozen=True)
class TraceEvent:
    step: int
    side: str
    popped: int
    best: int | None
    delta: float | None
    accepted: bool
    n_candidates: int


@dataclass(frozen=True)
class SummarizeResult:
    clustering: Clustering
    cost: CostBreakdown
    trace: tuple[TraceEvent, ...] | None
    evaluations: int
    accepted_merges: int
    iterations: int


class EngineState:
    """Mutable run state: cost bookkeeping, active/final lists, RNG, counters."""

    def __init__(
        self,
        matrix: ExplanationMatrix,
        initial: Clustering,
        config: EngineConfig,
        with_trace: bool = False,
    ):
        self.matrix = matrix
        self.config = config
        self.cost = CostState(matrix, initial, config.loss_mode)
        self.active_rows = [cl.id for cl in initial.row_clusters]
        self.active_cols = [cl.id for cl in initial.col_clusters]
        self.final_rows: list[int] = []
        self.final_cols: list[int] = []
        # candidate pool per side: every merge-eligible cluster id (active
        # and finalized alike), kept sorted; ids only enter at init and only
        # leave when popped or absorbed, so no per-step sorting is needed
        self._pool = {
            "row": sorted(self.active_rows),
            "col": sorted(self.active_cols),
        }
        seeds = np.random.SeedSequence(config.seed).spawn(3)
        self.rng = np.random.default_rng(seeds[0])
        self.iteration = 0
        self.evaluations = 0
        self.accepted_merges = 0
        self.trace: list[TraceEvent] | None = [] if with_trace else None
        self.tables: dict[str, lsh_mod.LshTable] = {}
        if config.candidate_mode == "lsh":
            csr = sp.csr_matrix(
                (matrix.vals, (matrix.rows, matrix.cols)),
                shape=(matrix.n_rows, matrix.n_cols),
            )
            row_assign = _id_assignment(initial.row_clusters, matrix.n_rows)
            col_assign = _id_assignment(initial.col_clusters, matrix.n_cols)
            self.tables["row"] = lsh_mod.build_lsh_table(
                csr, replace(config.lsh, seed=int(seeds[1].generate_state(1)[0])),
                assignment=row_assign,
            )
            self.tables["col"] = lsh_mod.build_lsh_table(
                csr.T.tocsr(),
                replace(config.lsh, seed=int(seeds[2].generate_state(1)[0])),
                assignment=col_assign,
            )

    def lists(self, side: str) -> tuple[list[int], list[int]]:
        if side == "row":
            return self.active_rows, self.final_rows
        if side == "col":
            return self.active_cols, self.final_cols
        raise ConfigError(f"side must be 'row' or 'col', got {side!r}")

    def pool(self, side: str) -> list[int]:
        if side not in self._pool:
            raise ConfigError(f"side must be 'row' or 'col', got {side!r}")
        return self._pool[side]

    def pool_remove(self, side: str, cluster_id: int) -> None:
        pool = self.pool(side)
        idx = bisect.bisect_left(pool, cluster_id)
        if idx < len(pool) and pool[idx] == cluster_id:
            del pool[idx]

    def pool_insert(self, side: str, cluster_id: int) -> None:
        bisect.insort(self.pool(side), cluster_id)

    def beta(self, side: str) -> float:
        return self.config.beta_r if side == "row" else self.config.beta_c

    def result(self, with_cost: bool = True) -> SummarizeResult:
        clustering = self.cost.clustering()
        cost = total_cost(
            self.matrix,
            clustering,
            self.config.beta_r,
            self.config.beta_c,
            self.config.loss_mode,
        )
        return SummarizeResult(
            clustering=clustering,
            cost=cost,
            trace=tuple(self.trace) if self.trace is not None else None,
            evaluations=self.evaluations,
            accepted_merges=self.accepted_merges,
            iterations=self.iteration,
        )


def _id_assignment(clusters, size: int) -> np.ndarray:
    out = np.full(size, -1, dtype=np.int64)
    for cl in clusters:
        for i in cl.members:
            out[i] = cl.id
    return out


def random_pop(state: EngineState, side: str) -> int:
    """Remove and return a uniformly random cluster id from the active list."""
    active, _ = state.lists(side)
    if not active:
        raise EmptyPoolError(f"no active {side} clusters left")
    idx = int(state.rng.integers(len(active)))
    popped = active.pop(idx)
    state.pool_remove(side, popped)
    return popped

def step(
    state: EngineState,
    side: str,
    matrix: ExplanationMatrix,
    config: EngineConfig,
) -> EngineState:
    """One merge-or-finalize step on ``side``; mutates and returns ``state``."""
    popped = random_pop(state, side)
    _, final = state.lists(side)
    pool = state.pool(side)
    if config.candidate_mode == "lsh" and pool:
        candidates = sorted(
            lsh_mod.topk_neighbors(
                popped, pool, state.tables[side], config.k_neighbors
            )
        )
    else:
        candidates = pool
    n_candidates = len(candidates)
    best_id: int | None = None
    best_delta: float | None = None
    if candidates:
        deltas = state.beta(side) - state.cost.loss_delta_many(side, popped, candidates)
        state.evaluations += len(candidates)
        pos = int(np.argmax(deltas))  # ties resolve to the lowest cluster id
        best_id = candidates[pos]
        best_delta = float(deltas[pos])
    accepted = best_delta is not None and best_delta > 0.0
    if accepted:
        state.cost.apply_merge(side, survivor=best_id, absorbed=popped)
        state.accepted_merges += 1
        if state.tables:
            lsh_mod.on_merge(state.tables[side], absorbed=popped, survivor=best_id)
    else:
        final.append(popped)
        state.pool_insert(side, popped)
    if state.trace is not None and len(state.trace) < TRACE_CAP:
        state.trace.append(
            TraceEvent(
                step=state.iteration,
                side=side,
                popped=popped,
                best=best_id,
                delta=best_delta,
                accepted=accepted,
                n_candidates=n_candidates,
            )
        )
    state.iteration += 1
    return state


def summarize(
    matrix: ExplanationMatrix,
    config: EngineConfig,
    initial: Clustering | None = None,
    with_trace: bool = False,
) -> SummarizeResult:
    """Run the merge loop to completion and return clustering, cost and trace."""
    config.validate()
    if initial is None:
        initial = Clustering.singletons(matrix.n_rows, matrix.n_cols)
    initial.validate(matrix.n_rows, matrix.n_cols)
    state = EngineState(matrix, initial, config, with_trace)
    while state.active_rows or state.active_cols:
        if (
            config.max_iterations is not None
            and state.iteration >= config.max_iterations
        ):
            raise IterationCapError(
                f"exceeded {config.max_iterations} iterations",
                partial=state.result(),
            )
        if state.active_rows:
            step(state, "row", matrix, config)
        if state.active_cols:
            step(state, "col", matrix, config)
    out = state.result()
    log.info(
        "summarized %dx%d: %d+%d clusters, total %.4f bits, %d evaluations",
        matrix.n_rows,
        matrix.n_cols,
        len(out.clustering.row_clusters),
        len(out.clustering.col_clusters),
        out.cost.total,
        out.evaluations,
    )
    return out


# ---------------------------------------------------------------------------
# exhaustive optimum (test oracle)


def _set_partitions(n: int):
    """All partitions of range(n) as restricted-growth labels, in lex order."""
    a = [0] * n
    while True:
        yield tuple(a)
        i = n - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                a[i] += 1
                for j in range(i + 1, n):
                    a[j] = 0
                break
            i -= 1
        else:
            return


def brute_force_optimal(
    matrix: ExplanationMatrix,
    beta_r: float,
    beta_c: float,
    loss_mode: str = "marginal",
) -> tuple[Clustering, float]:
    """Enumerate every row partition x column partition; return the cheapest.

    Exact ties resolve to the lexicographically smallest assignment pair.
    Only feasible for tiny matrices; bails out beyond 7x7.
    """
    m, n = matrix.n_rows, matrix.n_cols
    if m > 7 or n > 7:
        raise TooLargeError(f"{m}x{n} exceeds the 7x7 enumeration bound")
    if beta_r < 0 or beta_c < 0:
        raise ConfigError("cluster-count penalties must be nonnegative")
    p_rows = matrix.row_masses()
    p_cols = matrix.col_masses()
    s_ent = matrix.vals * np.log2(
        matrix.vals / (p_rows[matrix.rows] * p_cols[matrix.cols])
    )
    erows, ecols, evals = matrix.rows, matrix.cols, matrix.vals
    best: tuple[float, tuple, Clustering] | None = None
    col_partitions = list(_set_partitions(n))
    for ra_t in _set_partitions(m):
        ra = np.array(ra_t, dtype=np.int64)
        kr = int(ra.max()) + 1
        s_r = np.bincount(ra, weights=p_rows, minlength=kr)
        ra_ent = ra[erows]
        for ca_t in col_partitions:
            ca = np.array(ca_t, dtype=np.int64)
            kc = int(ca.max()) + 1
            s_c = np.bincount(ca, weights=p_cols, minlength=kc)
            flat = ra_ent * kc + ca[ecols]
            mass = np.bincount(flat, weights=evals, minlength=kr * kc)
            sterm = np.bincount(flat, weights=s_ent, minlength=kr * kc)
            nz = mass > 0
            w = np.zeros(kr * kc)
            st = (s_r[:, None] * s_c[None, :]).ravel()
            w[nz] = sterm[nz] + mass[nz] * np.log2(st[nz] / mass[nz])
            w2 = w.reshape(kr, kc)
            if loss_mode == "baseline":
                loss = float(w2.sum())
            elif loss_mode == "raw":
                loss = 2.0 * float(w2.sum())
            else:
                row_w = w2.sum(axis=1)
                col_w = w2.sum(axis=0)
                loss = float(
                    np.divide(row_w, s_r, out=np.zeros(kr), where=s_r > 0).sum()
                    + np.divide(col_w, s_c, out=np.zeros(kc), where=s_c > 0).sum()
                )
            t_cost = beta_r * kr + beta_c * kc + max(loss, 0.0)
            if best is None or t_cost < best[0]:
                best = (t_cost, (ra_t, ca_t), Clustering.from_assignments(ra_t, ca_t))
    assert best is not None
    return best[2], best[0]

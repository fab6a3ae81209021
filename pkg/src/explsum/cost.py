"""Information-theoretic cost of a co-clustering.

The summary of an explanation matrix is a pair of partitions (row clusters,
column clusters). Its quality is scored in bits as

    total = beta_r * n_row_clusters + beta_c * n_col_clusters + loss

where the loss compares the matrix against the product-form reconstruction
implied by the clustering: inside co-cluster (rh, ch) every entry is
approximated by

    q(r, c) = mass(rh, ch) * pR(r)/mass(rh) * pC(c)/mass(ch).

Loss modes:

* ``marginal`` (default): sum over row clusters of the KL divergence between
  the slice's conditional distributions (slice entries divided by slice mass),
  plus the symmetric sum over column clusters. Each slice weighs equally,
  which keeps high-mass entries from dominating.
* ``raw``: the same slice sums without conditioning; algebraically twice the
  whole-matrix KL divergence.
* ``baseline``: the whole-matrix KL divergence itself.

All of these decompose over co-clusters. With M = co-cluster mass,
S = sum of v*log2(v / (pR(r)*pC(c))) over the co-cluster's entries, and s, t
the row/column cluster masses, the restricted KL equals

    W(rh, ch) = S + M * log2(s * t / M)

and S, M are additive under merges on either side. :class:`CostState` keeps
per-cluster sparse profiles of (M, S) so a merge delta only touches the
clusters' joint support.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    InfiniteDivergenceError,
    NotFoundError,
    ShapeError,
    ZeroMassError,
)
from .matrix import ExplanationMatrix

LOG2 = math.log(2.0)
LOSS_MODES = ("marginal", "raw", "baseline")


# ---------------------------------------------------------------------------
# clustering


@dataclass(frozen=True)
class Cluster:
    id: int
    members: tuple[int, ...]

    def __post_init__(self):
        if not self.members:
            raise ShapeError(f"cluster {self.id} is empty")


@dataclass(frozen=True)
class Clustering:
    """Disjoint partitions of row indices and column indices."""

    row_clusters: tuple[Cluster, ...]
    col_clusters: tuple[Cluster, ...]

    @staticmethod
    def singletons(m: int, n: int) -> "Clustering":
        return Clustering(
            tuple(Cluster(i, (i,)) for i in range(m)),
            tuple(Cluster(j, (j,)) for j in range(n)),
        )

    @staticmethod
    def from_assignments(row_assign, col_assign) -> "Clustering":
        """Build from per-index labels; cluster ids follow first occurrence."""

        def side(assign):
            groups: dict[int, list[int]] = {}
            for idx, lab in enumerate(assign):
                groups.setdefault(int(lab), []).append(idx)
            ordered = sorted(groups.values(), key=lambda g: g[0])
            return tuple(Cluster(k, tuple(g)) for k, g in enumerate(ordered))

        return Clustering(side(row_assign), side(col_assign))

    def validate(self, m: int, n: int) -> None:
        for clusters, size, what in (
            (self.row_clusters, m, "row"),
            (self.col_clusters, n, "column"),
        ):
            seen: set[int] = set()
            ids: set[int] = set()
            for cl in clusters:
                if cl.id in ids:
                    raise ShapeError(f"duplicate {what} cluster id {cl.id}")
                ids.add(cl.id)
                for i in cl.members:
                    if not 0 <= i < size:
                        raise ShapeError(f"{what} index {i} outside 0..{size - 1}")
                    if i in seen:
                        raise ShapeError(f"{what} index {i} in two clusters")
                    seen.add(i)
            if len(seen) != size:
                raise ShapeError(f"{what} clusters do not cover all indices")

    def assignments(self, side: str, size: int) -> np.ndarray:
        """Index -> position of its cluster within this clustering's order."""
        clusters = self.row_clusters if side == "row" else self.col_clusters
        out = np.full(size, -1, dtype=np.int64)
        for pos, cl in enumerate(clusters):
            for i in cl.members:
                out[i] = pos
        if np.any(out < 0):
            raise ShapeError(f"{side} clusters do not cover all indices")
        return out

    def canonical_key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Restricted-growth labels for tie-breaking and equality tests."""

        def rgs(clusters, size):
            assign = [0] * size
            for pos, cl in enumerate(clusters):
                for i in cl.members:
                    assign[i] = pos
            relabel: dict[int, int] = {}
            out = []
            for lab in assign:
                if lab not in relabel:
                    relabel[lab] = len(relabel)
                out.append(relabel[lab])
            return tuple(out)

        m = max(i for cl in self.row_clusters for i in cl.members) + 1
        n = max(i for cl in self.col_clusters for i in cl.members) + 1
        return rgs(self.row_clusters, m), rgs(self.col_clusters, n)


# ---------------------------------------------------------------------------
# marginals and the entrywise approximation


@dataclass(frozen=True)
class Marginals:
    """Row/column and cluster-level masses of a clustered matrix."""

    p_rows: np.ndarray
    p_cols: np.ndarray
    row_ids: tuple[int, ...]
    col_ids: tuple[int, ...]
    p_row_clusters: np.ndarray
    p_col_clusters: np.ndarray
    p_cocluster: np.ndarray  # (n_row_clusters, n_col_clusters)
    row_assign: np.ndarray  # row index -> position in row_ids
    col_assign: np.ndarray


def marginals(matrix: ExplanationMatrix, clustering: Clustering) -> Marginals:
    clustering.validate(matrix.n_rows, matrix.n_cols)
    p_rows = matrix.row_masses()
    p_cols = matrix.col_masses()
    ra = clustering.assignments("row", matrix.n_rows)
    ca = clustering.assignments("col", matrix.n_cols)
    kr = len(clustering.row_clusters)
    kc = len(clustering.col_clusters)
    flat = ra[matrix.rows] * kc + ca[matrix.cols]
    p_hat = np.bincount(flat, weights=matrix.vals, minlength=kr * kc).reshape(kr, kc)
    return Marginals(
        p_rows=p_rows,
        p_cols=p_cols,
        row_ids=tuple(cl.id for cl in clustering.row_clusters),
        col_ids=tuple(cl.id for cl in clustering.col_clusters),
        p_row_clusters=np.bincount(ra, weights=p_rows, minlength=kr),
        p_col_clusters=np.bincount(ca, weights=p_cols, minlength=kc),
        p_cocluster=p_hat,
        row_assign=ra,
        col_assign=ca,
    )


def approx_entry(marg: Marginals, r: int, c: int) -> float:
    """Reconstructed value at (r, c) under the clustering's product form."""
    if not 0 <= r < len(marg.row_assign) or not 0 <= c < len(marg.col_assign):
        raise ShapeError(f"entry ({r}, {c}) outside the matrix")
    ri = marg.row_assign[r]
    ci = marg.col_assign[c]
    s = marg.p_row_clusters[ri]
    t = marg.p_col_clusters[ci]
    if s <= 0.0 or t <= 0.0:
        raise ZeroMassError(f"cluster containing ({r}, {c}) has zero mass")
    return float(
        marg.p_cocluster[ri, ci] * (marg.p_rows[r] / s) * (marg.p_cols[c] / t)
    )


def kl_divergence(p, q) -> float:
    """KL divergence in bits; 0*log(0/q) taken as 0; requires supp(p) in supp(q)."""
    if isinstance(p, Mapping):
        if not isinstance(q, Mapping):
            raise ShapeError("p and q must both be mappings or both arrays")
        missing = [k for k, v in p.items() if v > 0 and q.get(k, 0.0) <= 0.0]
        if missing:
            raise InfiniteDivergenceError(f"q lacks mass on {missing[:5]}")
        keys = [k for k, v in p.items() if v > 0]
        pv = np.array([p[k] for k in keys], dtype=np.float64)
        qv = np.array([q[k] for k in keys], dtype=np.float64)
    else:
        pv = np.asarray(p, dtype=np.float64)
        qv = np.asarray(q, dtype=np.float64)
        if pv.shape != qv.shape:
            raise ShapeError("p and q must have equal length")
        mask = pv > 0
        if np.any(qv[mask] <= 0.0):
            raise InfiniteDivergenceError("q lacks mass on part of p's support")
        pv, qv = pv[mask], qv[mask]
    if len(pv) == 0:
        return 0.0
    return float(np.sum(pv * np.log2(pv / qv)))


# ---------------------------------------------------------------------------
# loss and total cost


@dataclass(frozen=True)
class CostBreakdown:
    """Model bits, loss bits and their sum, with per-slice loss detail."""

    model_cost: float
    loss: float
    total: float
    row_slice_loss: dict[int, float]
    col_slice_loss: dict[int, float]

    @property
    def per_slice(self) -> dict[str, dict[int, float]]:
        return {"rows": self.row_slice_loss, "cols": self.col_slice_loss}


def _entry_log_terms(matrix: ExplanationMatrix, marg: Marginals) -> np.ndarray:
    """Per-entry v*log2(v/q) under the clustering in ``marg``."""
    ri = marg.row_assign[matrix.rows]
    ci = marg.col_assign[matrix.cols]
    mass = marg.p_cocluster[ri, ci]
    s = marg.p_row_clusters[ri]
    t = marg.p_col_clusters[ci]
    q = mass * (marg.p_rows[matrix.rows] / s) * (marg.p_cols[matrix.cols] / t)
    assert np.all(q > 0.0), "approximation lost support (bug)"
    return matrix.vals * np.log2(matrix.vals / q)


def marginal_loss(
    matrix: ExplanationMatrix,
    clustering: Clustering,
    loss_mode: str = "marginal",
) -> CostBreakdown:
    """Loss of ``clustering`` on ``matrix``; model cost left at zero."""
    if loss_mode not in LOSS_MODES:
        raise ConfigError(f"unknown loss mode {loss_mode!r}")
    marg = marginals(matrix, clustering)
    w = _entry_log_terms(matrix, marg)
    kr = len(marg.row_ids)
    kc = len(marg.col_ids)
    row_w = np.bincount(marg.row_assign[matrix.rows], weights=w, minlength=kr)
    col_w = np.bincount(marg.col_assign[matrix.cols], weights=w, minlength=kc)
    if loss_mode == "marginal":
        rs = np.divide(
            row_w,
            marg.p_row_clusters,
            out=np.zeros_like(row_w),
            where=marg.p_row_clusters > 0,
        )
        cs = np.divide(
            col_w,
            marg.p_col_clusters,
            out=np.zeros_like(col_w),
            where=marg.p_col_clusters > 0,
        )
        loss = float(rs.sum() + cs.sum())
    elif loss_mode == "raw":
        rs, cs = row_w, col_w
        loss = float(row_w.sum() + col_w.sum())
    else:  # baseline: whole-matrix KL, attributed to row slices for detail
        rs, cs = row_w, np.zeros_like(col_w)
        loss = float(row_w.sum())
    # tiny negative values are roundoff on exact reconstructions
    loss = max(loss, 0.0)
    return CostBreakdown(
        model_cost=0.0,
        loss=loss,
        total=loss,
        row_slice_loss={marg.row_ids[i]: float(rs[i]) for i in range(kr)},
        col_slice_loss={marg.col_ids[j]: float(cs[j]) for j in range(kc)},
    )


def total_cost(
    matrix: ExplanationMatrix,
    clustering: Clustering,
    beta_r: float,
    beta_c: float,
    loss_mode: str = "marginal",
) -> CostBreakdown:
    if beta_r < 0 or beta_c < 0:
        raise ConfigError("cluster-count penalties must be nonnegative")
    breakdown = marginal_loss(matrix, clustering, loss_mode)
    model = beta_r * len(clustering.row_clusters) + beta_c * len(
        clustering.col_clusters
    )
    return CostBreakdown(
        model_cost=model,
        loss=breakdown.loss,
        total=model + breakdown.loss,
        row_slice_loss=breakdown.row_slice_loss,
        col_slice_loss=breakdown.col_slice_loss,
    )



# ---------------------------------------------------------------------------
# incremental state


class _Side:
    """Per-cluster bookkeeping for one side (rows or columns)."""

    __slots__ = ("ids", "id_to_slot", "mass", "wtot", "aover", "members")

    def __init__(self, clusters: tuple[Cluster, ...], index_mass: np.ndarray):
        k = len(clusters)
        self.ids = [cl.id for cl in clusters]
        self.id_to_slot = {cl.id: slot for slot, cl in enumerate(clusters)}
        self.mass = np.zeros(k)
        self.wtot = np.zeros(k)
        self.aover = np.zeros(k)
        self.members: list[list[int] | None] = [list(cl.members) for cl in clusters]
        for slot, cl in enumerate(clusters):
            self.mass[slot] = index_mass[list(cl.members)].sum()

    def slot(self, cluster_id: int) -> int:
        try:
            return self.id_to_slot[cluster_id]
        except KeyError:
            raise NotFoundError(f"unknown cluster id {cluster_id}") from None

    def alive_slots(self) -> list[int]:
        return [s for s, mem in enumerate(self.members) if mem is not None]


class CostState:
    """Live cost bookkeeping for one matrix under an evolving clustering.

    Holds dense co-cluster tables M (mass) and S (entry entropy terms) sized
    by the *initial* cluster counts, so merge deltas and merges are plain
    vector operations over the popped cluster's support. Queries are pure and
    safe to issue concurrently; merges require exclusive access.
    """

    def __init__(
        self,
        matrix: ExplanationMatrix,
        clustering: Clustering,
        loss_mode: str = "marginal",
    ):
        if loss_mode not in LOSS_MODES:
            raise ConfigError(f"unknown loss mode {loss_mode!r}")
        clustering.validate(matrix.n_rows, matrix.n_cols)
        self.matrix = matrix
        self.loss_mode = loss_mode
        self.p_rows = matrix.row_masses()
        self.p_cols = matrix.col_masses()
        self.rows = _Side(clustering.row_clusters, self.p_rows)
        self.cols = _Side(clustering.col_clusters, self.p_cols)

        kr = len(clustering.row_clusters)
        kc = len(clustering.col_clusters)
        ra = clustering.assignments("row", matrix.n_rows)
        ca = clustering.assignments("col", matrix.n_cols)
        s_ent = matrix.vals * np.log2(
            matrix.vals / (self.p_rows[matrix.rows] * self.p_cols[matrix.cols])
        )
        flat = ra[matrix.rows] * kc + ca[matrix.cols]
        self._M = np.bincount(flat, weights=matrix.vals, minlength=kr * kc).reshape(
            kr, kc
        )
        self._S = np.bincount(flat, weights=s_ent, minlength=kr * kc).reshape(kr, kc)
        w = self._w_table()
        self.rows.wtot = w.sum(axis=1)
        self.cols.wtot = w.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            m_over_t = np.where(self._M > 0, self._M / self.cols.mass[None, :], 0.0)
            m_over_s = np.where(self._M > 0, self._M / self.rows.mass[:, None], 0.0)
        self.rows.aover = m_over_t.sum(axis=1)
        self.cols.aover = m_over_s.sum(axis=0)

    def _w_table(self) -> np.ndarray:
        """Dense table of restricted KL values W = S + M*log2(s*t/M)."""
        st = self.rows.mass[:, None] * self.cols.mass[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(
                self._M > 0,
                self._S + self._M * np.log2(np.where(self._M > 0, st / np.where(self._M > 0, self._M, 1.0), 1.0)),
                0.0,
            )
        return w

    def _sides(self, side: str) -> tuple[_Side, _Side]:
        if side == "row":
            return self.rows, self.cols
        if side == "col":
            return self.cols, self.rows
        raise ConfigError(f"side must be 'row' or 'col', got {side!r}")

    def _views(self, side: str) -> tuple[np.ndarray, np.ndarray]:
        if side == "row":
            return self._M, self._S
        return self._M.T, self._S.T

    # -- queries ------------------------------------------------------------

    def loss(self) -> float:
        """Current loss in bits under this state's loss mode."""
        if self.loss_mode == "baseline":
            return float(self.rows.wtot.sum())
        if self.loss_mode == "raw":
            return 2.0 * float(self.rows.wtot.sum())
        out = 0.0
        for side in (self.rows, self.cols):
            mask = side.mass > 0
            out += float((side.wtot[mask] / side.mass[mask]).sum())
        return out

    def slice_losses(self, side: str) -> dict[int, float]:
        own, _ = self._sides(side)
        out = {}
        for slot in own.alive_slots():
            s = own.mass[slot]
            if self.loss_mode == "marginal":
                out[own.ids[slot]] = float(own.wtot[slot] / s) if s > 0 else 0.0
            else:
                out[own.ids[slot]] = float(own.wtot[slot])
        return out

    def clustering(self) -> Clustering:
        def collect(side: _Side):
            return tuple(
                Cluster(side.ids[slot], tuple(sorted(side.members[slot])))
                for slot in side.alive_slots()
            )

        return Clustering(collect(self.rows), collect(self.cols))

    def n_clusters(self, side: str) -> int:
        own, _ = self._sides(side)
        return len(own.alive_slots())

    def loss_delta(self, side: str, a: int, b: int) -> float:
        """Loss increase if clusters ``a`` and ``b`` (ids) merged; pure query."""
        if a == b:
            raise ConfigError("cannot merge a cluster with itself")
        return float(self.loss_delta_many(side, a, [b])[0])

    def loss_delta_many(self, side: str, a: int, candidate_ids) -> np.ndarray:
        """Loss increase of merging ``a`` with each candidate, vectorized.

        The shared-support corrections only touch the columns (resp. rows)
        where ``a`` itself has mass, so the work per sweep is
        O(candidates x |support of a|).
        """
        own, opp = self._sides(side)
        mv, sv = self._views(side)
        a_slot = own.slot(a)
        slots = np.array([own.slot(c) for c in candidate_ids], dtype=np.int64)
        if np.any(slots == a_slot):
            raise ConfigError("cannot merge a cluster with itself")
        sa = float(own.mass[a_slot])
        sb = own.mass[slots]
        sm = sa + sb
        safe_sb = np.where(sb > 0, sb, 1.0)
        safe_sm = np.where(sm > 0, sm, 1.0)
        lsa = np.log2(safe_sm / sa) if sa > 0 else np.zeros_like(sm)
        lsb = np.where(sb > 0, np.log2(safe_sm / safe_sb), 0.0)
        dw_sum = sa * lsa + sb * lsb
        dw_over_t = lsa * own.aover[a_slot] + lsb * own.aover[slots]

        supp = np.flatnonzero(mv[a_slot] > 0)
        if len(supp) > 0:
            ma = mv[a_slot, supp]
            sa_terms = sv[a_slot, supp]
            t = opp.mass[supp]
            wa = sa_terms + ma * np.log2(sa * t / ma)
            grid = np.ix_(slots, supp)
            mb = mv[grid]
            sb_terms = sv[grid]
            shared = mb > 0
            if shared.any():
                safe_mb = np.where(shared, mb, 1.0)
                mm = ma[None, :] + mb
                with np.errstate(divide="ignore", invalid="ignore"):
                    wb = sb_terms + mb * np.log2(
                        (sb[:, None] * t[None, :]) / safe_mb
                    )
                    wm = (
                        sa_terms[None, :]
                        + sb_terms
                        + mm * np.log2((sm[:, None] * t[None, :]) / mm)
                    )
                extra = np.where(
                    shared,
                    wm - wa[None, :] - wb - ma[None, :] * lsa[:, None]
                    - mb * lsb[:, None],
                    0.0,
                )
                dw_sum = dw_sum + extra.sum(axis=1)
                dw_over_t = dw_over_t + (extra / t[None, :]).sum(axis=1)

        if self.loss_mode == "baseline":
            return dw_sum
        if self.loss_mode == "raw":
            return 2.0 * dw_sum
        wta = float(own.wtot[a_slot])
        wtb = own.wtot[slots]
        deltas = np.where(sm > 0, (wta + wtb + dw_sum) / safe_sm, 0.0) + dw_over_t
        if sa > 0:
            deltas = deltas - wta / sa
        deltas = deltas - np.where(sb > 0, wtb / safe_sb, 0.0)
        return deltas

    # -- mutation -----------------------------------------------------------

    def apply_merge(self, side: str, survivor: int, absorbed: int) -> None:
        """Merge cluster ``absorbed`` into ``survivor`` (both ids), in place."""
        own, opp = self._sides(side)
        mv, sv = self._views(side)
        a_slot = own.slot(survivor)
        b_slot = own.slot(absorbed)
        if a_slot == b_slot:
            raise ConfigError("cannot merge a cluster with itself")
        sa, sb = float(own.mass[a_slot]), float(own.mass[b_slot])
        sm = sa + sb
        ma_row = mv[a_slot]
        mb_row = mv[b_slot]
        supp = np.flatnonzero((ma_row > 0) | (mb_row > 0))
        if len(supp) > 0:
            t = opp.mass[supp]
            ma, sa_terms = ma_row[supp], sv[a_slot, supp]
            mb, sb_terms = mb_row[supp], sv[b_slot, supp]
            mm = ma + mb
            sm_terms = sa_terms + sb_terms
            with np.errstate(divide="ignore", invalid="ignore"):
                wa = np.where(
                    ma > 0, sa_terms + ma * np.log2(sa * t / np.where(ma > 0, ma, 1.0)), 0.0
                )
                wb = np.where(
                    mb > 0, sb_terms + mb * np.log2(sb * t / np.where(mb > 0, mb, 1.0)), 0.0
                )
            wm = sm_terms + mm * np.log2(sm * t / mm)
            opp.wtot[supp] += wm - wa - wb
            d_aov = mm / sm
            if sa > 0:
                d_aov = d_aov - ma / sa
            if sb > 0:
                d_aov = d_aov - mb / sb
            opp.aover[supp] += d_aov
            mv[a_slot, supp] = mm
            sv[a_slot, supp] = sm_terms
            own.wtot[a_slot] = float(wm.sum())
            own.aover[a_slot] = float((mm / t).sum())
        else:
            own.wtot[a_slot] = 0.0
            own.aover[a_slot] = 0.0
        mv[b_slot, :] = 0.0
        sv[b_slot, :] = 0.0
        own.mass[a_slot] = sm
        own.mass[b_slot] = 0.0
        own.wtot[b_slot] = 0.0
        own.aover[b_slot] = 0.0
        own.members[a_slot].extend(own.members[b_slot])  # type: ignore[union-attr]
        own.members[b_slot] = None
        del own.id_to_slot[absorbed]


def merge_delta(
    matrix: ExplanationMatrix,
    clustering: Clustering,
    side: str,
    a: int,
    b: int,
    beta: float,
    state: CostState | None = None,
    loss_mode: str = "marginal",
) -> float:
    """Cost reduction of merging clusters ``a`` and ``b``: beta - loss growth.

    Positive values mean the merge lowers the total cost. ``state`` may carry
    a prebuilt :class:`CostState` snapshot so repeated queries against one
    clustering share the setup work.
    """
    if a == b:
        raise ConfigError("cannot merge a cluster with itself")
    if state is None:
        state = CostState(matrix, clustering, loss_mode)
    return beta - state.loss_delta(side, a, b)

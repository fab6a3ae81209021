from __future__ import annotations

import numpy as np
import pytest

from conftest import WORKED_DENSE, matrix_from_dense, random_clustering, random_matrix
from oracles import dense_approximation, dense_kl, dense_loss, dense_total_cost

from explsum.cost import (
    Cluster,
    Clustering,
    CostState,
    approx_entry,
    kl_divergence,
    marginal_loss,
    marginals,
    merge_delta,
    total_cost,
)
from explsum.errors import (
    ConfigError,
    InfiniteDivergenceError,
    NotFoundError,
    ShapeError,
    ZeroMassError,
)


class TestClustering:
    def test_singletons(self):
        cl = Clustering.singletons(3, 2)
        cl.validate(3, 2)
        assert len(cl.row_clusters) == 3
        assert len(cl.col_clusters) == 2

    def test_validate_rejects_overlap(self):
        cl = Clustering(
            (Cluster(0, (0, 1)), Cluster(1, (1,))), (Cluster(0, (0,)),)
        )
        with pytest.raises(ShapeError):
            cl.validate(2, 1)

    def test_validate_rejects_gaps(self):
        cl = Clustering((Cluster(0, (0,)),), (Cluster(0, (0,)),))
        with pytest.raises(ShapeError):
            cl.validate(2, 1)

    def test_empty_cluster_rejected(self):
        with pytest.raises(ShapeError):
            Cluster(0, ())

    def test_canonical_key_ignores_id_relabeling(self):
        a = Clustering(
            (Cluster(5, (0, 1)), Cluster(2, (2,))),
            (Cluster(9, (0,)), Cluster(1, (1,))),
        )
        b = Clustering(
            (Cluster(0, (0, 1)), Cluster(1, (2,))),
            (Cluster(0, (0,)), Cluster(1, (1,))),
        )
        assert a.canonical_key() == b.canonical_key()


class TestMarginals:
    def test_worked_example_compression(self, worked_matrix, worked_clustering):
        marg = marginals(worked_matrix, worked_clustering)
        assert np.allclose(marg.p_cocluster, [[0.4, 0.0], [0.0, 0.6]], atol=1e-12)
        assert np.allclose(marg.p_row_clusters, [0.4, 0.6], atol=1e-12)
        assert np.allclose(marg.p_col_clusters, [0.4, 0.6], atol=1e-12)

    def test_singleton_clustering_reproduces_matrix(self, worked_matrix):
        cl = Clustering.singletons(4, 4)
        marg = marginals(worked_matrix, cl)
        assert np.allclose(marg.p_cocluster, WORKED_DENSE, atol=1e-12)

    def test_one_cluster_total_mass(self, worked_matrix):
        cl = Clustering(
            (Cluster(0, (0, 1, 2, 3)),), (Cluster(0, (0, 1, 2, 3)),)
        )
        marg = marginals(worked_matrix, cl)
        assert np.allclose(marg.p_cocluster, [[1.0]], atol=1e-12)

    def test_shape_mismatch(self, worked_matrix):
        with pytest.raises(ShapeError):
            marginals(worked_matrix, Clustering.singletons(3, 4))

    def test_mass_consistency_random(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            m = random_matrix(rng)
            cl = random_clustering(rng, m.n_rows, m.n_cols)
            marg = marginals(m, cl)
            assert np.isclose(marg.p_rows.sum(), 1.0, atol=1e-9)
            assert np.isclose(marg.p_cols.sum(), 1.0, atol=1e-9)
            assert np.isclose(marg.p_cocluster.sum(), 1.0, atol=1e-9)
            # cluster masses are the sums of their members' masses
            for pos, cl_r in enumerate(cl.row_clusters):
                assert np.isclose(
                    marg.p_row_clusters[pos],
                    marg.p_rows[list(cl_r.members)].sum(),
                    atol=1e-12,
                )


class TestApproxEntry:
    def test_worked_example_values(self, worked_matrix, worked_clustering):
        marg = marginals(worked_matrix, worked_clustering)
        assert abs(approx_entry(marg, 2, 3) - 0.267) < 1e-3
        assert abs(approx_entry(marg, 3, 2) - 0.067) < 1e-3
        assert abs(approx_entry(marg, 2, 2) - 0.133) < 1e-3
        assert abs(approx_entry(marg, 3, 3) - 0.133) < 1e-3
        assert abs(approx_entry(marg, 0, 0) - 0.1) < 1e-12

    def test_matches_dense_oracle(self, worked_matrix, worked_clustering):
        marg = marginals(worked_matrix, worked_clustering)
        q = dense_approximation(WORKED_DENSE, [0, 0, 1, 1], [0, 0, 1, 1])
        for i in range(4):
            for j in range(4):
                assert np.isclose(approx_entry(marg, i, j), q[i, j], atol=1e-12)

    def test_singleton_identity(self, worked_matrix):
        marg = marginals(worked_matrix, Clustering.singletons(4, 4))
        for r, c, v in zip(worked_matrix.rows, worked_matrix.cols, worked_matrix.vals):
            assert np.isclose(approx_entry(marg, int(r), int(c)), v, atol=1e-12)

    def test_zero_mass_cluster(self):
        m = matrix_from_dense(np.array([[1.0, 1.0], [0.0, 0.0]]))
        cl = Clustering.singletons(2, 2)
        marg = marginals(m, cl)
        with pytest.raises(ZeroMassError):
            approx_entry(marg, 1, 0)


class TestKlDivergence:
    def test_identical_distributions(self):
        assert kl_divergence({"a": 0.4, "b": 0.6}, {"a": 0.4, "b": 0.6}) == 0.0

    def test_one_bit(self):
        assert np.isclose(kl_divergence({"a": 1.0}, {"a": 0.5, "b": 0.5}), 1.0)

    def test_worked_example_whole_matrix(self, worked_matrix, worked_clustering):
        marg = marginals(worked_matrix, worked_clustering)
        q = np.array(
            [
                [approx_entry(marg, i, j) if WORKED_DENSE[i, j] > 0 else 1.0
                 for j in range(4)]
                for i in range(4)
            ]
        )
        got = kl_divergence(WORKED_DENSE.ravel(), q.ravel())
        ref = dense_kl(WORKED_DENSE, dense_approximation(WORKED_DENSE, [0, 0, 1, 1], [0, 0, 1, 1]))
        assert np.isclose(got, ref, atol=1e-12)
        assert abs(got - 0.1509) < 1e-3

    def test_missing_support(self):
        with pytest.raises(InfiniteDivergenceError):
            kl_divergence({"a": 0.5, "b": 0.5}, {"a": 1.0})
        with pytest.raises(InfiniteDivergenceError):
            kl_divergence(np.array([0.5, 0.5]), np.array([1.0, 0.0]))

    def test_mismatched_arrays(self):
        with pytest.raises(ShapeError):
            kl_divergence(np.array([1.0]), np.array([0.5, 0.5]))


class TestMarginalLoss:
    def test_singleton_loss_is_zero(self, worked_matrix):
        bd = marginal_loss(worked_matrix, Clustering.singletons(4, 4))
        assert bd.loss == 0.0

    def test_worked_example_loss(self, worked_matrix, worked_clustering):
        bd = marginal_loss(worked_matrix, worked_clustering)
        ref = dense_loss(WORKED_DENSE, [0, 0, 1, 1], [0, 0, 1, 1])
        assert np.isclose(bd.loss, ref, atol=1e-12)
        assert abs(bd.loss - 0.5030) < 1e-3
        # first row/column slices reconstruct exactly; the others carry the loss
        assert np.isclose(bd.row_slice_loss[0], 0.0, atol=1e-12)
        assert bd.row_slice_loss[1] > 0
        assert np.isclose(bd.row_slice_loss[1], bd.col_slice_loss[1], atol=1e-12)

    def test_block_constant_matrix(self):
        dense = np.zeros((4, 4))
        dense[:2, :2] = 0.1
        dense[2:, 2:] = 0.15
        m = matrix_from_dense(dense)
        cl = Clustering.from_assignments([0, 0, 1, 1], [0, 0, 1, 1])
        assert marginal_loss(m, cl).loss < 1e-12

    def test_matches_dense_oracle_random(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            m = random_matrix(rng)
            cl = random_clustering(rng, m.n_rows, m.n_cols)
            dense = m.to_dense()
            ra = cl.assignments("row", m.n_rows)
            ca = cl.assignments("col", m.n_cols)
            for mode in ("marginal", "raw", "baseline"):
                got = marginal_loss(m, cl, mode).loss
                ref = dense_loss(dense, list(ra), list(ca), mode)
                assert np.isclose(got, ref, atol=1e-9), mode

    def test_raw_is_twice_baseline(self):
        rng = np.random.default_rng(23)
        m = random_matrix(rng, 6, 6)
        cl = random_clustering(rng, 6, 6)
        raw = marginal_loss(m, cl, "raw").loss
        base = marginal_loss(m, cl, "baseline").loss
        assert np.isclose(raw, 2 * base, atol=1e-12)

    def test_loss_nonnegative_random(self):
        rng = np.random.default_rng(29)
        for _ in range(30):
            m = random_matrix(rng, empty_row=bool(rng.integers(0, 2)))
            cl = random_clustering(rng, m.n_rows, m.n_cols)
            assert marginal_loss(m, cl).loss >= 0.0

    def test_unknown_mode(self, worked_matrix, worked_clustering):
        with pytest.raises(ConfigError):
            marginal_loss(worked_matrix, worked_clustering, "other")


class TestSupportAndMass:
    def test_support_preservation(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            m = random_matrix(rng)
            cl = random_clustering(rng, m.n_rows, m.n_cols)
            marg = marginals(m, cl)
            for r, c, v in zip(m.rows, m.cols, m.vals):
                q = approx_entry(marg, int(r), int(c))
                assert q > 0.0

    def test_slice_mass_match(self):
        rng = np.random.default_rng(37)
        for _ in range(15):
            m = random_matrix(rng)
            cl = random_clustering(rng, m.n_rows, m.n_cols)
            marg = marginals(m, cl)
            dense_q = np.zeros((m.n_rows, m.n_cols))
            for i in range(m.n_rows):
                for j in range(m.n_cols):
                    ri, ci = marg.row_assign[i], marg.col_assign[j]
                    if marg.p_cocluster[ri, ci] > 0:
                        dense_q[i, j] = approx_entry(marg, i, j)
            dense_p = m.to_dense()
            for pos, cl_r in enumerate(cl.row_clusters):
                rows = list(cl_r.members)
                assert np.isclose(
                    dense_q[rows].sum(), dense_p[rows].sum(), atol=1e-9
                )
            for pos, cl_c in enumerate(cl.col_clusters):
                cols = list(cl_c.members)
                assert np.isclose(
                    dense_q[:, cols].sum(), dense_p[:, cols].sum(), atol=1e-9
                )


class TestTotalCost:
    def test_worked_example_beta_zero(self, worked_matrix, worked_clustering):
        bd = total_cost(worked_matrix, worked_clustering, 0.0, 0.0)
        assert np.isclose(bd.total, bd.loss)
        assert abs(bd.total - 0.5030) < 1e-3

    def test_singletons_with_unit_beta(self, worked_matrix):
        bd = total_cost(worked_matrix, Clustering.singletons(4, 4), 1.0, 1.0)
        assert np.isclose(bd.total, 8.0, atol=1e-9)
        assert bd.loss == 0.0

    def test_large_beta_prefers_one_cluster(self, worked_matrix):
        one = Clustering(
            (Cluster(0, (0, 1, 2, 3)),), (Cluster(0, (0, 1, 2, 3)),)
        )
        beta = 10.0
        t_one = total_cost(worked_matrix, one, beta, beta).total
        t_single = total_cost(
            worked_matrix, Clustering.singletons(4, 4), beta, beta
        ).total
        assert t_one < t_single

    def test_negative_beta_rejected(self, worked_matrix, worked_clustering):
        with pytest.raises(ConfigError):
            total_cost(worked_matrix, worked_clustering, -0.1, 0.0)

    def test_breakdown_consistency(self, worked_matrix, worked_clustering):
        bd = total_cost(worked_matrix, worked_clustering, 0.05, 0.05)
        assert np.isclose(bd.total, bd.model_cost + bd.loss, atol=1e-9)
        assert np.isclose(bd.model_cost, 0.2, atol=1e-12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(41)
        m = random_matrix(rng, 5, 6)
        cl = random_clustering(rng, 5, 6)
        ra = list(cl.assignments("row", 5))
        ca = list(cl.assignments("col", 6))
        got = total_cost(m, cl, 0.07, 0.03).total
        ref = dense_total_cost(m.to_dense(), ra, ca, 0.07, 0.03)
        assert np.isclose(got, ref, atol=1e-9)


def clustering_with_merge(cl: Clustering, side: str, a: int, b: int) -> Clustering:
    """Merge clusters a and b (ids) of one side into a new Clustering."""

    def merge(clusters):
        kept, absorbed = [], None
        for c in clusters:
            if c.id == b:
                absorbed = c
            else:
                kept.append(c)
        assert absorbed is not None
        return tuple(
            Cluster(c.id, tuple(sorted(c.members + absorbed.members)))
            if c.id == a
            else c
            for c in kept
        )

    if side == "row":
        return Clustering(merge(cl.row_clusters), cl.col_clusters)
    return Clustering(cl.row_clusters, merge(cl.col_clusters))


class TestMergeDelta:
    def test_identical_rows_cost_beta(self, worked_matrix):
        cl = Clustering.singletons(4, 4)
        delta = merge_delta(worked_matrix, cl, "row", 0, 1, beta=0.05)
        assert np.isclose(delta, 0.05, atol=1e-12)

    def test_merging_worked_clusters_is_negative(
        self, worked_matrix, worked_clustering
    ):
        delta = merge_delta(worked_matrix, worked_clustering, "row", 0, 1, beta=0.01)
        assert delta < 0
        # oracle: recompute the loss of the merged clustering directly
        merged = clustering_with_merge(worked_clustering, "row", 0, 1)
        ref = 0.01 - (
            dense_loss(WORKED_DENSE, [0] * 4, [0, 0, 1, 1])
            - dense_loss(WORKED_DENSE, [0, 0, 1, 1], [0, 0, 1, 1])
        )
        assert np.isclose(delta, ref, atol=1e-9)
        assert np.isclose(
            marginal_loss(worked_matrix, merged).loss,
            dense_loss(WORKED_DENSE, [0] * 4, [0, 0, 1, 1]),
            atol=1e-9,
        )

    def test_incremental_equals_full_recompute(self):
        rng = np.random.default_rng(43)
        for _ in range(50):
            m = random_matrix(rng, 8, 8, density=0.45)
            cl = random_clustering(rng, 8, 8)
            state = CostState(m, cl)
            for side in ("row", "col"):
                clusters = cl.row_clusters if side == "row" else cl.col_clusters
                if len(clusters) < 2:
                    continue
                ids = [c.id for c in clusters]
                a, b = ids[0], ids[1]
                got = merge_delta(m, cl, side, a, b, beta=0.05, state=state)
                merged = clustering_with_merge(cl, side, a, b)
                full = 0.05 - (
                    marginal_loss(m, merged).loss - marginal_loss(m, cl).loss
                )
                assert np.isclose(got, full, atol=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(47)
        for _ in range(20):
            m = random_matrix(rng, 6, 6)
            cl = random_clustering(rng, 6, 6)
            state = CostState(m, cl)
            ids = [c.id for c in cl.row_clusters]
            if len(ids) < 2:
                continue
            d_ab = merge_delta(m, cl, "row", ids[0], ids[1], 0.3, state=state)
            d_ba = merge_delta(m, cl, "row", ids[1], ids[0], 0.3, state=state)
            assert np.isclose(d_ab, d_ba, atol=1e-9)

    def test_unknown_cluster(self, worked_matrix, worked_clustering):
        with pytest.raises(NotFoundError):
            merge_delta(worked_matrix, worked_clustering, "row", 0, 99, 0.05)

    def test_self_merge_rejected(self, worked_matrix, worked_clustering):
        with pytest.raises(ConfigError):
            merge_delta(worked_matrix, worked_clustering, "row", 0, 0, 0.05)


class TestCostState:
    def test_loss_matches_marginal_loss(self):
        rng = np.random.default_rng(53)
        for _ in range(20):
            m = random_matrix(rng, empty_row=bool(rng.integers(0, 2)))
            cl = random_clustering(rng, m.n_rows, m.n_cols)
            for mode in ("marginal", "raw", "baseline"):
                state = CostState(m, cl, mode)
                assert np.isclose(
                    state.loss(), marginal_loss(m, cl, mode).loss, atol=1e-9
                )

    def test_loss_after_merges(self):
        rng = np.random.default_rng(59)
        for _ in range(15):
            m = random_matrix(rng, 7, 7, density=0.5)
            state = CostState(m, Clustering.singletons(7, 7))
            # apply a few random merges, verifying the running loss each time
            for _ in range(6):
                side = "row" if rng.integers(0, 2) == 0 else "col"
                own = state.rows if side == "row" else state.cols
                alive = [own.ids[s] for s in own.alive_slots()]
                if len(alive) < 2:
                    continue
                a, b = rng.choice(alive, size=2, replace=False)
                predicted = state.loss() + state.loss_delta(side, int(a), int(b))
                state.apply_merge(side, int(a), int(b))
                assert np.isclose(state.loss(), predicted, atol=1e-9)
                fresh = marginal_loss(m, state.clustering()).loss
                assert np.isclose(state.loss(), fresh, atol=1e-9)

    def test_delta_many_matches_pairwise(self):
        rng = np.random.default_rng(61)
        for mode in ("marginal", "raw", "baseline"):
            for _ in range(10):
                m = random_matrix(rng, 8, 6, density=0.4)
                cl = random_clustering(rng, 8, 6)
                state = CostState(m, cl, mode)
                ids = [c.id for c in cl.row_clusters]
                if len(ids) < 3:
                    continue
                a = ids[0]
                cands = ids[1:]
                many = state.loss_delta_many("row", a, cands)
                for pos, b in enumerate(cands):
                    assert np.isclose(
                        many[pos], state.loss_delta("row", a, b), atol=1e-11
                    ), mode

    def test_clustering_roundtrip(self, worked_matrix, worked_clustering):
        state = CostState(worked_matrix, worked_clustering)
        back = state.clustering()
        assert back.canonical_key() == worked_clustering.canonical_key()

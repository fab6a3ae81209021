from __future__ import annotations

import numpy as np
import pytest

from conftest import WORKED_DENSE, matrix_from_dense, random_matrix
from oracles import reference_knee

from explsum.errors import EmptyMatrixError, ShapeError
from explsum.matrix import (
    ValueDistribution,
    check_normalized,
    find_knee,
    locate_knee,
    normalize,
    smooth,
    value_distribution,
)


class TestNormalize:
    def test_worked_example_already_normalized(self, worked_matrix):
        assert np.isclose(worked_matrix.total(), 1.0, atol=1e-9)
        dense = worked_matrix.to_dense()
        assert np.allclose(dense, WORKED_DENSE, atol=1e-12)

    def test_single_nonzero(self):
        m = normalize((2, 2), [(0, 0, 7.0)])
        assert m.entry_dict() == {(0, 0): 1.0}

    def test_two_equal_entries(self):
        m = normalize((2, 2), [(0, 0, 2.0), (1, 1, 2.0)])
        assert m.entry_dict() == {(0, 0): 0.5, (1, 1): 0.5}

    def test_all_zero_raises(self):
        with pytest.raises(EmptyMatrixError):
            normalize((2, 2), [(0, 0, 0.0)])
        with pytest.raises(EmptyMatrixError):
            normalize((2, 2), [])

    def test_duplicate_coordinates_summed(self):
        m = normalize((2, 2), [(0, 0, 1.0), (0, 0, 2.0), (1, 1, 3.0)])
        assert np.allclose(sorted(m.vals), [0.5, 0.5])
        assert m.nnz == 2

    def test_signed_takes_absolute_values(self):
        m = normalize((2, 2), [(0, 0, -3.0), (0, 1, 1.0)], signed=True)
        assert np.isclose(m.entry_dict()[(0, 0)], 0.75)

    def test_dense_min_max_uses_actual_minimum(self):
        # fully dense input: the smallest value maps to zero and drops out
        m = normalize((1, 2), [(0, 0, 3.0), (0, 1, 1.0)])
        assert m.entry_dict() == {(0, 0): 1.0}

    def test_negative_unsigned_rejected(self):
        with pytest.raises(ShapeError):
            normalize((2, 2), [(0, 0, -3.0), (0, 1, 1.0)])

    def test_out_of_range_coordinates(self):
        with pytest.raises(ShapeError):
            normalize((2, 2), [(2, 0, 1.0)])

    def test_density_warning(self):
        with pytest.warns(UserWarning, match="density"):
            normalize((2, 2), [(r, c, 1.0) for r in range(2) for c in range(2)])

    def test_idempotence(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            m1 = random_matrix(rng)
            m2 = normalize(
                (m1.n_rows, m1.n_cols),
                list(zip(m1.rows, m1.cols, m1.vals)),
            )
            assert m1.nnz == m2.nnz
            assert np.allclose(m1.vals, m2.vals, atol=1e-12)

    def test_per_feature_switch(self):
        m = normalize(
            (2, 2), [(0, 0, 1.0), (1, 0, 2.0), (0, 1, 10.0)], per_feature=True
        )
        d = m.entry_dict()
        # column maxima map to 1 before the grand-total division
        assert np.isclose(d[(1, 0)], d[(0, 1)])

    def test_zero_pattern_sorted(self):
        m = normalize((3, 3), [(2, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0)])
        order = m.rows * 3 + m.cols
        assert np.all(np.diff(order) > 0)

    def test_check_normalized(self, worked_matrix):
        check_normalized(worked_matrix)


class TestFindKnee:
    def test_linear_has_no_knee(self):
        dist = ValueDistribution(np.array([5.0, 4.0, 3.0, 2.0, 1.0]))
        assert find_knee(dist) is None
        assert reference_knee([5, 4, 3, 2, 1]) is None

    def test_cliff_distribution(self):
        values = [10.0, 9.0, 8.0, 2.0, 1.0, 0.5]
        ref = reference_knee(values)
        assert ref is not None and ref[0] == 2 and float(ref[1]) == 8.0
        dist = ValueDistribution(np.array(values))
        assert find_knee(dist) == 8.0
        annotated = locate_knee(dist)
        assert annotated.knee_index == 2
        assert annotated.cap_value == 8.0

    def test_flat_has_no_knee(self):
        assert find_knee(ValueDistribution(np.array([1.0, 1.0, 1.0]))) is None

    def test_too_few_distinct_values(self):
        assert find_knee(ValueDistribution(np.array([0.3, 0.3, 0.2, 0.2]))) is None
        assert find_knee(ValueDistribution(np.array([2.0, 1.0]))) is None

    def test_elbow_distribution(self):
        # steep drop then flat tail: knee at the last point before the tail
        values = [0.5, 0.2, 0.1, 0.1, 0.1]
        ref = reference_knee(values)
        assert ref is not None and ref[0] == 1 and float(ref[1]) == 0.2
        assert find_knee(ValueDistribution(np.array(values))) == 0.2

    def test_matches_reference_on_random_distributions(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            n = int(rng.integers(3, 30))
            vals = np.sort(np.round(rng.uniform(0.01, 5.0, size=n), 4))[::-1]
            got = find_knee(ValueDistribution(vals))
            ref = reference_knee(list(vals))
            if ref is None:
                assert got is None
            else:
                assert got is not None
                assert np.isclose(got, float(ref[1]), atol=1e-12)

    def test_sensitivity_gate(self):
        values = [10.0, 9.0, 8.0, 2.0, 1.0, 0.5]
        dist = ValueDistribution(np.array(values))
        assert find_knee(dist, sensitivity=1.0) is not None
        assert find_knee(dist, sensitivity=5.0) is None

    def test_distribution_invariants(self):
        with pytest.raises(ShapeError):
            ValueDistribution(np.array([1.0, 2.0]))
        with pytest.raises(ShapeError):
            ValueDistribution(np.array([2.0, 1.0]), knee_index=5)


class TestSmooth:
    def test_cap_and_renormalize(self):
        m = matrix_from_dense(np.array([[0.5, 0.2, 0.1], [0.1, 0.1, 0.0]]))
        sm = smooth(m)
        d = sm.entry_dict()
        assert np.isclose(d[(0, 0)], 0.2 / 0.7)
        assert np.isclose(d[(0, 1)], 0.2 / 0.7)
        assert np.isclose(d[(0, 2)], 0.1 / 0.7)
        assert np.isclose(sm.total(), 1.0)

    def test_uniform_unchanged(self):
        m = matrix_from_dense(np.array([[0.25, 0.25], [0.25, 0.25]]))
        assert smooth(m) is m

    def test_worked_example_unchanged(self, worked_matrix):
        # two-level value distribution: no knee, matrix passes through
        assert smooth(worked_matrix) is worked_matrix

    def test_never_increases_and_preserves_pattern(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            m = random_matrix(rng)
            sm = smooth(m)
            assert sm.nnz == m.nnz
            assert np.array_equal(sm.rows, m.rows)
            assert np.array_equal(sm.cols, m.cols)
            cap = find_knee(value_distribution(m))
            if cap is None:
                assert sm is m
            else:
                pre = np.minimum(m.vals, cap)
                assert np.all(pre <= m.vals + 1e-15)
                assert np.allclose(sm.vals, pre / pre.sum(), atol=1e-12)

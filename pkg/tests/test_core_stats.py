import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import ortho_group

from hdbf import (
    build_gram,
    difference_transform,
    generate,
    ModelSpec,
    randomized_statistic,
    t_bs_statistic,
    t_cq_differenced,
    t_cq_statistic,
)
from hdbf.core_stats import as_data_matrix


def tcq_loops(x1, x2):
    """Pair-by-pair reference for T_CQ."""
    total = 0.0
    for x in (x1, x2):
        n = len(x)
        s = sum(float(np.dot(x[i], x[j])) for i in range(n) for j in range(i + 1, n))
        total += 2.0 * s / (n * (n - 1))
    cross = sum(float(np.dot(a, b)) for a in x1 for b in x2)
    return total - 2.0 * cross / (len(x1) * len(x2))


def tbs_loops(x1, x2):
    n1, n2 = len(x1), len(x2)
    p = len(x1[0])
    mean1 = [sum(r[j] for r in x1) / n1 for j in range(p)]
    mean2 = [sum(r[j] for r in x2) / n2 for j in range(p)]
    dist = sum((mean1[j] - mean2[j]) ** 2 for j in range(p))
    ss = 0.0
    for x, mean in ((x1, mean1), (x2, mean2)):
        for r in x:
            for j in range(p):
                ss += (r[j] - mean[j]) ** 2
    n = n1 + n2
    return dist - n / (n1 * n2) * ss / (n - 2)


finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


class TestTcq:
    def test_identical_rows_give_zero(self):
        v = np.array([1.5, -2.0, 3.0])
        assert t_cq_statistic([v, v], [v, v]) == 0.0

    def test_hand_example(self):
        assert t_cq_statistic([1.0, -1.0], [2.0, 2.0]) == pytest.approx(3.0, abs=1e-15)

    def test_matches_pair_loops(self, rng):
        x1, x2 = rng.normal(size=(6, 4)), rng.normal(size=(5, 4))
        assert t_cq_statistic(x1, x2) == pytest.approx(tcq_loops(x1, x2), rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(
        arrays(np.float64, (4, 3), elements=finite),
        arrays(np.float64, (5, 3), elements=finite),
        arrays(np.float64, (3,), elements=finite),
    )
    def test_shift_invariance(self, x1, x2, c):
        base = t_cq_statistic(x1, x2)
        shifted = t_cq_statistic(x1 + c, x2 + c)
        scale = max(1.0, np.abs(np.r_[x1.ravel(), x2.ravel(), c]).max() ** 2)
        assert abs(shifted - base) <= 1e-9 * scale

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_rotation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        x1, x2 = rng.normal(size=(6, 5)), rng.normal(size=(7, 5))
        q = ortho_group.rvs(5, random_state=rng)
        assert t_cq_statistic(x1 @ q, x2 @ q) == pytest.approx(t_cq_statistic(x1, x2), rel=1e-9, abs=1e-12)
        g, gq = build_gram(difference_transform(x1), difference_transform(x2)), build_gram(
            difference_transform(x1 @ q), difference_transform(x2 @ q)
        )
        for a, b in ((g.g11, gq.g11), (g.g22, gq.g22), (g.g12, gq.g12)):
            np.testing.assert_allclose(b, a, rtol=1e-9, atol=1e-12)

    def test_errors(self):
        with pytest.raises(ValueError, match="dimension"):
            t_cq_statistic(np.ones((3, 2)), np.ones((3, 3)))
        with pytest.raises(ValueError, match="at least 2"):
            t_cq_statistic(np.ones((1, 2)), np.ones((3, 2)))

    def test_unbiased_under_null(self):
        spec = ModelSpec("I", 8, 10, 20)
        vals = np.array([t_cq_statistic(*generate(spec, s)) for s in range(1500)])
        assert abs(vals.mean()) <= 4 * vals.std(ddof=1) / np.sqrt(vals.size)

    def test_differenced_unbiased_with_unequal_means(self):
        rng = np.random.default_rng(5)
        vals = []
        for _ in range(1500):
            x1 = rng.normal(size=(8, 20)) + 3.0
            x2 = rng.normal(size=(10, 20)) - 1.0
            vals.append(t_cq_differenced(build_gram(difference_transform(x1), difference_transform(x2))))
        vals = np.array(vals)
        assert abs(vals.mean()) <= 4 * vals.std(ddof=1) / np.sqrt(vals.size)


class TestTbs:
    def test_identical_rows_give_zero(self):
        v = [1.0, 2.0]
        assert t_bs_statistic([v, v], [v, v]) == 0.0

    def test_hand_example(self):
        assert t_bs_statistic([0.0, 2.0], [0.0, 0.0]) == pytest.approx(0.0, abs=1e-15)

    def test_matches_two_loop_reference(self, rng):
        x1, x2 = rng.normal(size=(5, 3)), rng.normal(size=(4, 3))
        assert t_bs_statistic(x1, x2) == pytest.approx(tbs_loops(x1.tolist(), x2.tolist()), rel=1e-12)

    def test_degenerate_sizes(self):
        with pytest.raises(ValueError):
            t_bs_statistic([[1.0]], [[2.0]])


class TestDifferencing:
    def test_pairs_in_order(self):
        r = np.arange(8.0).reshape(4, 2) ** 2
        out = difference_transform(r)
        np.testing.assert_array_equal(out.rows, [(r[1] - r[0]) / 2, (r[3] - r[2]) / 2])
        assert out.m == 2 and out.n == 4

    def test_odd_rows_drop_last(self):
        x = np.arange(10.0).reshape(5, 2)
        out = difference_transform(x)
        assert out.m == 2
        np.testing.assert_array_equal(out.rows, difference_transform(x[:4]).rows)

    def test_duplicates_give_zero_rows(self):
        x = np.repeat(np.array([[1.0, 2.0], [3.0, -1.0]]), 2, axis=0)
        assert not np.any(difference_transform(x).rows)

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            difference_transform([[1.0, 2.0]])


class TestGram:
    def test_orthogonal_rows_give_zero_blocks(self):
        eye = np.eye(4)
        g = build_gram(eye[:2], eye[2:])
        assert not np.any(g.g11 - np.diag(np.diag(g.g11)))
        assert not np.any(g.g22 - np.diag(np.diag(g.g22)))
        assert not np.any(g.g12)

    def test_rejects_single_differenced_row(self):
        with pytest.raises(ValueError, match="group 2"):
            build_gram([[1.0], [2.0]], [[3.0]])

    def test_entries_equal_direct_dot_products(self, rng):
        xt1, xt2 = difference_transform(rng.normal(size=(8, 11))), difference_transform(rng.normal(size=(7, 11)))
        g = build_gram(xt1, xt2)

        def dot(a, b):
            s = 0.0
            for x, y in zip(a, b):
                s += x * y
            return s

        for i in range(xt1.m):
            for j in range(xt1.m):
                assert g.g11[i, j] == dot(xt1.rows[i], xt1.rows[j])
            for j in range(xt2.m):
                assert g.g12[i, j] == dot(xt1.rows[i], xt2.rows[j])
        for i in range(xt2.m):
            for j in range(xt2.m):
                assert g.g22[i, j] == dot(xt2.rows[i], xt2.rows[j])

    def test_differenced_statistic(self, rng):
        xt1, xt2 = rng.normal(size=(5, 6)), rng.normal(size=(4, 6))
        g = build_gram(xt1, xt2)
        assert t_cq_differenced(g) == pytest.approx(t_cq_statistic(xt1, xt2), rel=1e-12)
        assert t_cq_differenced(g) == randomized_statistic(g, np.ones(9))
        assert t_cq_differenced(build_gram(np.zeros((3, 2)), np.zeros((2, 2)))) == 0.0


def test_data_matrix_validation():
    assert as_data_matrix([1.0, 2.0]).shape == (2, 1)
    with pytest.raises(ValueError, match="non-finite"):
        as_data_matrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        as_data_matrix(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        as_data_matrix(np.zeros((2, 2, 2)))

from math import comb

import numpy as np
import pytest

from src.exact_linalg import QQ, ExactMatrix, FieldSpec, Scalar, mat_det, mat_inverse, mat_rank
from src.exterior import (
    KoszulContext,
    ScaledBasis,
    block_scaled_basis_change,
    complement_basis_change,
    lex_subsets,
    multi_scaled_basis_change,
    reexpress_in_scaled_basis,
    scaled_basis_change,
    subset_rank,
    subset_unrank,
    wedge_matrices,
    wedge_matrix,
    wedge_sign,
)
from src.utils import central_binomial

GF101 = FieldSpec.prime(101)


def test_subset_rank_examples():
    assert [subset_rank(3, 2, s) for s in [(1, 2), (1, 3), (2, 3)]] == [0, 1, 2]
    assert subset_rank(5, 2, (3, 5)) == 8
    assert subset_rank(6, 3, (1, 2, 3)) == 0


def test_subset_unrank_examples():
    assert subset_unrank(3, 2, 1) == (1, 3)
    assert subset_unrank(5, 2, 9) == (4, 5)
    assert subset_unrank(7, 4, 0) == (1, 2, 3, 4)
    with pytest.raises(ValueError):
        subset_unrank(5, 2, 10)


@pytest.mark.parametrize("bad", [(3, 1), (1, 1), (0, 2), (2, 6)])
def test_subset_rank_rejects_malformed(bad):
    with pytest.raises(ValueError):
        subset_rank(5, 2, bad)


@pytest.mark.parametrize("n", range(1, 9))
def test_rank_unrank_roundtrip(n):
    for r in range(n + 1):
        subsets = lex_subsets(n, r)
        assert len(subsets) == comb(n, r)
        for k, s in enumerate(subsets):
            assert subset_rank(n, r, s) == k
            assert subset_unrank(n, r, k) == s


def test_wedge_sign():
    assert wedge_sign(1, (2,)) == 1
    assert wedge_sign(2, (1,)) == -1
    assert wedge_sign(2, (1, 2)) == 0
    assert wedge_sign(3, (1, 2)) == 1
    assert wedge_sign(2, (1, 3)) == -1


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_context_sizes(p):
    ctx = KoszulContext(p)
    assert ctx.m == 2 * p + 1
    assert ctx.D == comb(ctx.m, p) == len(ctx.p_subsets) == len(ctx.p1_subsets)
    assert list(ctx.p_subsets) == sorted(ctx.p_subsets)
    assert ctx.subspace_rank == central_binomial(p)
    for i in range(1, ctx.m + 1):
        assert len(ctx.nonzero_positions(i)) == ctx.subspace_rank


def test_for_m_rejects_even():
    with pytest.raises(ValueError):
        KoszulContext.for_m(4)


def test_wedge_matrix_e1_p1():
    ctx = KoszulContext(1)
    M1 = wedge_matrix(ctx, [1, 0, 0])
    assert M1.to_lists() == [[0, 1, 0], [0, 0, 1], [0, 0, 0]]


def test_wedge_matrices_reproduce_sum_matrix():
    # M(t) = Σ t_i M_i = (−t2 t1 0 / −t3 0 t1 / 0 −t3 t2) in lex order
    M1, M2, M3 = wedge_matrices(KoszulContext(1))
    assert M2.to_lists() == [[-1, 0, 0], [0, 0, 0], [0, 0, 1]]
    assert M3.to_lists() == [[0, 0, 0], [-1, 0, 0], [0, -1, 0]]
    ones = M1 + M2 + M3
    assert mat_det(ones).is_zero()


def test_wedge_matrix_zero_vector():
    ctx = KoszulContext(2)
    assert wedge_matrix(ctx, [0] * 5).is_zero()
    with pytest.raises(ValueError):
        wedge_matrix(ctx, [1, 2, 3])


def test_wedge_matrix_is_linear():
    ctx = KoszulContext(2)
    rng = np.random.default_rng(11)
    u = [int(x) for x in rng.integers(-5, 6, 5)]
    v = [int(x) for x in rng.integers(-5, 6, 5)]
    combo = [3 * a - 2 * b for a, b in zip(u, v)]
    assert wedge_matrix(ctx, combo) == wedge_matrix(ctx, u).scale(3) - wedge_matrix(ctx, v).scale(2)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_wedge_rank_is_constant_on_nonzero_vectors(p):
    ctx = KoszulContext(p)
    rng = np.random.default_rng(p)
    target = central_binomial(p)
    assert mat_rank(wedge_matrix(ctx, [1] + [0] * (ctx.m - 1), GF101)) == target
    for _ in range(100):
        v = [int(x) for x in rng.integers(0, 101, ctx.m)]
        if not any(v):
            continue
        assert mat_rank(wedge_matrix(ctx, v, GF101)) == target


def test_scaled_basis_change_example():
    lam = Scalar(QQ, 5)
    X = scaled_basis_change(3, 2, ScaledBasis(3, 1, lam))
    assert X == ExactMatrix.diagonal(QQ, [5, 5, 1])
    assert scaled_basis_change(3, 2, ScaledBasis(3, 2, Scalar(QQ, 1))) == ExactMatrix.diagonal(QQ, [1, 1, 1])
    assert mat_det(scaled_basis_change(5, 2, ScaledBasis(5, 3, lam))) == lam ** 4


def test_scaled_basis_rejects_zero():
    with pytest.raises(ValueError):
        ScaledBasis(3, 1, Scalar(QQ, 0))


@pytest.mark.parametrize("n", range(1, 9))
def test_scaled_basis_change_determinant(n):
    rng = np.random.default_rng(n)
    for r in range(1, n + 1):
        for i in range(1, n + 1):
            lam = Scalar(QQ, int(rng.integers(1, 20)) * (-1) ** i)
            X = scaled_basis_change(n, r, ScaledBasis(n, i, lam))
            assert mat_det(X) == lam ** comb(n - 1, r - 1)


def test_block_scaled_basis_change_determinant():
    lam = Scalar(GF101, 7)
    X = block_scaled_basis_change(5, 2, 3, ScaledBasis(5, 2, lam))
    assert X.shape == (30, 30)
    assert mat_det(X) == lam ** (3 * comb(4, 1))


def test_multi_scaled_basis_change():
    lambdas = [Scalar(QQ, v) for v in (2, 3, 5)]
    X = multi_scaled_basis_change(3, 2, lambdas)
    assert X == ExactMatrix.diagonal(QQ, [6, 10, 15])


@pytest.mark.parametrize("p", [1, 2])
@pytest.mark.parametrize("field", [QQ, GF101], ids=["Q", "GF101"])
def test_reexpressed_wedge_matrices(p, field):
    ctx = KoszulContext(p)
    lam = Scalar(field, 3)
    M = wedge_matrices(ctx, field)
    for i in range(1, ctx.m + 1):
        sb = ScaledBasis(ctx.m, i, lam)
        for j in range(1, ctx.m + 1):
            expected = M[j - 1].scale((lam ** -1).value) if j == i else M[j - 1]
            assert reexpress_in_scaled_basis(ctx, j, sb) == expected


def test_complement_basis_m3():
    X = complement_basis_change(3)
    # Spalten: e_23, −e_13, e_12 in der Basis (e_12, e_13, e_23)
    assert X.to_lists() == [[0, 0, 1], [0, -1, 0], [1, 0, 0]]
    assert mat_det(X).value in (1, -1)


def test_complement_basis_gives_classical_wedge_matrices():
    # Basis (e_23, e_31, e_12) von ∧² K³
    L1 = [[0, 0, 0], [0, 0, -1], [0, 1, 0]]
    L2 = [[0, 0, 1], [0, 0, 0], [-1, 0, 0]]
    L3 = [[0, -1, 0], [1, 0, 0], [0, 0, 0]]
    X_inv = mat_inverse(complement_basis_change(3))
    M = wedge_matrices(KoszulContext(1))
    assert [(X_inv @ Mi).to_lists() for Mi in M] == [L1, L2, L3]

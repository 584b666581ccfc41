import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy

from src.exact_linalg import (
    QQ,
    DimensionError,
    ExactMatrix,
    FieldMismatchError,
    FieldSpec,
    Scalar,
    direct_sum,
    identity,
    kronecker,
    mat_det,
    mat_inverse,
    mat_rank,
    rank_profile,
)
from src.exterior import KoszulContext, wedge_matrices
from src.flattening import toeplitz_basis

GF2 = FieldSpec.prime(2)
GF5 = FieldSpec.prime(5)
GF101 = FieldSpec.prime(101)


def test_field_tags():
    assert FieldSpec.from_tag("Q") == QQ
    assert FieldSpec.from_tag("GF:101") == GF101
    assert GF101.tag == "GF:101"
    assert QQ.tag == "Q"
    assert GF101.is_finite and not QQ.is_finite


@pytest.mark.parametrize("tag", ["GF:4", "GF:1", "GF:x", "R", ""])
def test_invalid_field_tags(tag):
    with pytest.raises(ValueError):
        FieldSpec.from_tag(tag)


def test_coerce_canonical_forms():
    assert QQ.coerce("6/4") == Fraction(3, 2)
    assert GF5.coerce(-1) == 4
    assert GF101.coerce("1/2") == 51
    assert GF5.coerce(np.int64(7)) == 2
    with pytest.raises(ZeroDivisionError):
        GF5.coerce(Fraction(1, 5))


def test_scalar_arithmetic():
    a = Scalar(GF5, 3)
    assert (a + 4).value == 2
    assert (a * a).value == 4
    assert (a ** -1).value == 2
    assert (Scalar(QQ, 2) ** -2).value == Fraction(1, 4)
    assert Scalar(QQ, "1/3") / Scalar(QQ, 2) == Scalar(QQ, Fraction(1, 6))
    with pytest.raises(FieldMismatchError):
        a + Scalar(QQ, 1)


def test_rank_over_q_and_gf():
    A = ExactMatrix.from_rows(QQ, [[1, 2], [2, 4]])
    assert mat_rank(A) == 1
    B = ExactMatrix.from_rows(QQ, [[1, 1], [1, -1]])
    assert mat_rank(B) == 2
    assert mat_rank(ExactMatrix.from_rows(GF2, [[1, 1], [1, -1]])) == 1
    assert mat_rank(ExactMatrix.zeros(QQ, 3, 4)) == 0


def test_determinants():
    A = [[1, 2], [3, 4]]
    assert mat_det(ExactMatrix.from_rows(QQ, A)) == Scalar(QQ, -2)
    assert mat_det(ExactMatrix.from_rows(GF5, A)) == Scalar(GF5, 3)
    F = ExactMatrix.from_rows(QQ, [["1/2", "1/3"], ["1/4", "1/5"]])
    assert mat_det(F).value == Fraction(1, 60)
    assert mat_det(ExactMatrix.zeros(QQ, 0, 0)).value == 1
    assert mat_det(ExactMatrix.from_rows(QQ, [[1, 2], [2, 4]])).is_zero()


def test_det_rejects_non_square():
    with pytest.raises(DimensionError):
        mat_det(ExactMatrix.zeros(QQ, 2, 3))


@pytest.mark.parametrize("size", [3, 6, 9])
def test_bareiss_matches_sympy(size):
    rng = np.random.default_rng(size)
    data = rng.integers(-5, 6, size=(size, size)).tolist()
    expected = sympy.Matrix(data).det()
    assert mat_det(ExactMatrix.from_rows(QQ, data)).value == Fraction(int(expected))


def test_gf_det_matches_sympy_mod_p():
    rng = np.random.default_rng(7)
    data = rng.integers(0, 101, size=(8, 8)).tolist()
    expected = int(sympy.Matrix(data).det()) % 101
    assert mat_det(ExactMatrix.from_rows(GF101, data)).value == expected


def test_rank_profile_gives_nonsingular_minor():
    rng = np.random.default_rng(3)
    factors = rng.integers(-3, 4, size=(6, 3))
    data = (factors @ rng.integers(-3, 4, size=(3, 7))).tolist()
    A = ExactMatrix.from_rows(QQ, data)
    rank, rows, cols = rank_profile(A)
    assert rank == mat_rank(A) <= 3
    assert len(rows) == len(cols) == rank
    assert not mat_det(A.submatrix(rows, cols)).is_zero()


def test_inverse():
    A = ExactMatrix.from_rows(QQ, [[2, 1, 0], [1, 3, 1], [0, 1, 4]])
    assert mat_inverse(A) @ A == identity(QQ, 3)
    G = ExactMatrix.from_rows(GF101, [[2, 1], [7, 5]])
    assert G @ mat_inverse(G) == identity(GF101, 2)
    with pytest.raises(ZeroDivisionError):
        mat_inverse(ExactMatrix.from_rows(QQ, [[1, 2], [2, 4]]))


def test_kronecker_layout():
    A = ExactMatrix.from_rows(QQ, [[1, 2], [3, 4]])
    B = ExactMatrix.from_rows(QQ, [[0, 1], [1, 0]])
    K = kronecker(A, B)
    assert K.shape == (4, 4)
    assert K.to_lists() == [
        [0, 1, 0, 2],
        [1, 0, 2, 0],
        [0, 3, 0, 4],
        [3, 0, 4, 0],
    ]
    assert mat_det(K) == mat_det(A) ** 2 * mat_det(B) ** 2
    with pytest.raises(FieldMismatchError):
        kronecker(A, ExactMatrix.from_rows(GF5, [[1]]))


def test_direct_sum_rank_is_additive():
    A = ExactMatrix.from_rows(QQ, [[1, 1], [1, 1]])
    B = identity(QQ, 3)
    S = direct_sum(A, B)
    assert S.shape == (5, 5)
    assert mat_rank(S) == mat_rank(A) + mat_rank(B)


def test_matrix_arithmetic():
    A = ExactMatrix.from_rows(QQ, [[1, 2], [3, 4]])
    assert (A - A).is_zero()
    assert (A + A) == A.scale(2)
    assert A.transpose().to_lists() == [[1, 3], [2, 4]]
    assert A.permute([1, 0]).to_lists() == [[3, 4], [1, 2]]
    assert A[1, 0] == Scalar(QQ, 3)


# ── Eigenschaften von kronecker und mat_rank ──

def test_kronecker_rank_is_multiplicative_gf2_exhaustive():
    matrices = [
        ExactMatrix.from_rows(GF2, [list(bits[:2]), list(bits[2:])])
        for bits in itertools.product([0, 1], repeat=4)
    ]
    ranks = [mat_rank(A) for A in matrices]
    for A, ra in zip(matrices, ranks):
        for B, rb in zip(matrices, ranks):
            assert mat_rank(kronecker(A, B)) == ra * rb


@pytest.mark.parametrize("field", [QQ, GF5], ids=["Q", "GF5"])
def test_kronecker_rank_is_multiplicative_random(field):
    rng = np.random.default_rng(21)
    for _ in range(20):
        shape_a = tuple(rng.integers(1, 4, 2))
        shape_b = tuple(rng.integers(1, 4, 2))
        A = ExactMatrix.from_rows(field, rng.integers(-1, 2, shape_a).tolist())
        B = ExactMatrix.from_rows(field, rng.integers(-1, 2, shape_b).tolist())
        assert mat_rank(kronecker(A, B)) == mat_rank(A) * mat_rank(B)


@pytest.mark.parametrize("field", [QQ, GF101], ids=["Q", "GF101"])
def test_kronecker_det_with_different_sizes(field):
    A = ExactMatrix.from_rows(field, [[2, 1], [1, 3]])
    B = ExactMatrix.from_rows(field, [[1, 2, 0], [0, 1, 4], [5, 0, 1]])
    assert mat_det(kronecker(A, B)) == mat_det(A) ** 3 * mat_det(B) ** 2
    assert mat_det(kronecker(B, A)) == mat_det(B) ** 2 * mat_det(A) ** 3


def test_kronecker_examples():
    A = ExactMatrix.from_rows(QQ, [[1, 2, 3], [4, 5, 6]])
    assert kronecker(A, ExactMatrix.from_rows(QQ, [[1]])) == A
    B = ExactMatrix.from_rows(QQ, [[1, 2], [3, 4]])
    assert kronecker(identity(QQ, 2), B) == direct_sum(B, B)


def test_kronecker_sum_reproduces_blow_up_m3():
    ctx = KoszulContext(1)
    total = ExactMatrix.zeros(QQ, 6, 6)
    for M, S in zip(wedge_matrices(ctx), toeplitz_basis(1)):
        total = total + kronecker(M, S)
    # (−S2 S1 0 / −S3 0 S1 / 0 −S3 S2)
    assert total.to_lists() == [
        [-1, 0, 0, 1, 0, 0],
        [0, -1, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 1],
        [-1, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0],
        [0, 0, -1, 0, 0, 1],
    ]


@pytest.mark.parametrize("field", [QQ, GF5, GF101], ids=["Q", "GF5", "GF101"])
def test_rank_is_invariant_under_permutation_and_scaling(field):
    rng = np.random.default_rng(4)
    for _ in range(20):
        rows, cols = rng.integers(1, 6, 2)
        factors = rng.integers(-2, 3, (rows, 2)) @ rng.integers(-2, 3, (2, cols))
        A = ExactMatrix.from_rows(field, (factors + rng.integers(0, 2, (rows, cols))).tolist())
        permuted = A.permute(rng.permutation(int(rows)).tolist(), rng.permutation(int(cols)).tolist())
        scales = [field.random_element(rng, 5, nonzero=True) for _ in range(rows)]
        scaled = ExactMatrix.diagonal(field, scales) @ A
        assert mat_rank(permuted) == mat_rank(scaled) == mat_rank(A)


def test_rank_mod_p_never_exceeds_rank_over_q():
    rng = np.random.default_rng(9)
    GF3 = FieldSpec.prime(3)
    for _ in range(100):
        rows, cols = rng.integers(1, 6, 2)
        data = rng.integers(-4, 5, (rows, cols)).tolist()
        assert mat_rank(ExactMatrix.from_rows(GF3, data)) <= mat_rank(ExactMatrix.from_rows(QQ, data))

import pytest
import sympy

from src.determinant_certificate import (
    BlockEntry,
    BlockStructure,
    block_structure,
    elusive_certificate,
    elusive_position,
    exponent_identity_holds,
    expand_determinant_monomials,
    semi_main_matrix,
    structural_checks,
    verify_scaling_laws,
    verify_semi_main,
)
from src.exact_linalg import QQ, CertificateError, FieldSpec, Scalar, mat_det
from src.exterior import KoszulContext, wedge_matrices
from src.utils import central_binomial

GF2 = FieldSpec.prime(2)
GF101 = FieldSpec.prime(101)

M3 = KoszulContext.for_m(3)


# ── Blockstruktur ──

def test_block_structure_m3():
    structure = block_structure(M3)
    layout = [(e.block_row, e.block_col, e.label()) for e in structure]
    assert layout == [
        (0, 0, "-t2"),
        (0, 1, "+t1"),
        (1, 0, "-t3"),
        (1, 2, "+t1"),
        (2, 1, "-t3"),
        (2, 2, "+t2"),
    ]
    assert structure.at(1, 2).i == 1
    assert structure.at(0, 2) is None


def test_block_structure_m5_size():
    structure = block_structure(KoszulContext.for_m(5))
    assert len(structure) == 5 * central_binomial(2) == 30


def test_elusive_positions_m3():
    structure = block_structure(M3)
    assert elusive_position(structure.at(0, 0), structure) == (2, 2)
    assert elusive_position(structure.at(2, 2), structure) == (1, 1)
    for entry in structure:
        if entry.i == 1:
            assert elusive_position(entry, structure) == (1, M3.p + 1)


def test_elusive_position_rejects_column_outside_block():
    # t3 oben links, t1 und t2 darunter in derselben Blockspalte: x = 0, y = 2,
    # also x + y = i − 1, aber b = p + 1 − y = 0 liegt außerhalb von S_3
    target = BlockEntry(i=3, I=(1,), block_row=0, block_col=0, sign=1)
    first = BlockEntry(i=1, I=(2,), block_row=1, block_col=0, sign=1)
    second = BlockEntry(i=2, I=(3,), block_row=2, block_col=0, sign=1)
    layout = BlockStructure(
        M3,
        (target, first, second),
        by_row={0: [target], 1: [first], 2: [second]},
        by_col={0: [target, first, second]},
    )
    with pytest.raises(CertificateError):
        elusive_position(target, layout)


def test_elusive_certificate_m3():
    cert = elusive_certificate(M3)
    assert cert.positions == ((1, 4), (2, 2), (3, 6), (4, 1), (5, 5), (6, 3))
    assert cert.sigma == (3, 1, 5, 0, 4, 2)
    assert cert.permutation_sign == 1
    assert cert.sign_product == -1
    assert cert.k == -1
    assert cert.to_dict()["size"] == 6


@pytest.mark.parametrize("m", [3, 5, 7, 9])
def test_elusive_entries_form_permutation(m):
    ctx = KoszulContext.for_m(m)
    cert = elusive_certificate(ctx)
    size = ctx.D * (ctx.p + 1)
    assert sorted(cert.sigma) == list(range(size))
    assert cert.k in (1, -1)


@pytest.mark.parametrize("m", [3, 5, 7])
def test_structural_checks(m):
    report = structural_checks(KoszulContext.for_m(m))
    assert report["all_ok"], report["checks"]
    assert report["blocks"] == m * central_binomial((m - 1) // 2)


# ── det A(t) ──

def test_semi_main_at_ones_m3():
    A = semi_main_matrix(M3, [1, 1, 1])
    assert A.shape == (6, 6)
    assert mat_det(A) == Scalar(QQ, -1)
    assert mat_det(semi_main_matrix(M3, [1, 1, 1], GF2)) == Scalar(GF2, 1)
    with pytest.raises(ValueError):
        semi_main_matrix(M3, [1, 1])


def test_wedge_sum_is_singular_but_blowup_is_not():
    M = wedge_matrices(M3)
    assert mat_det(M[0] + M[1] + M[2]).is_zero()
    assert not mat_det(semi_main_matrix(M3, [1, 1, 1])).is_zero()


def test_expand_determinant_m3():
    assert expand_determinant_monomials(M3) == {(2, 2, 2): -1}


def test_expand_determinant_rejects_large():
    with pytest.raises(ValueError):
        expand_determinant_monomials(KoszulContext.for_m(5))


def test_symbolic_determinant_m3():
    t = sympy.symbols("t1:4")
    n = M3.p + 1
    A = sympy.zeros(M3.D * n, M3.D * n)
    for entry in block_structure(M3):
        for a in range(n):
            b = a + M3.p + 1 - entry.i
            if 0 <= b < n:
                A[entry.block_row * n + a, entry.block_col * n + b] = entry.sign * t[entry.i - 1]
    assert sympy.expand(A.det() + (t[0] * t[1] * t[2]) ** 2) == 0


@pytest.mark.parametrize(
    "m, field",
    [(3, QQ), (5, QQ), (3, GF101), (5, GF101), (7, GF101)],
    ids=["3-Q", "5-Q", "3-GF101", "5-GF101", "7-GF101"],
)
def test_verify_semi_main(m, field):
    report = verify_semi_main(KoszulContext.for_m(m), field, samples=10, seed=7)
    assert report["all_ok"], report["checks"]
    assert len(report["samples"]) == 10
    assert all(sample["ok"] for sample in report["samples"])


@pytest.mark.parametrize("m", [3, 5])
def test_monomial_identity_at_many_points(m):
    report = verify_semi_main(KoszulContext.for_m(m), GF101, samples=50, seed=m)
    assert report["checks"]["scaling_identity"]
    assert len(report["samples"]) == 50


def test_verify_semi_main_gf2_has_no_samples():
    report = verify_semi_main(M3, GF2, samples=10)
    assert report["det_at_ones"] == "1"
    assert report["samples"] == []
    assert report["all_ok"]


def test_verify_semi_main_is_deterministic():
    first = verify_semi_main(M3, GF101, samples=4, seed="abc")
    second = verify_semi_main(M3, GF101, samples=4, seed="abc", n_jobs=2)
    assert first == second
    with pytest.raises(ValueError):
        verify_semi_main(M3, samples=-1)


@pytest.mark.slow
def test_verify_semi_main_m7_q():
    assert verify_semi_main(KoszulContext.for_m(7), QQ, samples=2)["all_ok"]


@pytest.mark.slow
def test_verify_semi_main_m9_gf():
    report = verify_semi_main(KoszulContext.for_m(9), GF101, samples=10)
    assert report["size"] == 630
    assert report["all_ok"]


# ── Skalierungsgesetze ──

@pytest.mark.parametrize("p", range(0, 7))
def test_exponent_identity(p):
    assert exponent_identity_holds(p)


@pytest.mark.parametrize("m", [3, 5])
@pytest.mark.parametrize("field", [QQ, GF101], ids=["Q", "GF101"])
def test_verify_scaling_laws(m, field):
    report = verify_scaling_laws(KoszulContext.for_m(m), field, samples=3, seed=1)
    assert report["all_ok"], report["checks"]


def test_verify_scaling_laws_rejects_gf2_and_small_m():
    with pytest.raises(ValueError):
        verify_scaling_laws(M3, GF2)
    with pytest.raises(ValueError):
        verify_scaling_laws(KoszulContext(0))

from fractions import Fraction

import pytest

from src.exact_linalg import QQ, FieldSpec
from src.tensor_io import TensorFormatError, builtin, load, parse, save, serialize

GF2 = FieldSpec.prime(2)


def test_parse_single_entry():
    T = parse("tensor v1 field=Q dims=2x3x4\n1 2 3 1/2\n", label="x")
    assert T.dims == (2, 3, 4)
    assert T.entries == {(1, 2, 3): Fraction(1, 2)}
    assert T.label == "x"


@pytest.mark.parametrize("name", ["det3", "perm3", "unit:4", "toeplitz_sum:4"])
def test_builtin_documents_are_canonical(name):
    text = serialize(builtin(name))
    assert serialize(parse(text)) == text


def test_canonical_text_unit2():
    assert serialize(builtin("unit:2")) == "tensor v1 field=Q dims=2x2x2\n1 1 1 1\n2 2 2 1\n"


def test_det3_signs():
    T = builtin("det3")
    assert T.entries == {
        (1, 2, 3): 1,
        (1, 3, 2): -1,
        (2, 1, 3): -1,
        (2, 3, 1): 1,
        (3, 1, 2): 1,
        (3, 2, 1): -1,
    }


def test_det3_equals_perm3_over_gf2():
    assert builtin("det3", GF2) == builtin("perm3", GF2)
    assert builtin("det3") != builtin("perm3")


def test_builtin_sizes():
    assert builtin("unit:5").nnz == 5
    assert builtin("toeplitz_sum:6").nnz == 18
    assert builtin("toeplitz_sum:6").slice(6).is_zero()


@pytest.mark.parametrize("name", ["toeplitz_sum:5", "unit:x", "unit:0", "det4", ""])
def test_builtin_rejects_bad_names(name):
    with pytest.raises(ValueError):
        builtin(name)


@pytest.mark.parametrize(
    "text",
    [
        "tensor v1 field=Q dims=2x2x2\n1 1 1 1\n1 1 1 2\n",   # doppelt
        "tensor v1 field=Q dims=2x2x2\n3 1 1 1\n",            # außerhalb
        "tensor v1 field=GF:4 dims=2x2x2\n",                  # keine Primzahl
        "1 1 1 1\n",                                          # Kopfzeile fehlt
        "tensor v1 field=Q dims=2x2x2\n1 1 1 x\n",            # Wert
        "tensor v1 field=Q dims=2x2x2\n1 1 1\n",              # Spalten
        "tensor v2 field=Q dims=2x2x2\n",                     # Version
        "tensor v1 field=Q dims=2x2\n",                       # dims
        "# nur Kommentar\n",
    ],
)
def test_parse_errors(text):
    with pytest.raises(TensorFormatError):
        parse(text)


def test_parse_comments_and_zeros():
    text = """
    # Kommentar vor der Kopfzeile
    tensor v1 field=Q dims=2x2x2   # Kopf
    1 1 1 0
    2 2 2 -3   # Eintrag
    """
    T = parse(text)
    assert T.entries == {(2, 2, 2): -3}


def test_parse_reduces_mod_p():
    T = parse("tensor v1 field=GF:5 dims=1x1x2\n1 1 1 7\n1 1 2 10\n")
    assert T.entries == {(1, 1, 1): 2}
    assert serialize(T) == "tensor v1 field=GF:5 dims=1x1x2\n1 1 1 2\n"


def test_parse_rejects_zero_denominator_mod_p():
    with pytest.raises(TensorFormatError):
        parse("tensor v1 field=GF:5 dims=1x1x1\n1 1 1 1/5\n")


def test_save_and_load(tmp_path):
    T = builtin("det3", QQ)
    path = save(T, tmp_path / "det3.tns")
    loaded = load(path)
    assert loaded == T
    assert loaded.label == "det3"
    assert path.read_text(encoding="utf-8") == serialize(T)

import pytest

from src.utils import SEED_ENV_VAR, ceil_div, central_binomial, derive_rng, resolve_jobs, resolve_seed


def test_resolve_seed_numbers():
    assert resolve_seed(5) == 5
    assert resolve_seed("5") == 5
    assert resolve_seed(-1) == 2**64 - 1
    assert resolve_seed("-5") == resolve_seed(-5) != resolve_seed(5)
    assert resolve_seed(2**64 + 3) == 3


def test_resolve_seed_text_is_stable():
    seed = resolve_seed("fixed-doubled-toeplitz")
    assert seed == resolve_seed("fixed-doubled-toeplitz")
    assert 0 <= seed < 2**64
    assert seed != resolve_seed("fixed-zero")


def test_resolve_seed_from_environment(monkeypatch):
    monkeypatch.setenv(SEED_ENV_VAR, "17")
    assert resolve_seed() == 17
    monkeypatch.delenv(SEED_ENV_VAR)
    assert resolve_seed() == 0


def test_negative_seeds_give_different_streams():
    a = derive_rng(resolve_seed(-5), 0).integers(0, 2**32, 4).tolist()
    b = derive_rng(resolve_seed(5), 0).integers(0, 2**32, 4).tolist()
    assert a != b


def test_helpers():
    assert [central_binomial(p) for p in range(4)] == [1, 2, 6, 20]
    assert ceil_div(9, 2) == 5 and ceil_div(8, 2) == 4 and ceil_div(0, 6) == 0
    with pytest.raises(ValueError):
        ceil_div(1, 0)
    assert resolve_jobs(3) == 3

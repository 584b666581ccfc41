"""
determinant_certificate.py — Blockstruktur, elusive Einträge und det A(t)
=========================================================================

Gegenstand ist die Matrix

    A(t) = Σ_i t_i · M_i ⊗ S_i        (M_i = wedge_matrix(e_i), S_i Toeplitz)

der Größe D(p+1) × D(p+1). Behauptet wird

    det A(t) = k · (t_1 ⋯ t_m)^{C(2p,p)}   mit k = ±1,

insbesondere ist A(1, …, 1) invertierbar (in jeder Charakteristik).


ABLAUF DES ZERTIFIKATS
----------------------
    ┌────────────────────────────────────────────────────────────────┐
    │ 1. block_structure(ctx)                                        │
    │    Ein Block ±t_i S_i pro Paar (i, I) mit i ∉ I                │
    │    Blockzeile = Rang von I ∪ {i}, Blockspalte = Rang von I     │
    ├────────────────────────────────────────────────────────────────┤
    │ 2. elusive_position(entry, structure)                          │
    │    x = Blöcke mit j < i in derselben Blockzeile                │
    │    y = Blöcke mit j < i in derselben Blockspalte               │
    │    (a, b) = (x + 1, p + 1 − y)     1-basiert                   │
    ├────────────────────────────────────────────────────────────────┤
    │ 3. elusive_certificate(ctx)                                    │
    │    Globale Positionen bilden eine Permutation σ                │
    │    k = sgn(σ) · ∏ Blockvorzeichen                              │
    ├────────────────────────────────────────────────────────────────┤
    │ 4. verify_semi_main(ctx, field, samples, seed)                 │
    │    det A(1,…,1) = k  und  det A(t) = k·(∏t_i)^{C(2p,p)}        │
    └────────────────────────────────────────────────────────────────┘

Spaltenkonvention: b = p + 1 − y. Nur diese Wahl erfüllt S_i(x+1, b) = 1
unter x + y = i − 1 (siehe DESIGN.md).

Berichte sind dicts nach dem Muster {"checks": {...}, "all_ok": bool}.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import permutations
from math import comb
from typing import Sequence

from joblib import Parallel, delayed
from sympy.combinatorics import Permutation

from src.exact_linalg import (
    QQ,
    CertificateError,
    ExactMatrix,
    FieldSpec,
    Scalar,
    kronecker,
    identity,
    mat_det,
    mat_inverse,
)
from src.exterior import (
    KoszulContext,
    ScaledBasis,
    Subset,
    basis_vector,
    block_scaled_basis_change,
    multi_scaled_basis_change,
    reexpress_in_scaled_basis,
    scaled_basis_change,
    wedge_matrix,
    wedge_sign,
)
from src.flattening import RANDOM_INT_BOUND, blowup_element, toeplitz_basis
from src.utils import derive_rng, resolve_jobs, resolve_seed

logger = logging.getLogger(__name__)


# Obergrenze für die vollständige Permutationsentwicklung (8! = 40320 Terme).
MAX_EXPANSION_SIZE = 8


def _binom(n: int, k: int) -> int:
    return comb(n, k) if 0 <= k <= n else 0


# =============================================================================
# 1) BLOCKSTRUKTUR
# =============================================================================

@dataclass(frozen=True)
class BlockEntry:
    """Ein Block ±t_i S_i von A; block_row/block_col 0-basiert."""

    i: int
    I: Subset
    block_row: int
    block_col: int
    sign: int

    def label(self) -> str:
        return f"{'+' if self.sign > 0 else '-'}t{self.i}"


@dataclass(frozen=True)
class BlockStructure:
    """Alle Nichtnull-Blöcke von A, sortiert nach (block_row, block_col)."""

    ctx: KoszulContext
    entries: tuple[BlockEntry, ...]
    by_row: dict = field(repr=False, compare=False)
    by_col: dict = field(repr=False, compare=False)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, k: int) -> BlockEntry:
        return self.entries[k]

    def __contains__(self, entry) -> bool:
        return entry in self.entries

    def at(self, block_row: int, block_col: int) -> BlockEntry | None:
        for entry in self.by_row.get(block_row, ()):
            if entry.block_col == block_col:
                return entry
        return None


def block_structure(ctx: KoszulContext) -> BlockStructure:
    """
    Ein BlockEntry pro Paar (i, I), insgesamt m · C(2p, p).

    Beispiel m=3 (Blockzeile, Blockspalte, 0-basiert):
      (0,0) −t2  (0,1) +t1
      (1,0) −t3  (1,2) +t1
      (2,1) −t3  (2,2) +t2
    """
    entries = []
    for i in range(1, ctx.m + 1):
        for I in ctx.p_subsets:
            s = wedge_sign(i, I)
            if s == 0:
                continue
            entries.append(BlockEntry(
                i=i,
                I=I,
                block_row=ctx.p1_index[tuple(sorted(I + (i,)))],
                block_col=ctx.p_index[I],
                sign=s,
            ))
    entries.sort(key=lambda e: (e.block_row, e.block_col))
    by_row, by_col = defaultdict(list), defaultdict(list)
    for e in entries:
        by_row[e.block_row].append(e)
        by_col[e.block_col].append(e)
    return BlockStructure(ctx, tuple(entries), dict(by_row), dict(by_col))


# =============================================================================
# 2) ELUSIVE EINTRÄGE
# =============================================================================

def _smaller_counts(entry: BlockEntry, structure: BlockStructure) -> tuple[int, int]:
    x = sum(1 for e in structure.by_row[entry.block_row] if e.i < entry.i)
    y = sum(1 for e in structure.by_col[entry.block_col] if e.i < entry.i)
    return x, y


def elusive_position(entry: BlockEntry, structure: BlockStructure) -> tuple[int, int]:
    """
    Innere Position (a, b) des elusive Eintrags von `entry`, 1-basiert.

    Beispiel m=3:
      Block −t2 S2 oben links: x=1, y=0 → (2, 2)
      Block +t2 S2 unten rechts: x=0, y=1 → (1, 1)
      jeder Block t1 S1:        x=y=0   → (1, p+1)
    """
    if entry not in structure:
        raise CertificateError(f"Block {entry} gehört nicht zur Struktur")
    p = structure.ctx.p
    x, y = _smaller_counts(entry, structure)
    if x + y != entry.i - 1:
        raise CertificateError(f"x + y = {x + y} ≠ i − 1 = {entry.i - 1} im Block {entry}")
    a, b = x + 1, p + 1 - y
    # x + y = i − 1 liefert b − a = p + 1 − i; S_i(a, b) = 1 braucht zusätzlich 1 <= a, b <= p + 1
    if not (1 <= a <= p + 1 and 1 <= b <= p + 1):
        raise CertificateError(f"S_{entry.i}({a}, {b}) ist kein Eins-Eintrag")
    return a, b


@dataclass(frozen=True)
class ElusiveCertificate:
    """
    positions: globale (zeile, spalte), 1-basiert, eine pro Block
    sigma:     sigma[zeile-1] = spalte-1 (0-basiert)
    k:         sgn(σ) · ∏ Blockvorzeichen ∈ {+1, −1}
    """

    m: int
    positions: tuple[tuple[int, int], ...]
    sigma: tuple[int, ...]
    permutation_sign: int
    sign_product: int
    k: int

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "size": len(self.sigma),
            "positions": [list(pos) for pos in self.positions],
            "sigma": list(self.sigma),
            "permutation_sign": self.permutation_sign,
            "sign_product": self.sign_product,
            "k": self.k,
        }


def elusive_certificate(ctx: KoszulContext, structure: BlockStructure | None = None) -> ElusiveCertificate:
    """
    Setzt alle elusive Einträge zu globalen Positionen zusammen und prüft,
    dass sie eine Permutationsmatrix tragen.
    """
    structure = structure or block_structure(ctx)
    n = ctx.p + 1
    size = ctx.D * n
    positions = []
    sign_product = 1
    for entry in structure:
        a, b = elusive_position(entry, structure)
        positions.append((entry.block_row * n + a, entry.block_col * n + b))
        sign_product *= entry.sign

    rows = Counter(r for r, _ in positions)
    cols = Counter(c for _, c in positions)
    if len(positions) != size or len(rows) != size or len(cols) != size:
        raise CertificateError(
            f"Elusive Positionen bilden keine Permutation ({len(rows)} Zeilen, {len(cols)} Spalten von {size})"
        )

    sigma = [0] * size
    for r, c in positions:
        sigma[r - 1] = c - 1
    perm_sign = Permutation(sigma).signature()
    k = perm_sign * sign_product
    logger.info("Elusive Zertifikat m=%s: sgn(σ)=%s, ∏Vorzeichen=%s, k=%s", ctx.m, perm_sign, sign_product, k)
    return ElusiveCertificate(
        m=ctx.m,
        positions=tuple(sorted(positions)),
        sigma=tuple(sigma),
        permutation_sign=perm_sign,
        sign_product=sign_product,
        k=k,
    )


# =============================================================================
# 3) STRUKTURELLE PRÜFUNGEN
# =============================================================================

def structural_checks(ctx: KoszulContext) -> dict:
    """
    Alle kombinatorischen Eigenschaften der Blockstruktur in einem Bericht.

    checks:
        block_count           — m · C(2p, p) Blöcke
        per_variable_count    — je Variable C(2p, p) Blöcke
        one_each              — zu jedem Block und j ≠ i genau ein t_j-Block
                                in derselben Blockzeile oder -spalte
        x_plus_y              — x + y = i − 1 für jeden Block
        other_entries_covered — alle anderen Einsen von S_i liegen in den
                                oberen x Zeilen oder den rechten y Spalten
        permutation_support   — elusive Positionen bilden eine Permutation
    """
    structure = block_structure(ctx)
    p, m = ctx.p, ctx.m
    per_var = Counter(e.i for e in structure)

    one_each = True
    for entry in structure:
        for j in range(1, m + 1):
            if j == entry.i:
                continue
            hits = sum(1 for e in structure.by_row[entry.block_row] if e.i == j)
            hits += sum(1 for e in structure.by_col[entry.block_col] if e.i == j)
            if hits != 1:
                one_each = False
                logger.warning("Block %s: %s Blöcke mit t%s in Zeile/Spalte", entry, hits, j)

    x_plus_y = True
    covered = True
    for entry in structure:
        x, y = _smaller_counts(entry, structure)
        if x + y != entry.i - 1:
            x_plus_y = False
            continue
        elusive = (x + 1, p + 1 - y)
        for a in range(1, p + 2):
            b = a + p + 1 - entry.i
            if not 1 <= b <= p + 1 or (a, b) == elusive:
                continue
            if not (a <= x or b > p + 1 - y):
                covered = False

    try:
        elusive_certificate(ctx, structure)
        permutation_ok = True
    except CertificateError as exc:
        logger.error("Permutationsprüfung fehlgeschlagen: %s", exc)
        permutation_ok = False

    checks = {
        "block_count": len(structure) == m * ctx.subspace_rank,
        "per_variable_count": all(per_var[i] == ctx.subspace_rank for i in range(1, m + 1)),
        "one_each": one_each,
        "x_plus_y": x_plus_y,
        "other_entries_covered": covered,
        "permutation_support": permutation_ok,
    }
    return {"m": m, "blocks": len(structure), "checks": checks, "all_ok": all(checks.values())}


# =============================================================================
# 4) A(t) UND DIE MONOM-IDENTITÄT
# =============================================================================

def semi_main_matrix(ctx: KoszulContext, t: Sequence, field: FieldSpec = QQ) -> ExactMatrix:
    """A(t) = Σ_i t_i · M_i ⊗ S_i."""
    if len(t) != ctx.m:
        raise ValueError(f"{len(t)} Werte für t, erwartet m = {ctx.m}")
    basis = toeplitz_basis(ctx.p, field)
    return blowup_element(ctx, [s.scale(value) for s, value in zip(basis, t)])


def _random_nonzero_t(ctx: KoszulContext, field: FieldSpec, seed: int, index: int, bound: int) -> list:
    rng = derive_rng(seed, index)
    return [field.random_element(rng, bound, nonzero=True) for _ in range(ctx.m)]


def _semi_main_sample(p: int, field: FieldSpec, seed: int, index: int, k: int, bound: int) -> dict:
    ctx = KoszulContext(p)
    t = _random_nonzero_t(ctx, field, seed, index, bound)
    det = mat_det(semi_main_matrix(ctx, t, field))
    expected = Scalar(field, k) * Scalar(field, _field_prod(field, t)) ** ctx.subspace_rank
    return {
        "t": [str(Scalar(field, v)) for v in t],
        "determinant": str(det),
        "expected": str(expected),
        "ok": det == expected,
    }


def _field_prod(field: FieldSpec, values: Sequence) -> object:
    out = field.one
    for v in values:
        out = field.mul(out, v)
    return out


def verify_semi_main(ctx: KoszulContext, field: FieldSpec = QQ, samples: int = 10,
                     seed: int | str | None = None, bound: int = RANDOM_INT_BOUND,
                     n_jobs: int | None = None) -> dict:
    """
    det A(1,…,1) = k und det A(t) = k·(∏t_i)^{C(2p,p)} an Zufallspunkten.

    Über GF(2) gibt es nur den Punkt t = (1,…,1); Zufallspunkte entfallen.
    Ein Fehlschlag wird berichtet, nicht unterdrückt.
    """
    if samples < 0:
        raise ValueError("samples muss >= 0 sein")
    seed_int = resolve_seed(seed)
    cert = elusive_certificate(ctx)
    det_ones = mat_det(semi_main_matrix(ctx, [1] * ctx.m, field))
    k_scalar = Scalar(field, cert.k)

    if field.characteristic == 2:
        samples = 0
    results = Parallel(n_jobs=resolve_jobs(n_jobs))(
        delayed(_semi_main_sample)(ctx.p, field, seed_int, index, cert.k, bound)
        for index in range(1, samples + 1)
    ) if samples else []

    checks = {
        "k_is_unit": cert.k in (1, -1),
        "det_at_ones": det_ones == k_scalar,
        "scaling_identity": all(r["ok"] for r in results),
    }
    failed = [r for r in results if not r["ok"]]
    if failed or not checks["det_at_ones"]:
        logger.error("det A(t)-Identität falsifiziert für m=%s über %s", ctx.m, field)
    return {
        "m": ctx.m,
        "field": field.tag,
        "size": ctx.D * (ctx.p + 1),
        "k": cert.k,
        "det_at_ones": str(det_ones),
        "samples": results,
        "checks": checks,
        "all_ok": all(checks.values()),
    }


def expand_determinant_monomials(ctx: KoszulContext) -> dict[tuple[int, ...], int]:
    """
    det A(t) als Polynom über ℤ durch Summation über alle Permutationen.

    Rückgabe: {Exponentenvektor: Koeffizient} ohne Nullkoeffizienten.
    Nur für kleine Matrizen (m = 3: 6! = 720 Terme).
    """
    n = ctx.p + 1
    size = ctx.D * n
    if size > MAX_EXPANSION_SIZE:
        raise ValueError(f"Matrix {size}×{size} zu groß für die Permutationsentwicklung")

    # Jeder Eintrag von A ist 0 oder ±t_i.
    table: dict[tuple[int, int], tuple[int, int]] = {}
    for entry in block_structure(ctx):
        for a in range(n):
            b = a + ctx.p + 1 - entry.i
            if 0 <= b < n:
                table[(entry.block_row * n + a, entry.block_col * n + b)] = (entry.sign, entry.i)

    poly: Counter = Counter()
    for perm in permutations(range(size)):
        coeff = 1
        exps = [0] * ctx.m
        for r, c in enumerate(perm):
            hit = table.get((r, c))
            if hit is None:
                break
            coeff *= hit[0]
            exps[hit[1] - 1] += 1
        else:
            poly[tuple(exps)] += Permutation(list(perm)).signature() * coeff
    return {mono: c for mono, c in sorted(poly.items()) if c}


# =============================================================================
# 5) SKALIERUNGSGESETZE
# =============================================================================

def exponent_identity_holds(p: int) -> bool:
    """(p+1)(C(2p, p−1) − C(2p, p)) = −C(2p, p)."""
    return (p + 1) * (_binom(2 * p, p - 1) - _binom(2 * p, p)) == -_binom(2 * p, p)


def verify_scaling_laws(ctx: KoszulContext, field: FieldSpec = QQ, samples: int = 5,
                        seed: int | str | None = None, bound: int = RANDOM_INT_BOUND) -> dict:
    """
    Prüft die Wirkung skalierter Basen an Zufallsdaten.

    checks:
        basis_change_det   — det X_{B(r),B'(r)} = λ^{C(m−1, r−1)}, r ∈ {p, p+1}
        block_change_det   — det(X ⊗ I_{p+1}) = λ^{(p+1)·C(m−1, p−1)}
        map_det_ratio      — det L_{B'} = λ^{C(m−1,p−1) − C(m−1,p)} · det L_B
        wedge_rescaling    — (L_j)_{E'} = L_j für j ≠ i, λ⁻¹ L_i für j = i
        blowup_det_ratio   — det A_{E'⊗F} = λ^{−C(2p,p)} · det A_{E⊗F}
        all_scaled_det     — det A_{λ·E⊗F} = (∏λ_i)^{−C(2p,p)} · det A_{E⊗F}
        exponent_identity  — (p+1)(C(2p,p−1) − C(2p,p)) = −C(2p,p)
    """
    if ctx.m < 3:
        raise ValueError("Skalierungsgesetze brauchen m >= 3")
    if field.characteristic == 2:
        raise ValueError("GF(2) hat keine Skalierungen λ ≠ 1")
    seed_int = resolve_seed(seed)
    m, p, n = ctx.m, ctx.p, ctx.p + 1
    cr = ctx.subspace_rank
    a_ones = semi_main_matrix(ctx, [1] * m, field)
    det_a = mat_det(a_ones)
    wedge = [wedge_matrix(ctx, basis_vector(field, m, j), field) for j in range(1, m + 1)]

    checks = {name: True for name in (
        "basis_change_det", "block_change_det", "map_det_ratio",
        "wedge_rescaling", "blowup_det_ratio", "all_scaled_det",
    )}
    for index in range(samples):
        rng = derive_rng(seed_int, index)
        i = int(rng.integers(1, m + 1))
        lam = Scalar(field, field.random_element(rng, bound, nonzero=True))
        sb = ScaledBasis(m, i, lam)
        x_low = scaled_basis_change(m, p, sb)
        x_high = scaled_basis_change(m, p + 1, sb)

        checks["basis_change_det"] &= mat_det(x_low) == lam ** _binom(m - 1, p - 1)
        checks["basis_change_det"] &= mat_det(x_high) == lam ** _binom(m - 1, p)

        x_low_block = block_scaled_basis_change(m, p, n, sb)
        x_high_block = block_scaled_basis_change(m, p + 1, n, sb)
        checks["block_change_det"] &= mat_det(x_low_block) == lam ** (n * _binom(m - 1, p - 1))

        generic = ExactMatrix(field, [[field.random_element(rng, bound) for _ in range(ctx.D)]
                                      for _ in range(ctx.D)], cols=ctx.D, _trusted=True)
        rebased = mat_inverse(x_high) @ generic @ x_low
        checks["map_det_ratio"] &= mat_det(rebased) == lam ** (_binom(m - 1, p - 1) - _binom(m - 1, p)) * mat_det(generic)

        for j in range(1, m + 1):
            expected = wedge[j - 1].scale((lam ** -1).value) if j == i else wedge[j - 1]
            checks["wedge_rescaling"] &= reexpress_in_scaled_basis(ctx, j, sb) == expected

        a_rebased = mat_inverse(x_high_block) @ a_ones @ x_low_block
        checks["blowup_det_ratio"] &= mat_det(a_rebased) == lam ** (-cr) * det_a

        lambdas = [Scalar(field, field.random_element(rng, bound, nonzero=True)) for _ in range(m)]
        f_id = identity(field, n)
        y_low = kronecker(multi_scaled_basis_change(m, p, lambdas), f_id)
        y_high = kronecker(multi_scaled_basis_change(m, p + 1, lambdas), f_id)
        lam_prod = Scalar(field, 1)
        for value in lambdas:
            lam_prod = lam_prod * value
        checks["all_scaled_det"] &= mat_det(mat_inverse(y_high) @ a_ones @ y_low) == lam_prod ** (-cr) * det_a

    checks["exponent_identity"] = exponent_identity_holds(p)
    checks = {name: bool(ok) for name, ok in checks.items()}
    logger.info("Skalierungsgesetze m=%s über %s: %s", m, field, "ok" if all(checks.values()) else "FEHLER")
    return {"m": m, "field": field.tag, "samples": samples, "checks": checks, "all_ok": all(checks.values())}

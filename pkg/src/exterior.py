"""
exterior.py — Basis-Kombinatorik der äußeren Potenzen + Keilprodukt-Matrizen L_v
================================================================================

ÜBERBLICK
---------
Für m = 2p+1 betrachten wir die lineare Abbildung

    L_v : ∧^p K^m  →  ∧^{p+1} K^m,      w ↦ v ∧ w

Dieses Modul liefert:

    KoszulContext          → m, p, D = C(m,p) und die lex-geordneten Basen
    subset_rank / unrank   → Position einer Teilmenge in Lex-Ordnung
    wedge_sign             → Vorzeichen von e_i ∧ e_I
    wedge_matrix           → Matrix von L_v (D × D)
    scaled_basis_change    → Basiswechsel bei Skalierung eines Basisvektors
    …                        plus die Hilfen für die Skalierungsgesetze


KONVENTIONEN
------------
    • Indizes aus [m] sind 1-basiert (e_1, …, e_m), Teilmengen sind
      aufsteigend sortierte Tupel, z.B. (1, 3).
    • Matrixpositionen sind 0-basiert.
    • Spalten von L_v gehören zur Basis E(p), Zeilen zur Basis E(p+1),
      beide lexikographisch:

        n=3, r=2  →  (e_12, e_13, e_23)

    • Die Basis (e_23, e_31, e_12) aus dem 3×3-Beispiel ist NICHT die
      Standardbasis hier; complement_basis_change() rechnet um.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Sequence

from src.exact_linalg import QQ, ExactMatrix, FieldSpec, Scalar, identity, kronecker, mat_inverse
from src.utils import central_binomial

logger = logging.getLogger(__name__)

Subset = tuple[int, ...]


# =============================================================================
# 1) TEILMENGEN IN LEX-ORDNUNG
# =============================================================================

def lex_subsets(n: int, r: int) -> list[Subset]:
    """Alle r-Teilmengen von [n] in lexikographischer Ordnung."""
    return list(combinations(range(1, n + 1), r))


def _validate_subset(n: int, r: int, subset: Sequence[int]) -> Subset:
    subset = tuple(int(x) for x in subset)
    if len(subset) != r:
        raise ValueError(f"Teilmenge {subset} hat nicht Größe {r}")
    if any(not 1 <= x <= n for x in subset):
        raise ValueError(f"Teilmenge {subset} liegt nicht in [1, {n}]")
    if any(a >= b for a, b in zip(subset, subset[1:])):
        raise ValueError(f"Teilmenge {subset} ist nicht streng aufsteigend")
    return subset


def subset_rank(n: int, r: int, subset: Sequence[int]) -> int:
    """
    0-basierte Position von `subset` unter allen r-Teilmengen von [n] (lex).

    Für jede Stelle zählen wir die Teilmengen, die dort einen kleineren
    Wert haben und davor übereinstimmen.

    Beispiel:
      (3, 2, (1,3)) → 1
      (5, 2, (3,5)) → 8
    """
    subset = _validate_subset(n, r, subset)
    rank = 0
    prev = 0
    for pos, x in enumerate(subset, start=1):
        for smaller in range(prev + 1, x):
            rank += comb(n - smaller, r - pos)
        prev = x
    return rank


def subset_unrank(n: int, r: int, k: int) -> Subset:
    """
    Umkehrung von subset_rank: die Teilmenge an Position k.

    Beispiel:
      (3, 2, 1) → (1, 3)
      (5, 2, 9) → (4, 5)
    """
    total = comb(n, r)
    if not 0 <= k < total:
        raise ValueError(f"Index {k} außerhalb von [0, {total})")
    result = []
    x = 1
    for pos in range(1, r + 1):
        while k >= comb(n - x, r - pos):
            k -= comb(n - x, r - pos)
            x += 1
        result.append(x)
        x += 1
    return tuple(result)


# =============================================================================
# 2) KOSZUL-KONTEXT
# =============================================================================

@dataclass(frozen=True)
class KoszulContext:
    """
    Unveränderliche Basistabellen für m = 2p+1.

    p_subsets / p1_subsets: lex-geordnete p- bzw. (p+1)-Teilmengen von [m].
    Beide Listen haben Länge D = C(2p+1, p) = C(2p+1, p+1).
    """

    p: int
    m: int = field(init=False)
    D: int = field(init=False)
    p_subsets: tuple[Subset, ...] = field(init=False, repr=False)
    p1_subsets: tuple[Subset, ...] = field(init=False, repr=False)
    p_index: dict = field(init=False, repr=False, compare=False)
    p1_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.p < 0:
            raise ValueError(f"p muss >= 0 sein, nicht {self.p}")
        m = 2 * self.p + 1
        p_subsets = tuple(lex_subsets(m, self.p))
        p1_subsets = tuple(lex_subsets(m, self.p + 1))
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "D", len(p_subsets))
        object.__setattr__(self, "p_subsets", p_subsets)
        object.__setattr__(self, "p1_subsets", p1_subsets)
        object.__setattr__(self, "p_index", {s: k for k, s in enumerate(p_subsets)})
        object.__setattr__(self, "p1_index", {s: k for k, s in enumerate(p1_subsets)})

    @classmethod
    def for_m(cls, m: int) -> "KoszulContext":
        if m < 1 or m % 2 == 0:
            raise ValueError(f"m muss ungerade und >= 1 sein, nicht {m}")
        return cls((m - 1) // 2)

    @property
    def subspace_rank(self) -> int:
        """rk(X_L) = C(2p, p)."""
        return central_binomial(self.p)

    def nonzero_positions(self, i: int) -> list[tuple[int, int, int]]:
        """
        Die C(2p,p) Einträge ±1 von L_i als (zeile, spalte, vorzeichen).

        Eine Zeile pro p-Teilmenge I mit i ∉ I.
        """
        out = []
        for col, subset in enumerate(self.p_subsets):
            s = wedge_sign(i, subset)
            if s:
                row = self.p1_index[tuple(sorted(subset + (i,)))]
                out.append((row, col, s))
        return out


# =============================================================================
# 3) KEILPRODUKT
# =============================================================================

def wedge_sign(i: int, subset: Sequence[int]) -> int:
    """
    Vorzeichen s mit e_i ∧ e_I = s · e_{I ∪ {i}}.

        s = 0                       falls i ∈ I
        s = (-1)^{#{j ∈ I : j < i}} sonst

    Beispiel:
      (1, (2,))   → +1
      (2, (1,))   → -1
      (2, (1, 2)) →  0
    """
    if i in subset:
        return 0
    smaller = sum(1 for j in subset if j < i)
    return -1 if smaller % 2 else 1


def basis_vector(field: FieldSpec, m: int, i: int) -> list[Scalar]:
    """e_i in K^m (1-basiert)."""
    return [Scalar(field, 1 if k == i else 0) for k in range(1, m + 1)]


def wedge_matrix(ctx: KoszulContext, v: Sequence, field: FieldSpec | None = None) -> ExactMatrix:
    """
    D × D-Matrix von L_v in den Basen E(p) (Spalten) und E(p+1) (Zeilen).

    Eintrag (rank(I ∪ {i}), rank(I)) sammelt v_i · wedge_sign(i, I).
    `field` wird aus den Scalar-Einträgen von v gelesen, sonst ℚ.
    """
    if len(v) != ctx.m:
        raise ValueError(f"Vektor hat Länge {len(v)}, erwartet m = {ctx.m}")
    if field is None:
        field = next((x.field for x in v if isinstance(x, Scalar)), QQ)
    coeffs = [field.coerce(x) for x in v]
    out = ExactMatrix.zeros(field, ctx.D, ctx.D)
    data = out._data
    for i, c in enumerate(coeffs, start=1):
        if c == 0:
            continue
        for row, col, s in ctx.nonzero_positions(i):
            data[row][col] = field.add(data[row][col], c if s > 0 else field.neg(c))
    return out


def wedge_matrices(ctx: KoszulContext, field: FieldSpec = QQ) -> list[ExactMatrix]:
    """M_1, …, M_m mit M_i = (L_{e_i})_E."""
    return [wedge_matrix(ctx, basis_vector(field, ctx.m, i), field) for i in range(1, ctx.m + 1)]


# =============================================================================
# 4) BASISWECHSEL DURCH SKALIERUNG
# =============================================================================
#
# B' = (b_1, …, λ·b_i, …, b_n). Dann wird b_I genau für i ∈ I mit λ skaliert,
# der Basiswechsel X_{B(r),B'(r)} ist also diagonal mit C(n-1, r-1)
# Einträgen λ.

@dataclass(frozen=True)
class ScaledBasis:
    """Basis mit i-tem Vektor (1-basiert) skaliert um λ ≠ 0."""

    n: int
    index: int
    lam: Scalar

    def __post_init__(self) -> None:
        if not 1 <= self.index <= self.n:
            raise ValueError(f"Index {self.index} liegt nicht in [1, {self.n}]")
        if self.lam.is_zero():
            raise ValueError("λ muss ungleich 0 sein")


def scaled_basis_change(n: int, r: int, sb: ScaledBasis) -> ExactMatrix:
    """
    X_{B(r),B'(r)}: Diagonale mit λ an jeder Teilmenge, die sb.index enthält.

    Beispiel:
      (3, 2, i=1, λ) → diag(λ, λ, 1)
    """
    if sb.n != n:
        raise ValueError(f"ScaledBasis hat Dimension {sb.n}, erwartet {n}")
    lam = sb.lam
    return ExactMatrix.diagonal(lam.field, [lam.value if sb.index in s else 1 for s in lex_subsets(n, r)])


def multi_scaled_basis_change(n: int, r: int, lambdas: Sequence[Scalar]) -> ExactMatrix:
    """Basis λ·E (alle Vektoren skaliert): Diagonaleintrag ∏_{i∈I} λ_i."""
    if len(lambdas) != n:
        raise ValueError(f"{len(lambdas)} Skalierungen, erwartet {n}")
    field = lambdas[0].field
    diag = []
    for subset in lex_subsets(n, r):
        value = Scalar(field, 1)
        for i in subset:
            value = value * lambdas[i - 1]
        diag.append(value.value)
    return ExactMatrix.diagonal(field, diag)


def block_scaled_basis_change(n: int, r: int, c: int, sb: ScaledBasis) -> ExactMatrix:
    """
    X_{B(r)⊗C, B'(r)⊗C} = X_{B(r),B'(r)} ⊗ I_c.

    det = λ^{c · C(n-1, r-1)}.
    """
    return kronecker(scaled_basis_change(n, r, sb), identity(sb.lam.field, c))


def reexpress_in_scaled_basis(ctx: KoszulContext, j: int, sb: ScaledBasis) -> ExactMatrix:
    """
    (L_j)_{E'} über die Basiswechselformel

        (L_j)_{E'} = X_{E(p+1),E'(p+1)}^{-1} · (L_j)_E · X_{E(p),E'(p)}

    Ergebnis: (L_j)_E für j ≠ i, λ^{-1}(L_i)_E für j = i.
    """
    field = sb.lam.field
    m_j = wedge_matrix(ctx, basis_vector(field, ctx.m, j), field)
    x_low = scaled_basis_change(ctx.m, ctx.p, sb)
    x_high = scaled_basis_change(ctx.m, ctx.p + 1, sb)
    return mat_inverse(x_high) @ m_j @ x_low


def complement_basis_change(m: int, field: FieldSpec = QQ) -> ExactMatrix:
    """
    Vorzeichenbehaftete Permutation von der Lex-Basis von ∧^{m-1} K^m zur
    Komplementbasis (b_1, …, b_m) mit e_i ∧ b_i = e_{[m]}.

    Spalte i = b_i in Lex-Koordinaten. Für m = 3 ist das (e_23, e_31, e_12).
    """
    subsets = lex_subsets(m, m - 1)
    index = {s: k for k, s in enumerate(subsets)}
    out = ExactMatrix.zeros(field, m, m)
    for i in range(1, m + 1):
        rest = tuple(k for k in range(1, m + 1) if k != i)
        # e_i ∧ e_rest = (-1)^{i-1} e_[m]  →  b_i = (-1)^{i-1} e_rest
        out._data[index[rest]][i - 1] = field.coerce(1 if (i - 1) % 2 == 0 else -1)
    return out

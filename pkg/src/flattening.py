"""
flattening.py — Koszul-Flattening φ_L, untere Schranken für den Border-Rang, Blow-ups
=====================================================================================

ÜBERBLICK
---------
Für einen Tensor T = Σ_i e_i ⊗ T_i ∈ K^m ⊗ K^b ⊗ K^c (T_i = i-te b×c-Scheibe)
ist das Koszul-Flattening

    φ_L(T) = Σ_i L_{e_i} ⊗ T_i          ((D·b) × (D·c)-Matrix, D = C(m,p))

und es gilt

    brk(T) >= rank(φ_L(T)) / rk(X_L),      rk(X_L) = C(2p, p).

Da der Border-Rang ganzzahlig ist, ist die Schranke ⌈rank / C(2p,p)⌉.


PIPELINES
---------
    ┌───────────────────────────────────────────────────────────────────┐
    │ d ungerade  →  lower_bound_odd(T)                                │
    │                m = d, φ_L direkt auf T                           │
    ├───────────────────────────────────────────────────────────────────┤
    │ d gerade    →  lower_bound_even(T, projections, seed)            │
    │                m = d-1, ψ = π ⊗ id ⊗ id mit π: K^d → K^{d-1}     │
    │                Standard: letzte Koordinate streichen             │
    │                + `projections` zufällige Surjektionen            │
    │                → das beste (größte) Zertifikat gewinnt           │
    └───────────────────────────────────────────────────────────────────┘

    ψ erhält "Border-Rang <= r", jede Projektion liefert also eine
    gültige Schranke.


BLOW-UPS
--------
    blowup_element(ctx, coeffs)   → Σ_i L_{e_i} ⊗ coeffs_i  ∈ X_L^{n}
    full_blowup_check(ctx, field) → Koeffizienten S_i ⊕ S_i, invertierbar?
    witness_search(ctx, n, …)     → Zufallssuche nach hohem Rang in X_L^{n}

Ein gefundener Rang R ist ein Zeuge für rk(X_L^{n}) >= R, kein Beweis
der (stärkeren) Ungleichung für n = m.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from joblib import Parallel, delayed

from src.exact_linalg import (
    QQ,
    DimensionError,
    ExactMatrix,
    FieldMismatchError,
    FieldSpec,
    CertificateError,
    direct_sum,
    mat_det,
    mat_rank,
    rank_profile,
)
from src.exterior import KoszulContext
from src.utils import ceil_div, derive_rng, resolve_jobs, resolve_seed

logger = logging.getLogger(__name__)


# =============================================================================
# KONFIGURATION
# =============================================================================

# Zufallseinträge über ℚ: ganze Zahlen in [-RANDOM_INT_BOUND, RANDOM_INT_BOUND].
# Kleine Zahlen halten das Wachstum in Bareiss klein; jeder Zufallsversuch ist
# für die Rang-Aussage gültig.
RANDOM_INT_BOUND = 10

# Erlaubte Vorbelegungen für den ersten Versuch der Witness-Suche.
FIRST_TRIAL_HOOKS = ("doubled-toeplitz", "toeplitz", "zero")


# =============================================================================
# 1) TENSOREN
# =============================================================================

Index3 = tuple[int, int, int]


@dataclass(frozen=True, eq=False)
class Tensor3:
    """
    Tensor in K^a ⊗ K^b ⊗ K^c, dünn besetzt, Indizes 1-basiert.

    entries: {(i, j, k): Rohwert}, ohne explizite Nullen.
    """

    field: FieldSpec
    dims: tuple[int, int, int]
    entries: Mapping[Index3, object]
    label: str = ""

    @classmethod
    def from_entries(cls, field: FieldSpec, dims: Sequence[int],
                     entries: Mapping[Index3, object] | Iterable[tuple[Index3, object]],
                     label: str = "") -> "Tensor3":
        dims = tuple(int(x) for x in dims)
        if len(dims) != 3 or any(x < 1 for x in dims):
            raise DimensionError(f"Ungültige Dimensionen {dims}")
        items = entries.items() if isinstance(entries, Mapping) else entries
        clean: dict[Index3, object] = {}
        for index, value in items:
            index = tuple(int(x) for x in index)
            if any(not 1 <= x <= n for x, n in zip(index, dims)):
                raise DimensionError(f"Index {index} außerhalb von {dims}")
            value = field.coerce(value)
            total = field.add(clean.get(index, field.zero), value)
            if total == 0:
                clean.pop(index, None)
            else:
                clean[index] = total
        return cls(field, dims, dict(sorted(clean.items())), label)

    @classmethod
    def zero(cls, field: FieldSpec, dims: Sequence[int], label: str = "") -> "Tensor3":
        return cls.from_entries(field, dims, {}, label)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    @property
    def is_cubic(self) -> bool:
        a, b, c = self.dims
        return a == b == c

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor3):
            return NotImplemented
        return (self.field, self.dims, dict(self.entries)) == (other.field, other.dims, dict(other.entries))

    def slice(self, i: int) -> ExactMatrix:
        """Die i-te b×c-Scheibe T_i."""
        _, b, c = self.dims
        out = ExactMatrix.zeros(self.field, b, c)
        for (ii, j, k), value in self.entries.items():
            if ii == i:
                out._data[j - 1][k - 1] = value
        return out

    def _check(self, other: "Tensor3") -> None:
        if self.field != other.field:
            raise FieldMismatchError(f"Tensoren über {self.field} und {other.field}")
        if self.dims != other.dims:
            raise DimensionError(f"Tensoren mit Dimensionen {self.dims} und {other.dims}")

    def __add__(self, other: "Tensor3") -> "Tensor3":
        self._check(other)
        return Tensor3.from_entries(self.field, self.dims,
                                    list(self.entries.items()) + list(other.entries.items()))

    def scale(self, c) -> "Tensor3":
        c = self.field.coerce(c)
        return Tensor3.from_entries(self.field, self.dims,
                                    {idx: self.field.mul(c, v) for idx, v in self.entries.items()},
                                    self.label)

    def permute_factors(self, perm_b: Sequence[int], perm_c: Sequence[int]) -> "Tensor3":
        """(i, j, k) → (i, perm_b[j-1], perm_c[k-1]); Permutationen 1-basiert."""
        return Tensor3.from_entries(
            self.field, self.dims,
            {(i, perm_b[j - 1], perm_c[k - 1]): v for (i, j, k), v in self.entries.items()},
            self.label,
        )

    def project_first_factor(self, projection: ExactMatrix) -> "Tensor3":
        """
        ψ(T) = (π ⊗ id ⊗ id)(T) für π als (a' × a)-Matrix.

        Neuer Eintrag (i', j, k) = Σ_i π[i', i] · T[i, j, k].
        """
        if projection.field != self.field:
            raise FieldMismatchError(f"Projektion über {projection.field}, Tensor über {self.field}")
        a, b, c = self.dims
        if projection.cols != a:
            raise DimensionError(f"Projektion hat {projection.cols} Spalten, erwartet {a}")
        f = self.field
        items = []
        for (i, j, k), value in self.entries.items():
            for row in range(projection.rows):
                coeff = projection.raw(row, i - 1)
                if coeff != 0:
                    items.append(((row + 1, j, k), f.mul(coeff, value)))
        return Tensor3.from_entries(f, (projection.rows, b, c), items, self.label)


def rank_one(field: FieldSpec, u: Sequence, v: Sequence, w: Sequence) -> Tensor3:
    """Reiner Tensor u ⊗ v ⊗ w."""
    u, v, w = ([field.coerce(x) for x in vec] for vec in (u, v, w))
    items = {}
    for i, x in enumerate(u, 1):
        for j, y in enumerate(v, 1):
            for k, z in enumerate(w, 1):
                value = field.mul(field.mul(x, y), z)
                if value != 0:
                    items[(i, j, k)] = value
    return Tensor3.from_entries(field, (len(u), len(v), len(w)), items)


# =============================================================================
# 2) TOEPLITZ-BASIS
# =============================================================================

@dataclass(frozen=True)
class ToeplitzBasis:
    """
    S_1, …, S_{2p+1}: (p+1)×(p+1), S_r(j, k) = 1  ⟺  k − j = p + 1 − r.
    """

    p: int
    matrices: tuple[ExactMatrix, ...] = field(repr=False)

    def __getitem__(self, r: int) -> ExactMatrix:
        """S_r, 1-basiert."""
        if not 1 <= r <= len(self.matrices):
            raise IndexError(f"S_{r} existiert nicht (1 <= r <= {len(self.matrices)})")
        return self.matrices[r - 1]

    def __len__(self) -> int:
        return len(self.matrices)

    def __iter__(self):
        return iter(self.matrices)


def toeplitz_basis(p: int, field: FieldSpec = QQ) -> ToeplitzBasis:
    """
    Die 2p+1 Toeplitz-Matrizen in Reihenfolge.

    Beispiel p=1:
      S_1 = [[0,1],[0,0]], S_2 = I_2, S_3 = [[0,0],[1,0]]
    """
    if p < 0:
        raise ValueError(f"p muss >= 0 sein, nicht {p}")
    n = p + 1
    mats = []
    for r in range(1, 2 * p + 2):
        s = ExactMatrix.zeros(field, n, n)
        for j in range(1, n + 1):
            k = j + p + 1 - r
            if 1 <= k <= n:
                s._data[j - 1][k - 1] = field.one
        mats.append(s)
    return ToeplitzBasis(p, tuple(mats))


def doubled_toeplitz_coeffs(p: int, field: FieldSpec = QQ) -> list[ExactMatrix]:
    """(S_1 ⊕ S_1, …, S_m ⊕ S_m): Koeffizienten des vollen Blow-ups."""
    return [direct_sum(s, s) for s in toeplitz_basis(p, field)]


# =============================================================================
# 3) FLATTENING UND BLOW-UP-ELEMENTE
# =============================================================================

def phi(ctx: KoszulContext, T: Tensor3) -> ExactMatrix:
    """
    φ_L(T) = Σ_i wedge_matrix(e_i) ⊗ T_i   ((D·b) × (D·c)).

    Block (zeile, spalte) ist Σ_i L_i[zeile, spalte] · T_i; da die
    Nichtnull-Positionen der L_i disjunkt sind, wird jede Scheibe genau in
    die Blöcke ihres L_i geschrieben.
    """
    a, b, c = T.dims
    if a != ctx.m:
        raise DimensionError(f"Erster Faktor hat Dimension {a}, erwartet m = {ctx.m}")
    f = T.field
    out = ExactMatrix.zeros(f, ctx.D * b, ctx.D * c)
    data = out._data
    by_slice: dict[int, list[tuple[int, int, object]]] = defaultdict(list)
    for (i, j, k), value in T.entries.items():
        by_slice[i].append((j - 1, k - 1, value))
    for i, slice_entries in by_slice.items():
        for row, col, s in ctx.nonzero_positions(i):
            for j, k, value in slice_entries:
                r, cc = row * b + j, col * c + k
                data[r][cc] = f.add(data[r][cc], value if s > 0 else f.neg(value))
    return out


def blowup_element(ctx: KoszulContext, coeffs: Sequence[ExactMatrix]) -> ExactMatrix:
    """
    Σ_i wedge_matrix(e_i) ⊗ coeffs_i: ein Element von X_L^{n}, Größe Dn × Dn.

    coeffs: genau m quadratische n×n-Matrizen über demselben Körper.
    """
    if len(coeffs) != ctx.m:
        raise ValueError(f"{len(coeffs)} Koeffizienten, erwartet m = {ctx.m}")
    f = coeffs[0].field
    n = coeffs[0].rows
    for c in coeffs:
        if c.field != f:
            raise FieldMismatchError("Koeffizienten über verschiedenen Körpern")
        if c.shape != (n, n):
            raise ValueError(f"Koeffizienten nicht alle {n}×{n} (gefunden {c.shape})")
    out = ExactMatrix.zeros(f, ctx.D * n, ctx.D * n)
    data = out._data
    for i, coeff in enumerate(coeffs, start=1):
        entries = coeff.nonzero_entries()
        if not entries:
            continue
        for row, col, s in ctx.nonzero_positions(i):
            for j, k, value in entries:
                r, cc = row * n + j, col * n + k
                data[r][cc] = f.add(data[r][cc], value if s > 0 else f.neg(value))
    return out


def full_blowup_check(ctx: KoszulContext, field: FieldSpec = QQ) -> dict:
    """
    Ist Σ_i L_i ⊗ (S_i ⊕ S_i) ∈ X_L^{m+1} invertierbar?

    Rückgabe (dict):
        m, field, size  — Kontext und Matrixgröße D(m+1)
        determinant     — exakte Determinante als String
        rank            — Rang
        invertible      — True/False
    """
    element = blowup_element(ctx, doubled_toeplitz_coeffs(ctx.p, field))
    det = mat_det(element)
    invertible = not det.is_zero()
    logger.info("Voller Blow-up m=%s über %s: det=%s", ctx.m, field, det)
    return {
        "m": ctx.m,
        "field": field.tag,
        "size": element.rows,
        "determinant": str(det),
        "rank": element.rows if invertible else mat_rank(element),
        "invertible": invertible,
    }


def minor_order(ctx: KoszulContext, r: int) -> int:
    """
    r · C(2p, p) + 1: die Minoren dieser Größe von φ_L verschwinden auf
    allen Tensoren mit Border-Rang <= r.
    """
    return r * ctx.subspace_rank + 1


def nonvanishing_minor(A: ExactMatrix) -> dict:
    """
    Zeuge für rank(A) >= R: Zeilen/Spalten eines R×R-Minors mit det ≠ 0.

    Rückgabe: {"rank", "rows", "cols", "determinant"} (Indizes 0-basiert).
    """
    rank, rows, cols = rank_profile(A)
    det = mat_det(A.submatrix(rows, cols)) if rank else None
    if det is not None and det.is_zero():
        raise CertificateError("Pivot-Minor verschwindet, Elimination inkonsistent")
    return {"rank": rank, "rows": rows, "cols": cols,
            "determinant": str(det) if det is not None else "1"}


# =============================================================================
# 4) ZERTIFIKATE FÜR DIE UNTERE SCHRANKE
# =============================================================================

@dataclass(frozen=True)
class RankCertificate:
    """
    Ergebnis einer Flattening-Rechnung.

    Invariante: lower_bound · C(2p,p) >= flattening_rank > (lower_bound − 1) · C(2p,p)
    """

    label: str
    field: str
    m: int
    p: int
    flattening_rank: int
    subspace_rank: int
    lower_bound: int
    projection: str | None = None
    minor_rows: tuple[int, ...] = ()
    minor_cols: tuple[int, ...] = ()

    def check(self) -> None:
        r, s, b = self.flattening_rank, self.subspace_rank, self.lower_bound
        if not (b * s >= r > (b - 1) * s or (r == 0 and b == 0)):
            raise CertificateError(f"Schranke {b} passt nicht zu Rang {r} / {s}")
        if len(self.minor_rows) != r or len(self.minor_cols) != r:
            raise CertificateError("Minor-Zeuge hat nicht die Größe des Rangs")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "field": self.field,
            "m": self.m,
            "p": self.p,
            "flattening_rank": self.flattening_rank,
            "subspace_rank": self.subspace_rank,
            "lower_bound": self.lower_bound,
            "projection": self.projection,
            "minor_rows": list(self.minor_rows),
            "minor_cols": list(self.minor_cols),
        }


def _certify(ctx: KoszulContext, T: Tensor3, label: str, projection: str | None) -> RankCertificate:
    rank, rows, cols = rank_profile(phi(ctx, T))
    cert = RankCertificate(
        label=label,
        field=T.field.tag,
        m=ctx.m,
        p=ctx.p,
        flattening_rank=rank,
        subspace_rank=ctx.subspace_rank,
        lower_bound=ceil_div(rank, ctx.subspace_rank),
        projection=projection,
        minor_rows=tuple(rows),
        minor_cols=tuple(cols),
    )
    cert.check()
    return cert


def _cubic_dimension(T: Tensor3) -> int:
    if not T.is_cubic:
        raise DimensionError(f"Tensor ist nicht kubisch: {T.dims}")
    return T.dims[0]


def lower_bound_odd(T: Tensor3, label: str | None = None) -> RankCertificate:
    """
    d ungerade (d >= 3): m = d, Schranke ⌈rank(φ_L(T)) / C(2p,p)⌉.

    Beispiel:
      det₃ über ℚ    → Rang 9, Schranke 5
      det₃ über GF(2) → Rang 8, Schranke 4
    """
    d = _cubic_dimension(T)
    if d % 2 == 0:
        raise ValueError(f"d = {d} ist gerade, lower_bound_even verwenden")
    if d < 3:
        raise ValueError(f"d muss >= 3 sein, nicht {d}")
    ctx = KoszulContext.for_m(d)
    cert = _certify(ctx, T, label or T.label, None)
    logger.info("Ungerade Pipeline %s: Rang %s → Schranke %s", cert.label, cert.flattening_rank, cert.lower_bound)
    return cert


def drop_last_projection(field: FieldSpec, d: int) -> ExactMatrix:
    """π = [I_{d-1} | 0]: streicht die letzte Koordinate."""
    out = ExactMatrix.zeros(field, d - 1, d)
    for i in range(d - 1):
        out._data[i][i] = field.one
    return out


def random_surjection(field: FieldSpec, d: int, rng, bound: int = RANDOM_INT_BOUND) -> ExactMatrix:
    """Zufällige (d-1)×d-Matrix mit vollem Zeilenrang."""
    while True:
        data = [[field.random_element(rng, bound) for _ in range(d)] for _ in range(d - 1)]
        candidate = ExactMatrix(field, data, cols=d, _trusted=True)
        if mat_rank(candidate) == d - 1:
            return candidate


def lower_bound_even(T: Tensor3, projections: int = 0, seed: int | str | None = None,
                     label: str | None = None, bound: int = RANDOM_INT_BOUND) -> RankCertificate:
    """
    d gerade (d >= 4): m = d-1, φ_L auf ψ(T) = (π ⊗ id ⊗ id)(T).

    Geprüft werden die Standardprojektion (letzte Koordinate streichen) und
    `projections` zufällige Surjektionen. Das Zertifikat mit dem größten
    Flattening-Rang gewinnt; bei Gleichstand das zuerst gefundene.
    """
    d = _cubic_dimension(T)
    if d % 2:
        raise ValueError(f"d = {d} ist ungerade, lower_bound_odd verwenden")
    if d < 4:
        raise ValueError(f"d muss >= 4 sein, nicht {d}")
    if projections < 0:
        raise ValueError("projections muss >= 0 sein")
    ctx = KoszulContext.for_m(d - 1)
    label = label or T.label
    seed_int = resolve_seed(seed)

    best = _certify(ctx, T.project_first_factor(drop_last_projection(T.field, d)), label, f"drop:{d}")
    for index in range(1, projections + 1):
        pi = random_surjection(T.field, d, derive_rng(seed_int, index), bound)
        cert = _certify(ctx, T.project_first_factor(pi), label, f"random:{index}")
        logger.debug("Projektion %s: Rang %s", cert.projection, cert.flattening_rank)
        if cert.flattening_rank > best.flattening_rank:
            best = cert
    logger.info("Gerade Pipeline %s: Rang %s → Schranke %s (%s)",
                label, best.flattening_rank, best.lower_bound, best.projection)
    return best


def lower_bound(T: Tensor3, projections: int = 0, seed: int | str | None = None,
                label: str | None = None) -> RankCertificate:
    """Wählt die Pipeline nach der Parität von d."""
    d = _cubic_dimension(T)
    if d % 2:
        return lower_bound_odd(T, label)
    return lower_bound_even(T, projections, seed, label)


# =============================================================================
# 5) WITNESS-SUCHE IN X_L^{n}
# =============================================================================

@dataclass(frozen=True)
class WitnessResult:
    """Bester gefundener Rang in X_L^{n} plus Koeffizienten, die ihn erreichen."""

    m: int
    n: int
    field: str
    trials: int
    best_rank: int
    best_trial: int
    coeffs: tuple[tuple[tuple[str, ...], ...], ...]
    ranks: tuple[int, ...]
    target: int
    full_size: int
    minor_order: int

    @property
    def exceeds_target(self) -> bool:
        """best_rank > C(2p,p)·(2m−4)."""
        return self.best_rank > self.target

    @property
    def nontrivial_minor(self) -> bool:
        """Die N×N-Minoren (N = minor_order) von φ_L sind nicht identisch 0."""
        return self.best_rank >= self.minor_order

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "field": self.field,
            "trials": self.trials,
            "best_rank": self.best_rank,
            "best_trial": self.best_trial,
            "target": self.target,
            "exceeds_target": self.exceeds_target,
            "full_size": self.full_size,
            "minor_order": self.minor_order,
            "nontrivial_minor": self.nontrivial_minor,
            "ranks": list(self.ranks),
            "coeffs": [[list(row) for row in mat] for mat in self.coeffs],
        }


def _forced_coeffs(ctx: KoszulContext, n: int, field: FieldSpec, hook: str) -> list[ExactMatrix]:
    if hook == "zero":
        return [ExactMatrix.zeros(field, n, n) for _ in range(ctx.m)]
    if hook == "toeplitz":
        coeffs = list(toeplitz_basis(ctx.p, field))
    elif hook == "doubled-toeplitz":
        coeffs = doubled_toeplitz_coeffs(ctx.p, field)
    else:
        raise ValueError(f"Unbekannte Vorbelegung {hook!r} (erlaubt: {', '.join(FIRST_TRIAL_HOOKS)})")
    if coeffs[0].rows != n:
        raise ValueError(f"Vorbelegung {hook!r} braucht n = {coeffs[0].rows}, nicht {n}")
    return coeffs


def _random_coeffs(ctx: KoszulContext, n: int, field: FieldSpec, rng, bound: int) -> list[ExactMatrix]:
    return [
        ExactMatrix(field, [[field.random_element(rng, bound) for _ in range(n)] for _ in range(n)],
                    cols=n, _trusted=True)
        for _ in range(ctx.m)
    ]


def _witness_trial(p: int, n: int, field: FieldSpec, seed: int, index: int, bound: int,
                   hook: str | None) -> tuple[int, list[ExactMatrix]]:
    ctx = KoszulContext(p)
    if index == 0 and hook:
        coeffs = _forced_coeffs(ctx, n, field, hook)
    else:
        coeffs = _random_coeffs(ctx, n, field, derive_rng(seed, index), bound)
    return mat_rank(blowup_element(ctx, coeffs)), coeffs


def witness_search(ctx: KoszulContext, n: int, trials: int, seed: int | str | None = None,
                   field: FieldSpec = QQ, first_trial: str | None = None,
                   bound: int = RANDOM_INT_BOUND, n_jobs: int | None = None) -> WitnessResult:
    """
    Zufallssuche nach einem Element hohen Rangs in X_L^{n}.

    Jeder Versuch zieht seine Zufallszahlen aus derive_rng(seed, index);
    parallele (joblib) und sequentielle Läufe liefern dasselbe Ergebnis.
    `first_trial` belegt Versuch 0 fest vor ("doubled-toeplitz", "toeplitz",
    "zero").
    """
    if trials < 1:
        raise ValueError("trials muss >= 1 sein")
    if n < 1:
        raise ValueError("n muss >= 1 sein")
    if first_trial is not None and first_trial not in FIRST_TRIAL_HOOKS:
        raise ValueError(f"Unbekannte Vorbelegung {first_trial!r}")
    seed_int = resolve_seed(seed)

    results = Parallel(n_jobs=resolve_jobs(n_jobs))(
        delayed(_witness_trial)(ctx.p, n, field, seed_int, index, bound, first_trial)
        for index in range(trials)
    )
    ranks = tuple(rank for rank, _ in results)
    best_trial = max(range(trials), key=lambda t: (ranks[t], -t))
    best_coeffs = results[best_trial][1]
    logger.info("Witness-Suche m=%s n=%s: bester Rang %s (Versuch %s)", ctx.m, n, ranks[best_trial], best_trial)

    return WitnessResult(
        m=ctx.m,
        n=n,
        field=field.tag,
        trials=trials,
        best_rank=ranks[best_trial],
        best_trial=best_trial,
        coeffs=tuple(tuple(tuple(str(x) for x in row) for row in c.to_lists()) for c in best_coeffs),
        ranks=ranks,
        target=ctx.subspace_rank * (2 * ctx.m - 4),
        full_size=ctx.D * n,
        minor_order=minor_order(ctx, 2 * ctx.m - 4),
    )

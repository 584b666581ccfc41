"""
exact_linalg.py — Exakte Arithmetik über ℚ und GF(p) + dichte Matrix-Kernels
============================================================================

ÜBERBLICK
---------
Dieses Modul ist die unterste Schicht des Projekts. Alle anderen Module
(exterior, flattening, determinant_certificate) rechnen ausschließlich mit
den hier definierten Typen:

    FieldSpec    →  der Grundkörper K  (ℚ oder GF(p))
    Scalar       →  ein Körperelement in kanonischer Form
    ExactMatrix  →  dichte Matrix über K

und den Operationen

    mat_rank()      →  exakter Rang
    mat_det()       →  exakte Determinante
    kronecker()     →  Kronecker-Produkt A ⊗ B (Blocklayout a_ij · B)
    direct_sum()    →  Blockdiagonale A ⊕ B
    rank_profile()  →  Rang + Pivot-Zeilen/-Spalten (nichtverschwindender Minor)
    mat_inverse()   →  Inverse (für Basiswechsel-Formeln)


KANONISCHE FORM
---------------
    ℚ      → fractions.Fraction, gekürzt, Nenner > 0
    GF(p)  → int im Bereich [0, p)

Zwei Körperelemente sind genau dann gleich, wenn ihre Darstellung gleich
ist. Deshalb reicht für Scalar die normale Dataclass-Gleichheit.


ELIMINATION
-----------
    ┌──────────┬─────────────────────────────────────────────────────────┐
    │ Körper   │ Verfahren                                               │
    ├──────────┼─────────────────────────────────────────────────────────┤
    │ GF(p)    │ Gauß mod p auf numpy int64                              │
    │          │ (Repräsentanten < 2^31 → Produkte < 2^62, kein Überlauf)│
    ├──────────┼─────────────────────────────────────────────────────────┤
    │ ℚ        │ Zeilen auf ganze Zahlen skalieren, dann Bareiss         │
    │          │ (bruchfrei) auf numpy object-Arrays mit Python-ints     │
    └──────────┴─────────────────────────────────────────────────────────┘

    Beide Varianten sind exakt. Das Ergebnis (Rang, Determinante) hängt
    nicht von der Pivot-Reihenfolge ab.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

import numpy as np
from sympy import isprime

logger = logging.getLogger(__name__)

# Größte erlaubte Primzahl (exklusiv). Bis hierhin passen Produkte zweier
# Repräsentanten in int64.
MAX_PRIME = 2**31


# =============================================================================
# FEHLERTYPEN
# =============================================================================

class FieldMismatchError(ValueError):
    """Zwei Operanden leben über verschiedenen Körpern."""


class DimensionError(ValueError):
    """Matrixdimensionen passen nicht zur Operation."""


class CertificateError(RuntimeError):
    """Ein Zertifikat ist inkonsistent: eine mathematische Aussage wurde falsifiziert."""


# =============================================================================
# 1) GRUNDKÖRPER
# =============================================================================

@dataclass(frozen=True)
class FieldSpec:
    """
    Der Grundkörper K.

    characteristic = 0  → ℚ
    characteristic = p  → GF(p), p prim, 2 <= p < 2^31
    """

    characteristic: int

    def __post_init__(self) -> None:
        c = self.characteristic
        if c == 0:
            return
        if not (2 <= c < MAX_PRIME) or not isprime(c):
            raise ValueError(f"GF(p) braucht eine Primzahl 2 <= p < 2^31, nicht {c}")

    # ── Konstruktoren ──

    @classmethod
    def rationals(cls) -> "FieldSpec":
        return cls(0)

    @classmethod
    def prime(cls, p: int) -> "FieldSpec":
        return cls(int(p))

    @classmethod
    def from_tag(cls, tag: str) -> "FieldSpec":
        """
        Liest die Feld-Kennung aus CLI und Tensor-Dokument.

            "Q"       → ℚ
            "GF:101"  → GF(101)
        """
        text = (tag or "").strip()
        if text.upper() in ("Q", "QQ"):
            return cls.rationals()
        if text.upper().startswith("GF:"):
            number = text[3:].strip()
            if not number.isdigit():
                raise ValueError(f"Ungültige Feld-Kennung: {tag!r}")
            return cls.prime(int(number))
        raise ValueError(f"Ungültige Feld-Kennung: {tag!r} (erwartet Q oder GF:<p>)")

    # ── Eigenschaften ──

    @property
    def kind(self) -> str:
        return "rationals" if self.characteristic == 0 else "prime"

    @property
    def is_finite(self) -> bool:
        return self.characteristic != 0

    @property
    def tag(self) -> str:
        return "Q" if self.characteristic == 0 else f"GF:{self.characteristic}"

    def __str__(self) -> str:
        return self.tag

    # ── Arithmetik auf Rohwerten (Fraction bzw. int) ──

    @property
    def zero(self):
        return Fraction(0) if self.characteristic == 0 else 0

    @property
    def one(self):
        return Fraction(1) if self.characteristic == 0 else 1

    def coerce(self, value):
        """
        Bringt int, Fraction, str oder Scalar in die kanonische Form.

        GF(p): Brüche a/b werden als a · b^{-1} mod p gelesen.
        """
        if isinstance(value, Scalar):
            if value.field != self:
                raise FieldMismatchError(f"Skalar über {value.field}, erwartet {self}")
            return value.value
        if isinstance(value, str):
            value = Fraction(value.strip())
        if isinstance(value, (bool, np.integer)):
            value = int(value)
        p = self.characteristic
        if p == 0:
            return Fraction(value)
        if isinstance(value, Fraction):
            if value.denominator % p == 0:
                raise ZeroDivisionError(f"Nenner {value.denominator} ist 0 in GF({p})")
            return value.numerator * pow(value.denominator, -1, p) % p
        if isinstance(value, int):
            return value % p
        raise TypeError(f"Kann {type(value).__name__} nicht nach {self} umwandeln")

    def add(self, a, b):
        return a + b if self.characteristic == 0 else (a + b) % self.characteristic

    def sub(self, a, b):
        return a - b if self.characteristic == 0 else (a - b) % self.characteristic

    def mul(self, a, b):
        return a * b if self.characteristic == 0 else (a * b) % self.characteristic

    def neg(self, a):
        return -a if self.characteristic == 0 else (-a) % self.characteristic

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError(f"0 ist in {self} nicht invertierbar")
        if self.characteristic == 0:
            return 1 / a
        return pow(a, -1, self.characteristic)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def random_element(self, rng: np.random.Generator, bound: int = 10, *, nonzero: bool = False):
        """
        Zufälliges Element.

        GF(p): gleichverteilt in [0, p)  (bzw. [1, p) wenn nonzero)
        ℚ:     ganze Zahl in [-bound, bound]  (ohne 0 wenn nonzero)
        """
        p = self.characteristic
        if p:
            low = 1 if nonzero else 0
            return int(rng.integers(low, p))
        while True:
            value = int(rng.integers(-bound, bound + 1))
            if value or not nonzero:
                return Fraction(value)


QQ = FieldSpec.rationals()


# =============================================================================
# 2) SKALARE
# =============================================================================

@dataclass(frozen=True)
class Scalar:
    """Ein Element von K in kanonischer Form. Gleichheit = Darstellungsgleichheit."""

    field: FieldSpec
    value: object

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", self.field.coerce(self.value))

    def _other(self, other):
        if isinstance(other, Scalar):
            if other.field != self.field:
                raise FieldMismatchError(f"{self.field} vs. {other.field}")
            return other.value
        return self.field.coerce(other)

    def __add__(self, other):
        return Scalar(self.field, self.field.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Scalar(self.field, self.field.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return Scalar(self.field, self.field.sub(self._other(other), self.value))

    def __mul__(self, other):
        return Scalar(self.field, self.field.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Scalar(self.field, self.field.div(self.value, self._other(other)))

    def __neg__(self):
        return Scalar(self.field, self.field.neg(self.value))

    def __pow__(self, exponent: int):
        if exponent < 0:
            return Scalar(self.field, self.field.inv(self.value)) ** (-exponent)
        if self.field.is_finite:
            return Scalar(self.field, pow(self.value, exponent, self.field.characteristic))
        return Scalar(self.field, self.value**exponent)

    def is_zero(self) -> bool:
        return self.value == 0

    def __str__(self) -> str:
        return str(self.value)


# =============================================================================
# 3) MATRIZEN
# =============================================================================

class ExactMatrix:
    """
    Dichte Matrix über einem FieldSpec.

    Intern: Liste von Zeilen mit kanonischen Rohwerten (Fraction bzw. int).
    Nach außen: Einträge als Scalar über entry(i, j) bzw. A[i, j].
    Alle Einträge teilen sich den Körper der Matrix.
    """

    __slots__ = ("field", "rows", "cols", "_data")

    def __init__(self, field: FieldSpec, data: Sequence[Sequence], *, cols: int | None = None,
                 _trusted: bool = False) -> None:
        self.field = field
        if _trusted:
            self._data = [list(row) for row in data]
        else:
            self._data = [[field.coerce(x) for x in row] for row in data]
        self.rows = len(self._data)
        if self.rows:
            widths = {len(row) for row in self._data}
            if len(widths) != 1:
                raise DimensionError("Zeilen haben unterschiedliche Länge")
            self.cols = widths.pop()
        else:
            self.cols = cols or 0

    # ── Konstruktoren ──

    @classmethod
    def from_rows(cls, field: FieldSpec, rows: Iterable[Iterable]) -> "ExactMatrix":
        return cls(field, [list(r) for r in rows])

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "ExactMatrix":
        zero = field.zero
        return cls(field, [[zero] * cols for _ in range(rows)], cols=cols, _trusted=True)

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "ExactMatrix":
        out = cls.zeros(field, n, n)
        for i in range(n):
            out._data[i][i] = field.one
        return out

    @classmethod
    def diagonal(cls, field: FieldSpec, values: Sequence) -> "ExactMatrix":
        out = cls.zeros(field, len(values), len(values))
        for i, v in enumerate(values):
            out._data[i][i] = field.coerce(v)
        return out

    # ── Zugriff ──

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def entry(self, i: int, j: int) -> Scalar:
        return Scalar(self.field, self._data[i][j])

    def __getitem__(self, key: tuple[int, int]) -> Scalar:
        i, j = key
        return self.entry(i, j)

    def raw(self, i: int, j: int):
        """Rohwert ohne Scalar-Hülle (für innere Schleifen)."""
        return self._data[i][j]

    def to_lists(self) -> list[list]:
        return [list(row) for row in self._data]

    def nonzero_entries(self) -> list[tuple[int, int, object]]:
        return [(i, j, x) for i, row in enumerate(self._data) for j, x in enumerate(row) if x != 0]

    def is_zero(self) -> bool:
        return all(x == 0 for row in self._data for x in row)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.field == other.field and self.shape == other.shape and self._data == other._data

    __hash__ = None

    def __repr__(self) -> str:
        return f"ExactMatrix({self.rows}x{self.cols} über {self.field})"

    # ── Arithmetik ──

    def _check_same_field(self, other: "ExactMatrix") -> None:
        if self.field != other.field:
            raise FieldMismatchError(f"Matrizen über {self.field} und {other.field}")

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_field(other)
        if self.shape != other.shape:
            raise DimensionError(f"{self.shape} + {other.shape}")
        add = self.field.add
        data = [[add(a, b) for a, b in zip(r1, r2)] for r1, r2 in zip(self._data, other._data)]
        return ExactMatrix(self.field, data, cols=self.cols, _trusted=True)

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        return self + other.scale(-1)

    def __neg__(self) -> "ExactMatrix":
        return self.scale(-1)

    def scale(self, c) -> "ExactMatrix":
        c = self.field.coerce(c)
        mul = self.field.mul
        data = [[mul(c, x) for x in row] for row in self._data]
        return ExactMatrix(self.field, data, cols=self.cols, _trusted=True)

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._check_same_field(other)
        if self.cols != other.rows:
            raise DimensionError(f"{self.shape} @ {other.shape}")
        f = self.field
        columns = list(zip(*other._data)) if other.rows else [() for _ in range(other.cols)]
        data = []
        for row in self._data:
            out_row = []
            for col in columns:
                acc = f.zero
                for a, b in zip(row, col):
                    if a and b:
                        acc = acc + a * b
                out_row.append(f.coerce(acc) if f.is_finite else acc)
            data.append(out_row)
        return ExactMatrix(f, data, cols=other.cols, _trusted=True)

    def transpose(self) -> "ExactMatrix":
        data = [list(col) for col in zip(*self._data)] if self.rows else []
        return ExactMatrix(self.field, data, cols=self.rows, _trusted=True)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "ExactMatrix":
        data = [[self._data[i][j] for j in cols] for i in rows]
        return ExactMatrix(self.field, data, cols=len(cols), _trusted=True)

    def permute(self, row_perm: Sequence[int] | None = None,
                col_perm: Sequence[int] | None = None) -> "ExactMatrix":
        """Neue Zeile i = alte Zeile row_perm[i], analog für Spalten."""
        row_perm = range(self.rows) if row_perm is None else row_perm
        col_perm = range(self.cols) if col_perm is None else col_perm
        return self.submatrix(list(row_perm), list(col_perm))

    # ── Export ──

    def to_numpy(self) -> np.ndarray:
        """
        GF(p) → int64-Array.
        ℚ     → object-Array mit Fraction-Einträgen.
        """
        if self.field.is_finite:
            return np.array(self._data, dtype=np.int64).reshape(self.rows, self.cols)
        out = np.empty((self.rows, self.cols), dtype=object)
        for i, row in enumerate(self._data):
            for j, x in enumerate(row):
                out[i, j] = x
        return out


def identity(field: FieldSpec, n: int) -> ExactMatrix:
    return ExactMatrix.identity(field, n)


# =============================================================================
# 4) ELIMINATION (intern)
# =============================================================================
#
# Beide Kernels liefern:
#   rank        — exakter Rang
#   pivot_rows  — Original-Zeilenindizes der Pivotzeilen
#   pivot_cols  — Spaltenindizes der Pivots
#   det_raw     — nur für quadratische Matrizen mit vollem Rang sinnvoll
#
# Pivot-Zeilen und -Spalten spannen einen nichtsingulären Minor auf:
# Zeilen werden nur durch Vielfache FRÜHERER Pivotzeilen verändert, die
# Transformation ist also unipotent-untere-Dreiecksform.

def _eliminate_mod_p(a: np.ndarray, p: int) -> tuple[int, list[int], list[int], int]:
    a = a.copy()
    n_rows, n_cols = a.shape
    row_ids = list(range(n_rows))
    pivot_cols: list[int] = []
    det = 1
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
            row_ids[r], row_ids[piv] = row_ids[piv], row_ids[r]
            det = -det
        pivot_value = int(a[r, c])
        det = det * pivot_value % p
        a[r, c:] = a[r, c:] * pow(pivot_value, -1, p) % p
        below = np.flatnonzero(a[r + 1:, c])
        if below.size:
            idx = below + r + 1
            factors = a[idx, c].copy()
            a[idx, c:] = (a[idx, c:] - np.outer(factors, a[r, c:])) % p
        pivot_cols.append(c)
        r += 1
    return r, row_ids[:r], pivot_cols, det % p


def _integer_rows(data: list[list[Fraction]]) -> tuple[np.ndarray, int]:
    """
    Skaliert jede Zeile mit dem kgV ihrer Nenner auf ganze Zahlen.

    Rückgabe: (object-Array mit Python-ints, Produkt aller Skalierungsfaktoren)
    Der Rang bleibt gleich; det(ganzzahlig) = scale · det(original).
    """
    n_rows = len(data)
    n_cols = len(data[0]) if n_rows else 0
    out = np.empty((n_rows, n_cols), dtype=object)
    scale = 1
    for i, row in enumerate(data):
        factor = lcm(*(x.denominator for x in row)) if row else 1
        scale *= factor
        for j, x in enumerate(row):
            out[i, j] = x.numerator * (factor // x.denominator)
    return out, scale


def _eliminate_bareiss(a: np.ndarray) -> tuple[int, list[int], list[int], int]:
    """
    Bruchfreie Elimination (Bareiss) über ℤ, mit Spaltenüberspringen.

    Nach Schritt k ist jeder Eintrag ein (k+1)×(k+1)-Minor der Originalmatrix,
    daher ist die Division durch den vorigen Pivot exakt.
    """
    a = a.copy()
    n_rows, n_cols = a.shape
    row_ids = list(range(n_rows))
    pivot_cols: list[int] = []
    sign = 1
    prev = 1
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        column = a[r:, c]
        nz = [k for k in range(column.shape[0]) if column[k] != 0]
        if not nz:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
            row_ids[r], row_ids[piv] = row_ids[piv], row_ids[r]
            sign = -sign
        pivot_value = a[r, c]
        if r + 1 < n_rows:
            block = a[r + 1:, c + 1:] * pivot_value - np.outer(a[r + 1:, c], a[r, c + 1:])
            a[r + 1:, c + 1:] = block // prev
            a[r + 1:, c] = 0
        prev = pivot_value
        pivot_cols.append(c)
        r += 1
    det = sign * prev if r == n_rows == n_cols else 0
    return r, row_ids[:r], pivot_cols, det


def _eliminate(A: ExactMatrix) -> tuple[int, list[int], list[int], object]:
    if A.rows == 0 or A.cols == 0:
        return 0, [], [], A.field.one
    if A.field.is_finite:
        return _eliminate_mod_p(A.to_numpy(), A.field.characteristic)
    ints, scale = _integer_rows(A._data)
    rank, rows, cols, det = _eliminate_bareiss(ints)
    return rank, rows, cols, Fraction(det, scale)


# =============================================================================
# 5) ÖFFENTLICHE OPERATIONEN
# =============================================================================

def mat_rank(A: ExactMatrix) -> int:
    """
    Exakter Rang von A. Leere Matrix → 0.

    Beispiel:
      [[1, 2], [2, 4]] über ℚ → 1
    """
    rank, _, _, _ = _eliminate(A)
    return rank


def rank_profile(A: ExactMatrix) -> tuple[int, list[int], list[int]]:
    """
    Rang plus Pivot-Zeilen und -Spalten.

    A.submatrix(pivot_rows, pivot_cols) ist quadratisch und invertierbar,
    ein nachprüfbarer Zeuge dafür, dass rank(A) >= rank.
    """
    rank, rows, cols, _ = _eliminate(A)
    return rank, sorted(rows), cols


def mat_det(A: ExactMatrix) -> Scalar:
    """
    Exakte Determinante. Nicht-quadratische Eingabe → DimensionError.

    Leere 0×0-Matrix → 1.
    """
    if not A.is_square:
        raise DimensionError(f"Determinante braucht eine quadratische Matrix, nicht {A.shape}")
    if A.rows == 0:
        return Scalar(A.field, 1)
    rank, _, _, det = _eliminate(A)
    if rank < A.rows:
        return Scalar(A.field, 0)
    return Scalar(A.field, det)


def mat_inverse(A: ExactMatrix) -> ExactMatrix:
    """
    Inverse per Gauß-Jordan auf [A | I]. Singuläre Matrix → ZeroDivisionError.

    Nur für die kleinen Basiswechsel-Matrizen gedacht (reines Python).
    """
    if not A.is_square:
        raise DimensionError(f"Inverse braucht eine quadratische Matrix, nicht {A.shape}")
    f = A.field
    n = A.rows
    work = [row + [f.one if i == j else f.zero for j in range(n)] for i, row in enumerate(A.to_lists())]
    for c in range(n):
        piv = next((i for i in range(c, n) if work[i][c] != 0), None)
        if piv is None:
            raise ZeroDivisionError("Matrix ist singulär")
        work[c], work[piv] = work[piv], work[c]
        inv = f.inv(work[c][c])
        work[c] = [f.mul(inv, x) for x in work[c]]
        for i in range(n):
            if i != c and work[i][c] != 0:
                factor = work[i][c]
                work[i] = [f.sub(x, f.mul(factor, y)) for x, y in zip(work[i], work[c])]
    return ExactMatrix(f, [row[n:] for row in work], cols=n, _trusted=True)


def kronecker(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    """
    Kronecker-Produkt im Blocklayout

        A ⊗ B = ( a_11·B  …  a_1n·B )
                (   ⋮           ⋮   )
                ( a_m1·B  …  a_mn·B )

    Ergebnis: (rows(A)·rows(B)) × (cols(A)·cols(B)).
    """
    if A.field != B.field:
        raise FieldMismatchError(f"Kronecker-Produkt über {A.field} und {B.field}")
    f = A.field
    out = ExactMatrix.zeros(f, A.rows * B.rows, A.cols * B.cols)
    b_nonzero = B.nonzero_entries()
    for i, j, a in A.nonzero_entries():
        for k, l, b in b_nonzero:
            out._data[i * B.rows + k][j * B.cols + l] = f.mul(a, b)
    return out


def direct_sum(A: ExactMatrix, B: ExactMatrix) -> ExactMatrix:
    """Blockdiagonale diag(A, B); rank(A ⊕ B) = rank(A) + rank(B)."""
    if A.field != B.field:
        raise FieldMismatchError(f"Direkte Summe über {A.field} und {B.field}")
    out = ExactMatrix.zeros(A.field, A.rows + B.rows, A.cols + B.cols)
    for i, j, x in A.nonzero_entries():
        out._data[i][j] = x
    for i, j, x in B.nonzero_entries():
        out._data[A.rows + i][A.cols + j] = x
    return out

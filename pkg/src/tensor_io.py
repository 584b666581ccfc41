"""
tensor_io.py

Textformat für Tensoren und die eingebauten Beispieltensoren.

Format (UTF-8, Leerzeichen-getrennt, Kommentare mit '#'):

    tensor v1 field=Q dims=3x3x3
    1 2 3 1
    1 3 2 -1
    ...

Kanonische Form: Einträge nach (i, j, k) sortiert, Werte reduziert
(ℚ: gekürzte Brüche, GF(p): Vertreter in [0, p)), keine Nullen, keine
Kommentare. serialize(parse(x)) ist für kanonische Dokumente bytegleich.

Eingebaute Tensoren:
    det3            Σ_σ sgn(σ) e_σ(1) ⊗ e_σ(2) ⊗ e_σ(3)
    perm3           Σ_σ e_σ(1) ⊗ e_σ(2) ⊗ e_σ(3)
    unit:d          Σ_i e_i ⊗ e_i ⊗ e_i
    toeplitz_sum:d  Σ_{i<d} e_i ⊗ (S_i ⊕ S_i), d gerade, d-te Scheibe 0
"""

from __future__ import annotations

import logging
from itertools import permutations
from pathlib import Path

from sympy.combinatorics import Permutation

from src.exact_linalg import QQ, FieldSpec
from src.flattening import Tensor3, doubled_toeplitz_coeffs

logger = logging.getLogger(__name__)

FORMAT_VERSION = "v1"

BUILTIN_NAMES = ("det3", "perm3", "unit:d", "toeplitz_sum:d")


class TensorFormatError(ValueError):
    """Tensordokument ist syntaktisch oder inhaltlich fehlerhaft."""


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_header(line: str, lineno: int) -> tuple[FieldSpec, tuple[int, int, int]]:
    parts = line.split()
    if len(parts) != 4 or parts[0] != "tensor":
        raise TensorFormatError(f"Zeile {lineno}: Kopfzeile 'tensor v1 field=… dims=…' erwartet")
    if parts[1] != FORMAT_VERSION:
        raise TensorFormatError(f"Zeile {lineno}: Version {parts[1]!r} nicht unterstützt")

    options = {}
    for part in parts[2:]:
        key, sep, value = part.partition("=")
        if not sep:
            raise TensorFormatError(f"Zeile {lineno}: {part!r} ist kein key=value")
        options[key] = value
    if set(options) != {"field", "dims"}:
        raise TensorFormatError(f"Zeile {lineno}: field= und dims= erwartet")

    try:
        field = FieldSpec.from_tag(options["field"])
    except ValueError as exc:
        raise TensorFormatError(f"Zeile {lineno}: {exc}") from exc

    try:
        dims = tuple(int(x) for x in options["dims"].split("x"))
    except ValueError as exc:
        raise TensorFormatError(f"Zeile {lineno}: dims {options['dims']!r} ungültig") from exc
    if len(dims) != 3 or any(x < 1 for x in dims):
        raise TensorFormatError(f"Zeile {lineno}: dims {options['dims']!r} ungültig")
    return field, dims


def parse(text: str, label: str = "") -> Tensor3:
    """
    Liest ein Tensordokument.

    Fehler (TensorFormatError): Syntax, Index außerhalb der Dimensionen,
    Nicht-Primzahl als Charakteristik, doppelte Einträge.
    """
    header = None
    entries: dict[tuple[int, int, int], object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip(raw_line)
        if not line:
            continue
        if header is None:
            header = _parse_header(line, lineno)
            continue

        field, dims = header
        parts = line.split()
        if len(parts) != 4:
            raise TensorFormatError(f"Zeile {lineno}: 'i j k wert' erwartet, gefunden {line!r}")
        try:
            index = tuple(int(x) for x in parts[:3])
        except ValueError as exc:
            raise TensorFormatError(f"Zeile {lineno}: Indizes müssen ganzzahlig sein") from exc
        if any(not 1 <= x <= n for x, n in zip(index, dims)):
            raise TensorFormatError(f"Zeile {lineno}: Index {index} außerhalb von {dims}")
        if index in entries:
            raise TensorFormatError(f"Zeile {lineno}: doppelter Eintrag {index}")
        try:
            entries[index] = field.coerce(parts[3])
        except (ValueError, ZeroDivisionError) as exc:
            raise TensorFormatError(f"Zeile {lineno}: Wert {parts[3]!r} ungültig ({exc})") from exc

    if header is None:
        raise TensorFormatError("Leeres Dokument: Kopfzeile fehlt")
    field, dims = header
    return Tensor3.from_entries(field, dims, entries, label)


def serialize(T: Tensor3) -> str:
    """Kanonische Textform (endet mit Zeilenumbruch)."""
    a, b, c = T.dims
    lines = [f"tensor {FORMAT_VERSION} field={T.field.tag} dims={a}x{b}x{c}"]
    for (i, j, k), value in sorted(T.entries.items()):
        lines.append(f"{i} {j} {k} {value}")
    return "\n".join(lines) + "\n"


def load(path: str | Path) -> Tensor3:
    path = Path(path)
    logger.debug("Lade Tensor aus %s", path)
    return parse(path.read_text(encoding="utf-8"), label=path.stem)


def save(T: Tensor3, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(serialize(T), encoding="utf-8")
    logger.info("Tensor %s gespeichert: %s", T.label or "?", path)
    return path


# =============================================================================
# EINGEBAUTE TENSOREN
# =============================================================================

def _permutation_tensor(field: FieldSpec, signed: bool, label: str) -> Tensor3:
    entries = []
    for sigma in permutations(range(3)):
        sign = Permutation(list(sigma)).signature() if signed else 1
        entries.append(((sigma[0] + 1, sigma[1] + 1, sigma[2] + 1), sign))
    return Tensor3.from_entries(field, (3, 3, 3), entries, label)


def _size_argument(name: str) -> int:
    _, _, arg = name.partition(":")
    try:
        d = int(arg)
    except ValueError as exc:
        raise ValueError(f"{name!r}: Dimension fehlt oder ist keine Zahl") from exc
    if d < 1:
        raise ValueError(f"{name!r}: Dimension muss >= 1 sein")
    return d


def toeplitz_sum(d: int, field: FieldSpec = QQ) -> Tensor3:
    """
    Σ_{i=1}^{d-1} e_i ⊗ (S_i ⊕ S_i) in K^d ⊗ K^d ⊗ K^d (d gerade).

    Die d-te Scheibe des ersten Faktors ist 0; die Standardprojektion der
    geraden Pipeline liefert genau den Tensor in K^{d-1} ⊗ K^d ⊗ K^d.
    """
    if d % 2 or d < 2:
        raise ValueError(f"toeplitz_sum braucht gerades d >= 2, nicht {d}")
    p = (d - 2) // 2
    entries = []
    for i, block in enumerate(doubled_toeplitz_coeffs(p, field), start=1):
        for j, k, value in block.nonzero_entries():
            entries.append(((i, j + 1, k + 1), value))
    return Tensor3.from_entries(field, (d, d, d), entries, f"toeplitz_sum:{d}")


def builtin(name: str, field: FieldSpec = QQ) -> Tensor3:
    """
    Eingebauter Tensor nach Name.

    Beispiel:
      builtin("det3")           → 6 Einträge ±1
      builtin("unit:5")         → 5 Einträge
      builtin("toeplitz_sum:6") → 18 Einträge
    """
    name = name.strip()
    if name == "det3":
        return _permutation_tensor(field, True, name)
    if name == "perm3":
        return _permutation_tensor(field, False, name)
    if name.startswith("unit:"):
        d = _size_argument(name)
        return Tensor3.from_entries(field, (d, d, d), {(i, i, i): 1 for i in range(1, d + 1)}, name)
    if name.startswith("toeplitz_sum:"):
        return toeplitz_sum(_size_argument(name), field)
    raise ValueError(f"Unbekannter eingebauter Tensor {name!r} (verfügbar: {', '.join(BUILTIN_NAMES)})")

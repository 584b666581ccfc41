"""
utils.py

Gemeinsame Hilfsfunktionen für Seeds, Ganzzahl-Arithmetik und Binomialzahlen.

Wird verwendet von:
- flattening.py              (Zufallsprojektionen, Witness-Suche)
- determinant_certificate.py (Zufallspunkte für det A(t))
- cli.py / main.py           (Seed aus Flag oder Umgebungsvariable)
"""

from __future__ import annotations

import hashlib
import os
from math import comb

import numpy as np


# =============================================================================
# KONFIGURATION
# =============================================================================

# Standard-Seed, wenn weder --seed noch KOSZUL_SEED gesetzt ist.
DEFAULT_SEED = 0

# Name der Umgebungsvariablen, die den Standard-Seed überschreibt.
SEED_ENV_VAR = "KOSZUL_SEED"

# Name der Umgebungsvariablen für die Anzahl der joblib-Worker.
JOBS_ENV_VAR = "KOSZUL_JOBS"

# Seeds werden modulo 2^64 reduziert (negative Werte eingeschlossen).
SEED_MODULUS = 2**64


def central_binomial(p: int) -> int:
    """
    C(2p, p): der Rang von X_L für m = 2p+1.

    Beispiel:
      p=1 -> 2, p=2 -> 6, p=3 -> 20
    """
    return comb(2 * p, p)


def ceil_div(a: int, b: int) -> int:
    """
    Ganzzahlige Aufrundung a / b für a >= 0, b > 0 (keine Gleitkommazahlen).

    Beispiel:
      ceil_div(9, 2) -> 5
      ceil_div(8, 2) -> 4
    """
    if b <= 0:
        raise ValueError(f"Divisor muss positiv sein, nicht {b}")
    return -(-a // b)


def resolve_seed(seed: int | str | None = None) -> int:
    """
    Wandelt einen Seed aus Flag/Umgebung in eine nichtnegative Ganzzahl um.

    Reihenfolge:
      1. expliziter Wert (int oder String)
      2. Umgebungsvariable KOSZUL_SEED
      3. DEFAULT_SEED

    Ganze Zahlen und Strings aus Ziffern werden modulo 2^64 genommen
    (-1 → 2^64 − 1, also verschieden von 1), alle anderen Strings
    (z.B. "fixed-doubled-toeplitz") werden per SHA-256 auf 64 Bit abgebildet.
    Damit liefert derselbe Text immer denselben Seed.
    """
    if seed is None:
        seed = os.environ.get(SEED_ENV_VAR, DEFAULT_SEED)

    if isinstance(seed, int):
        return seed % SEED_MODULUS

    text = str(seed).strip()
    if text.lstrip("-").isdigit():
        return int(text) % SEED_MODULUS

    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_rng(seed: int, index: int) -> np.random.Generator:
    """
    Zufallsgenerator für Versuch Nr. `index`, nur abhängig von (seed, index).

    Dadurch liefern sequentielle und parallele Läufe (joblib) exakt dieselben
    Zufallspunkte, egal in welcher Reihenfolge die Worker fertig werden.
    """
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def resolve_jobs(n_jobs: int | None = None) -> int:
    """Anzahl joblib-Worker: Argument, sonst KOSZUL_JOBS, sonst 1."""
    if n_jobs is not None:
        return n_jobs
    value = os.environ.get(JOBS_ENV_VAR, "").strip()
    return int(value) if value else 1

"""
main.py — Batch-Zertifizierung aller Standardprüfungen + Excel-Report
=====================================================================

ÜBERBLICK
---------
Einstiegspunkt für den kompletten Prüflauf. Alle Einträge aus BATCH_JOBS
werden nacheinander berechnet, mit dem erwarteten Wert verglichen und als
eine Zeile pro Prüfung in den Excel-Report geschrieben.

    Aufruf:   python -m src.main
              python -m src.cli batch --out report.xlsx
    Ausgabe:  certificate_report.xlsx (eine Zeile pro Prüfung)


PIPELINE PRO PRÜFUNG
--------------------
    ┌─────────────────────────────────────────────────────────────────┐
    │ 1. Job aus BATCH_JOBS lesen                                     │
    │    → {"job": "lowerbound", "ziel": "det3", "field": "Q", ...}   │
    ├─────────────────────────────────────────────────────────────────┤
    │ 2. Passende Rechnung ausführen                                  │
    │    lowerbound     → flattening.lower_bound                      │
    │    verify-koszul  → determinant_certificate.verify_semi_main    │
    │    structure      → determinant_certificate.structural_checks   │
    │    full-blowup    → flattening.full_blowup_check                │
    │    witness        → flattening.witness_search                   │
    │    verify-scaling → determinant_certificate.verify_scaling_laws │
    ├─────────────────────────────────────────────────────────────────┤
    │ 3. Ergebnis gegen "erwartet" prüfen → status                    │
    │    "verifiziert" / "falsifiziert" / "fehler"                    │
    ├─────────────────────────────────────────────────────────────────┤
    │ 4. Excel-Zeile aufbauen und an rows[] anhängen                  │
    └─────────────────────────────────────────────────────────────────┘

    Am Ende: pandas DataFrame → certificate_report.xlsx (+ optional CSV)


EXCEL-REPORT: SPALTEN
---------------------
    ┌────────────────┬──────────────────────────────────────────────────┐
    │ run_id         │ Laufende Nummer                                  │
    │ job / ziel     │ Art der Prüfung und Tensor bzw. m                │
    │ field          │ Körper-Tag ("Q", "GF:101")                       │
    │ ergebnis       │ Berechneter Wert (Schranke, Rang, k, …)          │
    │ erwartet       │ Sollwert aus BATCH_JOBS                          │
    │ status         │ verifiziert / falsifiziert / fehler              │
    │ all_ok         │ True/False                                       │
    │ fehlergrund    │ Fehlertext (oder "")                             │
    │ details        │ Vollständiges Ergebnis als JSON                  │
    └────────────────┴──────────────────────────────────────────────────┘


FEHLERBEHANDLUNG
----------------
    1. Einzelne Prüfungen:
       Eine Exception erzeugt eine Fehlerzeile (status "fehler"). Der
       Batch läuft WEITER.

    2. Excel-Schreibfehler:
       Ist die Zieldatei gesperrt (PermissionError), wird ein Fallback
       mit Zeitstempel geschrieben.

    3. Zusammenfassung:
       X verifiziert, Y falsifiziert, Z Fehler.
"""

from __future__ import annotations

import json
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import TextIO

import pandas as pd

from src.determinant_certificate import structural_checks, verify_scaling_laws, verify_semi_main
from src.exact_linalg import FieldSpec
from src.exterior import KoszulContext
from src.flattening import full_blowup_check, lower_bound, witness_search
from src.tensor_io import builtin
from src.utils import resolve_seed

logger = logging.getLogger(__name__)


# =============================================================================
# KONFIGURATION
# =============================================================================

BASE_DIR = Path(__file__).resolve().parent.parent
REPORT_NAME = "certificate_report.xlsx"

# Katalog der Standardprüfungen. "erwartet" ist der Sollwert für "ergebnis";
# bei Verifikationen ist es True (alle Teilprüfungen bestanden).
BATCH_JOBS: list[dict] = [
    {"job": "lowerbound", "ziel": "det3", "field": "Q", "erwartet": 5},
    {"job": "lowerbound", "ziel": "det3", "field": "GF:2", "erwartet": 4},
    {"job": "lowerbound", "ziel": "perm3", "field": "Q", "erwartet": 4},
    {"job": "lowerbound", "ziel": "toeplitz_sum:4", "field": "Q", "erwartet": 6},
    {"job": "lowerbound", "ziel": "toeplitz_sum:6", "field": "Q", "erwartet": 10},
    {"job": "structure", "ziel": 3, "field": "Q", "erwartet": True},
    {"job": "structure", "ziel": 5, "field": "Q", "erwartet": True},
    {"job": "verify-koszul", "ziel": 3, "field": "Q", "erwartet": True, "samples": 10},
    {"job": "verify-koszul", "ziel": 5, "field": "GF:101", "erwartet": True, "samples": 10},
    {"job": "full-blowup", "ziel": 3, "field": "Q", "erwartet": True},
    {"job": "full-blowup", "ziel": 5, "field": "GF:101", "erwartet": True},
    {"job": "witness", "ziel": 3, "field": "GF:101", "erwartet": True, "n": 3, "trials": 50},
    {"job": "verify-scaling", "ziel": 3, "field": "Q", "erwartet": True, "samples": 5},
]


# =============================================================================
# 1) EINZELNE PRÜFUNG
# =============================================================================

def run_job(job: dict, seed: int) -> tuple[object, dict]:
    """
    Führt einen Katalogeintrag aus.

    Rückgabe: (ergebnis, details); ergebnis wird mit job["erwartet"]
    verglichen, details landet als JSON im Report.
    """
    kind = job["job"]
    field = FieldSpec.from_tag(job["field"])

    if kind == "lowerbound":
        cert = lower_bound(builtin(job["ziel"], field), projections=job.get("projections", 0), seed=seed)
        return cert.lower_bound, cert.to_dict()

    ctx = KoszulContext.for_m(int(job["ziel"]))
    if kind == "structure":
        report = structural_checks(ctx)
        return report["all_ok"], report
    if kind == "verify-koszul":
        report = verify_semi_main(ctx, field, samples=job.get("samples", 10), seed=seed)
        return report["all_ok"], report
    if kind == "full-blowup":
        report = full_blowup_check(ctx, field)
        return report["invertible"], report
    if kind == "witness":
        result = witness_search(ctx, job["n"], job["trials"], seed=seed, field=field)
        details = {k: v for k, v in result.to_dict().items() if k not in ("coeffs", "ranks")}
        return result.exceeds_target, details
    if kind == "verify-scaling":
        report = verify_scaling_laws(ctx, field, samples=job.get("samples", 5), seed=seed)
        return report["all_ok"], report
    raise ValueError(f"Unbekannter Job-Typ {kind!r}")


def _row(run_id: int, job: dict) -> dict:
    return {
        "run_id": run_id,
        "job": job["job"],
        "ziel": str(job["ziel"]),
        "field": job["field"],
        "ergebnis": None,
        "erwartet": job["erwartet"],
        "status": None,
        "all_ok": False,
        "fehlergrund": "",
        "details": None,
    }


# =============================================================================
# 2) REPORT SCHREIBEN
# =============================================================================

def write_report(rows: list[dict], output_path: Path, csv_path: Path | None = None,
                 stream: TextIO | None = None) -> Path:
    """DataFrame → xlsx; bei gesperrter Datei Fallback mit Zeitstempel."""
    stream = stream or sys.stdout
    df = pd.DataFrame(rows)
    try:
        df.to_excel(output_path, index=False)
        written = output_path
    except PermissionError:
        ts = datetime.now().strftime("%Y%m%d_%H%M%S")
        written = output_path.with_name(f"{output_path.stem}_{ts}{output_path.suffix}")
        df.to_excel(written, index=False)
        print(f"WARNUNG: {output_path.name} ist gesperrt (in Excel geöffnet?).", file=stream)
        print(f"Report stattdessen geschrieben nach: {written}", file=stream)
    if csv_path is not None:
        df.to_csv(csv_path, index=False)
    return written


def summarize(rows: list[dict]) -> dict:
    counts = {"gesamt": len(rows), "verifiziert": 0, "falsifiziert": 0, "fehler": 0}
    for row in rows:
        counts[row["status"]] += 1
    return counts


# =============================================================================
# 3) BATCH
# =============================================================================

def run_batch(output_path: str | Path | None = None, jobs: list[dict] | None = None,
              seed: int | str | None = None, csv_path: str | Path | None = None,
              stream: TextIO | None = None) -> tuple[list[dict], Path]:
    """
    Alle Prüfungen ausführen und den Report schreiben.

    Fortschrittszeilen gehen nach `stream` (Standard: stdout); die CLI
    übergibt stderr, damit stdout nur den Bericht enthält.

    Rückgabe: (rows, tatsächlicher Pfad des Reports)
    """
    jobs = BATCH_JOBS if jobs is None else jobs
    stream = stream or sys.stdout
    seed_int = resolve_seed(seed)
    output_path = Path(output_path) if output_path else BASE_DIR / REPORT_NAME

    rows = []
    for run_id, job in enumerate(jobs, start=1):
        row = _row(run_id, job)
        print(f"[{run_id}/{len(jobs)}] {job['job']} {job['ziel']} über {job['field']}", file=stream)
        try:
            ergebnis, details = run_job(job, seed_int)
            ok = ergebnis == job["erwartet"]
            row.update(
                ergebnis=ergebnis,
                status="verifiziert" if ok else "falsifiziert",
                all_ok=ok,
                fehlergrund="" if ok else f"Ergebnis {ergebnis}, erwartet {job['erwartet']}",
                details=json.dumps(details, sort_keys=True, ensure_ascii=False),
            )
        except Exception as exc:
            # Ein Fehler darf den Batch nicht abbrechen; Zeile trotzdem schreiben.
            error_msg = f"VERARBEITUNGSFEHLER: {type(exc).__name__}: {exc}"
            logger.exception("Job %s fehlgeschlagen", job)
            print(f"  ⚠ {error_msg}", file=stream)
            row.update(status="fehler", fehlergrund=error_msg)
        rows.append(row)

    written = write_report(rows, output_path, Path(csv_path) if csv_path else None, stream)
    print(f"\nReport geschrieben nach: {written}", file=stream)
    return rows, written


def main() -> None:
    rows, _ = run_batch()
    counts = summarize(rows)

    print(f"\n{'='*50}")
    print(f"Batch abgeschlossen: {counts['gesamt']} Prüfungen")
    print(f"  ✓ {counts['verifiziert']} verifiziert")
    print(f"  ✗ {counts['falsifiziert']} falsifiziert")
    if counts["fehler"]:
        print(f"  ⚠ {counts['fehler']} Fehler (siehe fehlergrund)")
    print(f"{'='*50}")


if __name__ == "__main__":
    main()

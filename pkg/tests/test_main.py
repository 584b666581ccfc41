import io
from pathlib import Path

import pandas as pd

from src import main as batch

SMALL_JOBS = [
    {"job": "lowerbound", "ziel": "det3", "field": "Q", "erwartet": 5},
    {"job": "lowerbound", "ziel": "det3", "field": "Q", "erwartet": 4},
    {"job": "lowerbound", "ziel": "det4", "field": "Q", "erwartet": 5},
    {"job": "full-blowup", "ziel": 3, "field": "GF:101", "erwartet": True},
    {"job": "witness", "ziel": 3, "field": "GF:101", "erwartet": True, "n": 3, "trials": 10},
]


def test_run_batch_statuses(tmp_path):
    rows, written = batch.run_batch(tmp_path / "report.xlsx", jobs=SMALL_JOBS, seed=0,
                                    csv_path=tmp_path / "report.csv")
    assert written == tmp_path / "report.xlsx"
    assert [row["status"] for row in rows] == [
        "verifiziert", "falsifiziert", "fehler", "verifiziert", "verifiziert",
    ]
    assert rows[1]["fehlergrund"] == "Ergebnis 5, erwartet 4"
    assert rows[2]["fehlergrund"].startswith("VERARBEITUNGSFEHLER: ValueError")

    df = pd.read_excel(written)
    assert list(df.columns) == [
        "run_id", "job", "ziel", "field", "ergebnis", "erwartet",
        "status", "all_ok", "fehlergrund", "details",
    ]
    assert len(df) == len(SMALL_JOBS)
    assert (tmp_path / "report.csv").exists()


def test_unknown_job_type_is_an_error_row(tmp_path):
    rows, _ = batch.run_batch(tmp_path / "r.xlsx",
                              jobs=[{"job": "raten", "ziel": 3, "field": "Q", "erwartet": True}])
    assert rows[0]["status"] == "fehler"
    assert "raten" in rows[0]["fehlergrund"]


def test_summarize():
    rows = [{"status": s} for s in ("verifiziert", "verifiziert", "falsifiziert", "fehler")]
    assert batch.summarize(rows) == {"gesamt": 4, "verifiziert": 2, "falsifiziert": 1, "fehler": 1}


def test_write_report_falls_back_when_locked(tmp_path, monkeypatch, capsys):
    original = pd.DataFrame.to_excel
    calls: list[Path] = []

    def locked_once(self, path, *args, **kwargs):
        calls.append(Path(path))
        if len(calls) == 1:
            raise PermissionError("gesperrt")
        return original(self, path, *args, **kwargs)

    monkeypatch.setattr(pd.DataFrame, "to_excel", locked_once)
    target = tmp_path / "report.xlsx"
    written = batch.write_report([{"run_id": 1, "status": "verifiziert"}], target)

    assert written != target
    assert written.name.startswith("report_") and written.suffix == ".xlsx"
    assert written.exists() and not target.exists()
    assert "gesperrt" in capsys.readouterr().out


def test_progress_goes_to_given_stream(tmp_path, capsys):
    stream = io.StringIO()
    batch.run_batch(tmp_path / "r.xlsx", jobs=SMALL_JOBS[:1], stream=stream)
    assert "[1/1] lowerbound det3 über Q" in stream.getvalue()
    assert capsys.readouterr().out == ""

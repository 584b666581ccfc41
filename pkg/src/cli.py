"""
cli.py — Kommandozeile für Flattening-Schranken und Koszul-Zertifikate
======================================================================

    python -m src.cli lowerbound --builtin det3 --field Q
    python -m src.cli lowerbound tensoren/t.tns --projections 5 --seed 7
    python -m src.cli verify-koszul --m 5 --field GF:101 --samples 10
    python -m src.cli witness --m 3 --n 4 --trials 1 --seed fixed-doubled-toeplitz
    python -m src.cli builtin toeplitz_sum:6 -o t6.tns
    python -m src.cli verify-scaling --m 5 --field GF:101
    python -m src.cli batch --out report.xlsx

Ausgabe: Textbericht auf stdout, mit --json zusätzlich ein JSON-Block mit
stabilen Schlüsseln. Log-Meldungen gehen nach stderr (-v / -vv).

Exit-Codes:
    0  berechnet / verifiziert
    1  eine Eigenschaft wurde falsifiziert
    2  Bedienungs- oder Eingabefehler
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from src import main as batch
from src.determinant_certificate import (
    elusive_certificate,
    structural_checks,
    verify_scaling_laws,
    verify_semi_main,
)
from src.exact_linalg import QQ, CertificateError, FieldSpec
from src.exterior import KoszulContext
from src.flattening import FIRST_TRIAL_HOOKS, lower_bound, witness_search
from src.tensor_io import builtin, load, serialize
from src.utils import resolve_seed

logger = logging.getLogger(__name__)


# =============================================================================
# KONFIGURATION
# =============================================================================

EXIT_OK = 0
EXIT_FALSIFIED = 1
EXIT_USAGE = 2

DEFAULT_SAMPLES = 10
DEFAULT_TRIALS = 50

# Zulässige m für verify-koszul (m = 9 braucht Sekunden, m = 11 Minuten).
KOSZUL_M_RANGE = (3, 11)

# Präfix im --seed, das den ersten Witness-Versuch fest vorbelegt.
FIXED_SEED_PREFIX = "fixed-"


@dataclass
class CliReport:
    """Ergebnis eines Kommandos: Eingaben, Nutzdaten, Exit-Code, Textzeilen."""

    command: str
    inputs: dict
    payload: dict
    status: int = EXIT_OK
    lines: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"command": self.command, "inputs": self.inputs, "payload": self.payload, "status": self.status}

    def render(self, as_json: bool = False) -> str:
        text = "\n".join(self.lines)
        if as_json:
            text += "\n" + json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False)
        return text


def _status_word(ok: bool) -> str:
    return "verifiziert" if ok else "FALSIFIZIERT"


# =============================================================================
# KOMMANDOS
# =============================================================================

def cmd_lowerbound(args: argparse.Namespace) -> CliReport:
    if bool(args.tensor) == bool(args.builtin):
        raise ValueError("Genau eines von TENSOR-Datei oder --builtin angeben")
    if args.builtin:
        T = builtin(args.builtin, args.field or QQ)
        source = args.builtin
    else:
        T = load(args.tensor)
        if args.field is not None and args.field != T.field:
            raise ValueError(f"Dokument ist über {T.field}, --field verlangt {args.field}")
        source = str(args.tensor)

    cert = lower_bound(T, projections=args.projections, seed=args.seed, label=source)
    lines = [
        f"Tensor:          {source} ({T.dims[0]}x{T.dims[1]}x{T.dims[2]}, {T.nnz} Einträge)",
        f"Körper:          {T.field}",
        f"m, p:            {cert.m}, {cert.p}",
        f"Flattening-Rang: {cert.flattening_rank}",
        f"rk(X_L):         {cert.subspace_rank}",
        f"Schranke:        brk >= {cert.lower_bound}",
    ]
    if cert.projection:
        lines.append(f"Projektion:      {cert.projection}")
    return CliReport(
        command="lowerbound",
        inputs={"tensor": source, "field": T.field.tag, "projections": args.projections,
                "seed": resolve_seed(args.seed)},
        payload=cert.to_dict(),
        lines=lines,
    )


def _koszul_context(m: int, allowed: tuple[int, int] | None = None) -> KoszulContext:
    if m % 2 == 0:
        raise ValueError(f"m = {m} ist gerade, erwartet ungerades m")
    if allowed and not allowed[0] <= m <= allowed[1]:
        raise ValueError(f"m = {m} außerhalb von {allowed[0]}..{allowed[1]}")
    if m < 1:
        raise ValueError(f"m = {m} ist ungültig")
    return KoszulContext.for_m(m)


def cmd_verify_koszul(args: argparse.Namespace) -> CliReport:
    ctx = _koszul_context(args.m, KOSZUL_M_RANGE)
    fld = args.field or QQ
    cert = elusive_certificate(ctx)
    structure = structural_checks(ctx)
    report = verify_semi_main(ctx, fld, samples=args.samples, seed=args.seed, n_jobs=args.jobs)
    ok = report["all_ok"] and structure["all_ok"]

    lines = [
        f"m = {ctx.m}, p = {ctx.p}, Körper {fld}",
        f"Permutation:     {len(cert.sigma)} Punkte, sgn(σ) = {cert.permutation_sign:+d}",
        f"Vorzeichen:      ∏ = {cert.sign_product:+d}",
        f"k:               {cert.k:+d}",
        f"det A(1,…,1):    {report['det_at_ones']}",
        f"Struktur:        {_status_word(structure['all_ok'])}",
    ]
    for sample in report["samples"]:
        mark = "✓" if sample["ok"] else "✗"
        lines.append(f"  {mark} t = ({', '.join(sample['t'])}): det = {sample['determinant']}")
    lines.append(f"Ergebnis:        {_status_word(ok)}")
    return CliReport(
        command="verify-koszul",
        inputs={"m": ctx.m, "field": fld.tag, "samples": args.samples, "seed": resolve_seed(args.seed)},
        payload={"certificate": cert.to_dict(), "structure": structure, "verification": report, "all_ok": ok},
        status=EXIT_OK if ok else EXIT_FALSIFIED,
        lines=lines,
    )


def _split_seed(seed: str | None) -> tuple[str | None, str | None]:
    """'fixed-<hook>' → (seed, hook); sonst (seed, None)."""
    if seed and seed.startswith(FIXED_SEED_PREFIX):
        hook = seed[len(FIXED_SEED_PREFIX):]
        if hook not in FIRST_TRIAL_HOOKS:
            raise ValueError(f"Unbekannte Vorbelegung {hook!r} (erlaubt: {', '.join(FIRST_TRIAL_HOOKS)})")
        return seed, hook
    return seed, None


def cmd_witness(args: argparse.Namespace) -> CliReport:
    ctx = _koszul_context(args.m)
    fld = args.field or QQ
    seed, hook = _split_seed(args.seed)
    result = witness_search(ctx, args.n, args.trials, seed=seed, field=fld, first_trial=hook, n_jobs=args.jobs)

    lines = [
        f"m = {ctx.m}, n = {args.n}, Körper {fld}, {args.trials} Versuche",
        f"Bester Rang:     {result.best_rank} von {result.full_size} (Versuch {result.best_trial})",
        f"Ziel C(2p,p)(2m-4): {result.target}, {'überschritten' if result.exceeds_target else 'nicht überschritten'}",
        f"Minorgröße N:    {result.minor_order}, {'erreicht' if result.nontrivial_minor else 'nicht erreicht'}",
    ]
    if args.out:
        path = Path(args.out)
        path.write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        lines.append(f"Koeffizienten:   {path}")
    return CliReport(
        command="witness",
        inputs={"m": ctx.m, "n": args.n, "trials": args.trials, "field": fld.tag,
                "seed": resolve_seed(seed), "first_trial": hook},
        payload={k: v for k, v in result.to_dict().items() if k != "coeffs"},
        lines=lines,
    )


def cmd_builtin(args: argparse.Namespace) -> CliReport:
    T = builtin(args.name, args.field or QQ)
    document = serialize(T)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
        lines = [f"{args.name}: {T.nnz} Einträge → {args.out}"]
    else:
        lines = [document.rstrip("\n")]
    return CliReport(
        command="builtin",
        inputs={"name": args.name, "field": T.field.tag, "out": args.out},
        payload={"dims": list(T.dims), "entries": T.nnz},
        lines=lines,
    )


def cmd_verify_scaling(args: argparse.Namespace) -> CliReport:
    ctx = _koszul_context(args.m)
    fld = args.field or QQ
    report = verify_scaling_laws(ctx, fld, samples=args.samples, seed=args.seed)
    lines = [f"m = {ctx.m}, Körper {fld}, {args.samples} Zufallspunkte"]
    for name, ok in report["checks"].items():
        lines.append(f"  {'✓' if ok else '✗'} {name}")
    lines.append(f"Ergebnis:        {_status_word(report['all_ok'])}")
    return CliReport(
        command="verify-scaling",
        inputs={"m": ctx.m, "field": fld.tag, "samples": args.samples, "seed": resolve_seed(args.seed)},
        payload=report,
        status=EXIT_OK if report["all_ok"] else EXIT_FALSIFIED,
        lines=lines,
    )


def cmd_batch(args: argparse.Namespace) -> CliReport:
    rows, path = batch.run_batch(output_path=args.out, seed=args.seed, csv_path=args.csv, stream=sys.stderr)
    counts = batch.summarize(rows)
    lines = [
        f"Report: {path}",
        f"  ✓ {counts['verifiziert']} verifiziert",
        f"  ✗ {counts['falsifiziert']} falsifiziert",
        f"  ⚠ {counts['fehler']} Fehler",
    ]
    return CliReport(
        command="batch",
        inputs={"out": str(args.out) if args.out else None, "seed": resolve_seed(args.seed)},
        payload=counts,
        status=EXIT_OK if counts["falsifiziert"] == 0 and counts["fehler"] == 0 else EXIT_FALSIFIED,
        lines=lines,
    )


# =============================================================================
# ARGUMENTE
# =============================================================================

def _field_arg(text: str) -> FieldSpec:
    try:
        return FieldSpec.from_tag(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="JSON-Block mit stabilen Schlüsseln anhängen.")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v INFO, -vv DEBUG.")
    common.add_argument("--seed", default=None, help="Seed (Zahl oder Text); sonst KOSZUL_SEED.")

    parser = argparse.ArgumentParser(
        prog="koszul",
        description="Border-Rang-Schranken über Koszul-Flattenings und Zertifikate für det A(t).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lowerbound", parents=[common], help="Untere Schranke für einen kubischen Tensor.")
    p.add_argument("tensor", nargs="?", help="Tensordokument (.tns).")
    p.add_argument("--builtin", help="Eingebauter Tensor: det3, perm3, unit:d, toeplitz_sum:d.")
    p.add_argument("--field", type=_field_arg, default=None, help="Q oder GF:p (Standard: Q).")
    p.add_argument("--projections", type=int, default=0, help="Zusätzliche Zufallsprojektionen (d gerade).")
    p.set_defaults(func=cmd_lowerbound)

    p = sub.add_parser("verify-koszul", parents=[common], help="Elusive-Zertifikat und det A(t) prüfen.")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--field", type=_field_arg, default=None)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--jobs", type=int, default=None, help="joblib-Worker (sonst KOSZUL_JOBS).")
    p.set_defaults(func=cmd_verify_koszul)

    p = sub.add_parser("witness", parents=[common], help="Zufallssuche nach hohem Rang in X_L^{n}.")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--field", type=_field_arg, default=None)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("-o", "--out", default=None, help="Koeffizienten als JSON speichern.")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("builtin", parents=[common], help="Eingebauten Tensor als Dokument ausgeben.")
    p.add_argument("name")
    p.add_argument("--field", type=_field_arg, default=None)
    p.add_argument("-o", "--out", default=None)
    p.set_defaults(func=cmd_builtin)

    p = sub.add_parser("verify-scaling", parents=[common], help="Skalierungsgesetze prüfen.")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--field", type=_field_arg, default=None)
    p.add_argument("--samples", type=int, default=5)
    p.set_defaults(func=cmd_verify_scaling)

    p = sub.add_parser("batch", parents=[common], help="Alle Standardprüfungen, Excel-Report.")
    p.add_argument("--out", default=None, help=f"Excel-Datei (Standard: {batch.REPORT_NAME}).")
    p.add_argument("--csv", default=None, help="Zusätzlich als CSV schreiben.")
    p.set_defaults(func=cmd_batch)

    return parser


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)

    try:
        report = args.func(args)
    except CertificateError as exc:
        print(f"FALSIFIZIERT: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except (ValueError, OSError) as exc:
        print(f"Fehler: {exc}", file=sys.stderr)
        return EXIT_USAGE

    print(report.render(args.json))
    return report.status


if __name__ == "__main__":
    sys.exit(main())

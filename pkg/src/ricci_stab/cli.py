"""Command-line front end.

Exit codes: 0 success (any verdict), 1 validation failure, 2 I/O or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np

from . import construct
from .algebra import (
    AlgebraError,
    MetricLieAlgebra,
    ParseError,
    algebra_document,
    jacobi_worst,
    load_algebra,
    structure_report,
)
from .curvature import curvature
from .soliton import (
    StabilityCertificate,
    detect_soliton,
    einstein_certificate,
    extension_heuristic_certificate,
    q_certificate,
    sectional_certificate,
    stability_certificate,
    two_step_certificate,
    verdict,
)
from .symtensor import max_eigenvalue, q_operator, rho_operator

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
CRITERIA = ("q", "einstein", "sectional", "two-step", "ext-heuristic")


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _fmt3(x: float) -> str:
    return f"{x:.3f}"


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}", EXIT_IO) from None


def resolve_source(source: str) -> MetricLieAlgebra:
    """``catalog:<ref>`` or a path to an algebra document."""
    if source.startswith("catalog:"):
        try:
            return construct.catalog(source[len("catalog:"):])
        except AlgebraError as exc:
            raise CliError(str(exc), EXIT_INVALID) from None
    doc = _read_json(source)
    try:
        return load_algebra(doc)
    except ParseError as exc:
        raise CliError(f"{source}: {exc}", EXIT_IO) from None
    except AlgebraError as exc:
        raise CliError(f"{source}: {exc}", EXIT_INVALID) from None


def _emit(obj: Any, out: str | None = None) -> None:
    text = json.dumps(obj, indent=2, allow_nan=False)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _structure_line(alg: MetricLieAlgebra) -> str:
    rep = structure_report(alg)
    if rep.is_nilpotent:
        kind = f"nilpotent, step {rep.step}"
    elif rep.is_solvable:
        kind = "solvable, not nilpotent"
    else:
        kind = "not solvable"
    uni = "unimodular" if rep.is_unimodular else "not unimodular"
    return f"{kind}; dim [g,g] = {rep.derived_dim}; {uni}"


# -- validate -----------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    doc = _read_json(args.path)
    try:
        alg = load_algebra(doc)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_IO
    except AlgebraError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    defect, _ = jacobi_worst(alg)
    print(f"dim {alg.n}")
    print(f"jacobi defect {defect:.3g}")
    print(_structure_line(alg))
    return EXIT_OK


# -- stability -----------------------------------------------------------------------


def certificates_for(alg: MetricLieAlgebra, criterion: str) -> tuple[dict[str, Any], list[StabilityCertificate]]:
    report = detect_soliton(alg)
    names = CRITERIA if criterion == "all" else (criterion,)
    certs: list[StabilityCertificate] = []
    for name in names:
        if not report.is_soliton:
            certs.append(StabilityCertificate(name, math.nan, math.nan, "not_applicable", {"reason": "not an algebraic soliton"}))
            continue
        try:
            if name == "q":
                certs.append(q_certificate(alg, report))
            elif name == "einstein":
                certs.append(einstein_certificate(alg, report))
            elif name == "sectional":
                certs.append(sectional_certificate(alg, report))
            elif name == "two-step":
                certs.append(two_step_certificate(alg, report))
            elif name == "ext-heuristic":
                if not structure_report(alg).is_nilpotent:
                    raise AlgebraError("extension heuristic applies to nilpotent algebras")
                certs.append(extension_heuristic_certificate(report))
        except AlgebraError as exc:
            certs.append(StabilityCertificate(name, math.nan, math.nan, "not_applicable", {"reason": str(exc)}))
    return report.to_json(), certs


def cmd_stability(args: argparse.Namespace) -> int:
    alg = resolve_source(args.source)
    soliton, certs = certificates_for(alg, args.criterion)
    _emit({"algebra": alg.label, "dim": alg.n, "soliton": soliton, "certificates": [c.to_json() for c in certs]})
    return EXIT_OK


# -- extend ------------------------------------------------------------------------------


def _read_maps(path: str) -> list[np.ndarray]:
    doc = _read_json(path)
    maps = doc.get("maps") if isinstance(doc, dict) else doc
    try:
        mats = [np.array(m, dtype=float) for m in maps]
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: malformed derivation list: {exc}", EXIT_IO) from None
    if not mats or any(m.ndim != 2 for m in mats):
        raise CliError(f"{path}: expected {{'maps': [n×n matrices]}}", EXIT_IO)
    return mats


def cmd_extend(args: argparse.Namespace) -> int:
    base = resolve_source(args.source)
    try:
        if args.einstein:
            ext = construct.einstein_rank_one_extension(base)
        else:
            spec = construct.ExtensionSpec.build(base, _read_maps(args.derivations))
            ext = construct.lauret_extension(spec)
        cert = stability_certificate(ext)
    except AlgebraError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    doc = algebra_document(ext)
    out: dict[str, Any] = {"dim": ext.n, "soliton": detect_soliton(ext).to_json(), "certificate": cert.to_json()}
    if args.out:
        _emit(doc, args.out)
        out["document"] = args.out
    else:
        out["document"] = doc
    _emit(out)
    return EXIT_OK


# -- sweep -----------------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    t: float
    max_eig: float
    threshold: float
    verdict: str


def _lauret_point(t: float) -> SweepPoint:
    base = construct.lauret_curve(t)
    ext = construct.einstein_rank_one_extension(base)
    rep = detect_soliton(ext)
    lhs = max_eigenvalue(rho_operator(curvature(ext)))
    return SweepPoint(t, lhs, -rep.lam, verdict(lhs, -rep.lam))


def _nil3_family_point(t: float) -> SweepPoint:
    alg = construct.nil3_family(t)
    rep = detect_soliton(alg)
    lhs = max_eigenvalue(q_operator(curvature(alg)))
    return SweepPoint(t, lhs, 0.5 * rep.trace_D, verdict(lhs, 0.5 * rep.trace_D))


def _diagonal_abelian_point(item: tuple[float, list]) -> SweepPoint:
    t, A = item
    alg = construct.diagonal_abelian_solvsoliton(np.array(A, dtype=float))
    rep = detect_soliton(alg)
    cert = stability_certificate(alg, rep)
    return SweepPoint(t, cert.lhs, cert.rhs, cert.verdict)


SWEEPS: dict[str, tuple[Callable[[Any], SweepPoint], tuple[float, float]]] = {
    "lauret_curve": (_lauret_point, construct.LAURET_RANGE),
    "nil3_family": (_nil3_family_point, construct.NIL3_FAMILY_RANGE),
}


def parse_range(text: str) -> np.ndarray:
    try:
        a, b, steps = text.split(":")
        a_f, b_f, n = float(a), float(b), int(steps)
    except ValueError:
        raise CliError(f"--range must be a:b:steps, got {text!r}", EXIT_IO) from None
    if n < 1:
        raise CliError("--range needs steps >= 1", EXIT_IO)
    if n == 1:
        return np.array([a_f])
    if not b_f > a_f:
        raise CliError("--range needs b > a when steps > 1", EXIT_IO)
    return np.linspace(a_f, b_f, n)


def run_sweep(family: str, grid: Sequence[Any], jobs: int = 1) -> list[SweepPoint]:
    fn = _diagonal_abelian_point if family == "diagonal_abelian" else SWEEPS[family][0]
    if jobs > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, grid))
    return [fn(x) for x in grid]


def sweep_csv(points: Sequence[SweepPoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "max_eig", "threshold", "verdict", "max_eig_3dp", "threshold_3dp"])
    for p in points:
        w.writerow([_fmt(p.t), _fmt(p.max_eig), _fmt(p.threshold), p.verdict, _fmt3(p.max_eig), _fmt3(p.threshold)])
    return buf.getvalue()


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.family == "diagonal_abelian":
        if not args.matrices:
            raise CliError("diagonal_abelian sweep needs --matrices", EXIT_IO)
        doc = _read_json(args.matrices)
        mats = doc.get("matrices") if isinstance(doc, dict) else doc
        if not isinstance(mats, list) or not mats:
            raise CliError(f"{args.matrices}: expected {{'matrices': [n×m matrices]}}", EXIT_IO)
        grid: list[Any] = [(float(i), m) for i, m in enumerate(mats)]
    else:
        if args.range is None:
            raise CliError(f"{args.family} sweep needs --range a:b:steps", EXIT_IO)
        lo, hi = SWEEPS[args.family][1]
        grid = [float(t) for t in parse_range(args.range)]
        bad = [t for t in grid if not lo < t < hi]
        if bad:
            raise CliError(f"{args.family}: t={bad[0]:g} outside ({lo:.6g}, {hi:.6g})", EXIT_INVALID)
    try:
        points = run_sweep(args.family, grid, args.jobs)
    except AlgebraError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    text = sweep_csv(points)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- report ------------------------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    label: str
    dim: int
    step: int
    lam: float
    trace_D: float
    max_Q: float
    q_verdict: str
    ext_dim: int
    ext_max_rho: float
    ext_verdict: str


@dataclass(frozen=True)
class TableCell:
    """A printed table row: (table, dim, number) and its numeric columns."""

    where: str
    dim: int
    step: int
    lam: float
    trace_D: float
    max_Q: float
    ext_dim: int
    ext_max_rho: float


# catalog reference -> printed row with the same invariants
REPORT_ROWS: list[tuple[str, TableCell]] = [
    ("abelian(1)", TableCell("T1 (1,#1)", 1, 1, -1, 1, 0, 2, 1)),
    ("abelian(2)", TableCell("T1 (2,#1)", 2, 1, -1, 2, 0, 3, 0.5)),
    ("nil3", TableCell("T1 (3,#1)", 3, 2, -1.5, 4, 0.569, 4, 1)),
    ("abelian(3)", TableCell("T1 (3,#2)", 3, 1, -1, 3, 0, 4, 0.333)),
    ("h3_plus_r(1)", TableCell("T1 (4,#2)", 4, 2, -1.5, 5.5, 0.569, 5, 0.932)),
    ("abelian(4)", TableCell("T1 (4,#3)", 4, 1, -1, 4, 0, 5, 0.25)),
    ("heis(1,4)", TableCell("T1 (5,#4)", 5, 2, -2, 9, 1.106, 6, 1)),
    ("h3_plus_r(2)", TableCell("T1 (5,#7)", 5, 2, -1.5, 7, 0.569, 6, 0.893)),
    ("abelian(5)", TableCell("T1 (5,#9)", 5, 1, -1, 5, 0, 6, 0.2)),
    ("mu11_diagonalized", TableCell("T2 (6,#11)", 6, 4, -1.44, 7.29, 0.732, 7, 1.166)),
    ("free2(3)", TableCell("T2 (6,#24)", 6, 2, -2.5, 13.5, 0.581, 7, 1.071)),
    ("heis(2,4)", TableCell("T2 (6,#28)", 6, 2, -3, 16, 1.137, 7, 1.75)),
    ("h3_plus_h3", TableCell("T2 (6,#30)", 6, 2, -1.5, 8, 0.569, 7, 0.875)),
    ("heis_plus_r(1,4)", TableCell("T2 (6,#32)", 6, 2, -2, 11, 1.106, 7, 0.955)),
    ("h3_plus_r(3)", TableCell("T2 (6,#33)", 6, 2, -1.5, 8.5, 0.569, 7, 0.868)),
    ("abelian(6)", TableCell("T2 (6,#34)", 6, 1, -1, 6, 0, 7, 0.167)),
]


def report_row(ref: str) -> ReportRow:
    alg = construct.catalog(ref)
    rep = detect_soliton(alg)
    qc = q_certificate(alg, rep)
    ext = construct.einstein_rank_one_extension(alg)
    ec = einstein_certificate(ext)
    return ReportRow(
        label=ref,
        dim=alg.n,
        step=structure_report(alg).step or 0,
        lam=rep.lam,
        trace_D=rep.trace_D,
        max_Q=qc.lhs,
        q_verdict=qc.verdict,
        ext_dim=ext.n,
        ext_max_rho=ec.lhs,
        ext_verdict=ec.verdict,
    )


def build_report() -> list[tuple[ReportRow, TableCell, float]]:
    out = []
    for ref, cell in REPORT_ROWS:
        row = report_row(ref)
        out.append((row, cell, max_deviation(row, cell)))
    return out


def max_deviation(row: ReportRow, cell: TableCell) -> float:
    """Largest absolute deviation between computed values and the 3-decimal printed cells."""
    pairs = [(row.lam, cell.lam), (row.trace_D, cell.trace_D), (row.max_Q, cell.max_Q), (row.ext_max_rho, cell.ext_max_rho)]
    return max(abs(a - b) for a, b in pairs)


REPORT_HEADER = [
    "label", "dim", "step", "lambda", "trace_D", "max_Q", "q_verdict", "ext_dim", "ext_max_rho", "ext_verdict",
    "lambda_3dp", "trace_D_3dp", "max_Q_3dp", "ext_max_rho_3dp", "table_cell", "max_abs_deviation",
]


def report_csv(rows: Sequence[tuple[ReportRow, TableCell, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r, cell, dev in rows:
        w.writerow([
            r.label, r.dim, r.step, _fmt(r.lam), _fmt(r.trace_D), _fmt(r.max_Q), r.q_verdict, r.ext_dim, _fmt(r.ext_max_rho),
            r.ext_verdict, _fmt3(r.lam), _fmt3(r.trace_D), _fmt3(r.max_Q), _fmt3(r.ext_max_rho), cell.where, f"{dev:.2e}",
        ])
    return buf.getvalue()


def report_table(rows: Sequence[tuple[ReportRow, TableCell, float]]) -> str:
    mark = {"strict": "ok", "weak": "(weak)", "inconclusive": "??", "not_applicable": "n/a"}
    head = f"{'entry':<20}{'dim':>4}{'step':>5}{'lambda':>8}{'trD':>8}{'maxQ':>8}{'':>8}{'ext':>4}{'maxR':>8}{'':>8}  {'cell':<12}{'dev':>9}"
    lines = [head, "-" * len(head)]
    for r, cell, dev in rows:
        lines.append(
            f"{r.label:<20}{r.dim:>4}{r.step:>5}{r.lam:>8.3f}{r.trace_D:>8.3f}{r.max_Q:>8.3f}{mark[r.q_verdict]:>8}"
            f"{r.ext_dim:>4}{r.ext_max_rho:>8.3f}{mark[r.ext_verdict]:>8}  {cell.where:<12}{dev:>9.1e}"
        )
    return "\n".join(lines)


def cmd_report(args: argparse.Namespace) -> int:
    rows = build_report()
    if args.tables or not args.csv:
        print(report_table(rows))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(report_csv(rows))
    return EXIT_OK


# -- catalog -------------------------------------------------------------------------------------


def cmd_catalog(args: argparse.Namespace) -> int:
    if args.action == "list":
        for name, desc in construct.catalog_names():
            print(f"{name:<20}{desc}")
        return EXIT_OK
    if not args.name:
        raise CliError("catalog emit needs a NAME", EXIT_IO)
    params = []
    for p in args.param or []:
        key, _, value = p.partition("=")
        params.append(value if _ else key)
    try:
        alg = construct.catalog(args.name, *params) if params else construct.catalog(args.name)
    except AlgebraError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    _emit(algebra_document(alg), args.out)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ricci-stab", description="Linear stability checks for algebraic Ricci solitons.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an algebra document")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stability", help="soliton data and stability certificates")
    p.add_argument("source", help="catalog:<ref> or algebra document path")
    p.add_argument("--criterion", choices=CRITERIA + ("all",), default="all")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("extend", help="solvsoliton extension of a nilsoliton")
    p.add_argument("source")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--einstein", action="store_true", help="rank-one Einstein extension")
    g.add_argument("--derivations", metavar="PATH", help='JSON {"maps": [...]} of commuting symmetric derivations')
    p.add_argument("--out", help="write the extension document here")
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    p.add_argument("family", choices=sorted(SWEEPS) + ["diagonal_abelian"])
    p.add_argument("--range", help="a:b:steps (inclusive grid)")
    p.add_argument("--matrices", help='JSON {"matrices": [...]} for diagonal_abelian')
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="reproduce the stability tables")
    p.add_argument("--tables", action="store_true", help="print the formatted table")
    p.add_argument("--csv", help="write CSV here")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("catalog", help="list or emit catalog algebras")
    p.add_argument("action", choices=["list", "emit"])
    p.add_argument("name", nargs="?")
    p.add_argument("--param", action="append", help="t=0.5 (repeatable, in order)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_catalog)
    return ap


def _join_range(argv: list[str]) -> list[str]:
    # "--range -0.7:0.7:29" would otherwise be read as an unknown option
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--range":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--range={nxt}")
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(_join_range(argv))
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

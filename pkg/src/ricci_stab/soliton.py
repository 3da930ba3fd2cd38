"""Algebraic soliton detection and linear-stability certificates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .algebra import AlgebraError, MetricLieAlgebra, derivation_defect, derivation_operator
from .curvature import curvature, sectional_scan, two_step_split
from .eigen import symmetric_eigvals
from .symtensor import max_eigenvalue, q_operator, rho_operator
from .tolerances import TOL_SOLITON_REL, tol_verdict

# absolute floor so that flat and tiny-curvature inputs are not judged at zero tolerance
_TOL_FLOOR = 1e-14
# sectional values below this (relative) count as zero
_SEC_REL = 1e-12

VERDICTS = ("strict", "weak", "inconclusive", "not_applicable")


class SolitonError(AlgebraError):
    """A soliton-only operation was given a non-soliton, or a target is unreachable."""


@dataclass(frozen=True, eq=False)
class SolitonReport:
    """``Ric = lam * id + D`` in the orthonormal frame of ``algebra``."""

    lam: float
    D: np.ndarray
    defect: float
    is_soliton: bool
    is_einstein: bool
    trace_D: float
    ric: np.ndarray
    tol_soliton: float
    algebra: MetricLieAlgebra = field(repr=False)

    def to_json(self) -> dict[str, Any]:
        return {
            "lambda": self.lam,
            "trace_D": self.trace_D,
            "D": self.D.tolist(),
            "defect": self.defect,
            "is_soliton": self.is_soliton,
            "is_einstein": self.is_einstein,
        }


@dataclass(frozen=True)
class StabilityCertificate:
    criterion: str
    lhs: float
    rhs: float
    verdict: str
    notes: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {"criterion": self.criterion, "lhs": _finite(self.lhs), "rhs": _finite(self.rhs), "verdict": self.verdict, "notes": self.notes}


def _finite(x: float) -> float | None:
    return x if math.isfinite(x) else None


def verdict(lhs: float, rhs: float) -> str:
    """Compare a certified quantity against its threshold with the verdict band."""
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return "not_applicable"
    tol = tol_verdict(lhs, rhs)
    if lhs < rhs - tol:
        return "strict"
    if abs(lhs - rhs) <= tol:
        return "weak"
    return "inconclusive"


def _combine(verdicts: list[str]) -> str:
    for v in ("not_applicable", "inconclusive", "weak"):
        if v in verdicts:
            return v
    return "strict"


# -- detection ------------------------------------------------------------------


def detect_soliton(alg: MetricLieAlgebra, abelian_lambda: float = -1.0) -> SolitonReport:
    """Best ``lam`` (least squares over the derivation defect of ``Ric - lam id``)."""
    on = alg.orthonormalized()
    n = on.n
    ric = np.array(curvature(on).ric)
    eye = np.eye(n)
    if n >= 2:
        L = derivation_operator(on)
        l_ric = L @ ric.ravel()
        l_id = L @ eye.ravel()  # equals -mu
        denom = float(l_id @ l_id)
    else:
        denom = 0.0
    lam = float(l_ric @ l_id) / denom if denom > 0.0 else float(abelian_lambda)
    D = ric - lam * eye
    defect = derivation_defect(on, D)
    ric_norm = float(np.linalg.norm(ric))
    tol = TOL_SOLITON_REL * ric_norm + _TOL_FLOOR
    D.setflags(write=False)
    ric.setflags(write=False)
    return SolitonReport(
        lam=lam,
        D=D,
        defect=defect,
        is_soliton=defect <= tol,
        is_einstein=float(np.linalg.norm(D)) <= tol,
        trace_D=float(np.trace(D)),
        ric=ric,
        tol_soliton=tol,
        algebra=on,
    )


def _report_for(alg: MetricLieAlgebra, report: SolitonReport | None) -> SolitonReport:
    report = detect_soliton(alg) if report is None else report
    if not report.is_soliton:
        raise SolitonError(f"not an algebraic soliton (derivation defect {report.defect:.3g})")
    return report


def _not_applicable(criterion: str, reason: str, **notes: Any) -> StabilityCertificate:
    return StabilityCertificate(criterion, float("nan"), float("nan"), "not_applicable", {"reason": reason, **notes})


# -- certificates ---------------------------------------------------------------


def einstein_certificate(alg: MetricLieAlgebra, report: SolitonReport | None = None) -> StabilityCertificate:
    """``max R̊ < -lam`` for an Einstein metric."""
    report = _report_for(alg, report)
    if not report.is_einstein:
        return _not_applicable("einstein", "metric is not Einstein")
    lhs = max_eigenvalue(rho_operator(curvature(alg)))
    rhs = -report.lam
    return StabilityCertificate("einstein", lhs, rhs, verdict(lhs, rhs), {"max_rho": lhs, "lambda": report.lam})


def q_certificate(alg: MetricLieAlgebra, report: SolitonReport | None = None) -> StabilityCertificate:
    """``max Q < ½ tr D``, with ``R̊`` against ``¼ tr D`` reported alongside."""
    report = _report_for(alg, report)
    pkg = curvature(alg)
    lhs = max_eigenvalue(q_operator(pkg))
    rhs = 0.5 * report.trace_D
    max_rho = max_eigenvalue(rho_operator(pkg))
    notes = {
        "max_Q": lhs,
        "trace_D": report.trace_D,
        "rho_vs_quarter_trace": {"lhs": max_rho, "rhs": 0.25 * report.trace_D, "verdict": verdict(max_rho, 0.25 * report.trace_D)},
    }
    return StabilityCertificate("q", lhs, rhs, verdict(lhs, rhs), notes)


def stability_certificate(alg: MetricLieAlgebra, report: SolitonReport | None = None) -> StabilityCertificate:
    """Einstein criterion for Einstein metrics, the Q criterion otherwise."""
    report = _report_for(alg, report)
    if report.is_einstein:
        return einstein_certificate(alg, report)
    return q_certificate(alg, report)


def sectional_certificate(alg: MetricLieAlgebra, report: SolitonReport | None = None) -> StabilityCertificate:
    """``sec <= K <= 0`` and ``(n-2) K < ½ tr D``, with ``K`` the top Λ² eigenvalue."""
    report = _report_for(alg, report)
    scan = sectional_scan(alg)
    n = alg.n
    scale = max(float(np.abs(curvature(alg).riem).max(initial=0.0)), _TOL_FLOOR)
    K = scan.lambda2_eig_bounds[1]
    notes = {"K": K, "sampled_max": scan.sampled_max, "sampled_min": scan.sampled_min}
    if scan.sampled_max > _SEC_REL * scale:
        return _not_applicable("sectional", "positive sectional curvature found", **notes)
    if K > _SEC_REL * scale:
        return _not_applicable("sectional", "curvature-operator bound K is positive", **notes)
    K = min(K, 0.0)
    lhs = (n - 2) * K
    rhs = 0.0 if report.is_einstein else 0.5 * report.trace_D
    return StabilityCertificate("sectional", lhs, rhs, verdict(lhs, rhs), notes)


@dataclass(frozen=True)
class TwoStepData:
    p: int
    q: int
    rho_minus: float
    rho_plus: float
    ric: np.ndarray


def _two_step_data(alg: MetricLieAlgebra) -> TwoStepData:
    V, Z = two_step_split(alg)
    ric = curvature(alg).ric
    rv = symmetric_eigvals(V.T @ ric @ V)
    rz = symmetric_eigvals(Z.T @ ric @ Z)
    return TwoStepData(p=Z.shape[1], q=V.shape[1], rho_minus=-float(rv[0]), rho_plus=float(rz[-1]), ric=ric)


def two_step_certificate(alg: MetricLieAlgebra, report: SolitonReport | None = None) -> StabilityCertificate:
    """Three Ricci-eigenvalue inequalities for two-step nilsolitons."""
    report = _report_for(alg, report)
    d = _two_step_data(alg)
    tr = report.trace_D
    checks = [
        ("rho_minus < trD/4", d.rho_minus, 0.25 * tr),
        ("rho_plus < trD/4", d.rho_plus, 0.25 * tr),
        ("q/2 rho_minus + (p+1) rho_plus < trD", 0.5 * d.q * d.rho_minus + (d.p + 1) * d.rho_plus, tr),
    ]
    verdicts = [verdict(lhs, rhs) for _, lhs, rhs in checks]

    def tightness(item: tuple[str, float, float]) -> float:
        _, lhs, rhs = item
        return lhs / rhs if rhs > 0 else lhs - rhs

    name, lhs, rhs = max(checks, key=tightness)
    notes = {
        "p": d.p,
        "q": d.q,
        "rho_minus": d.rho_minus,
        "rho_plus": d.rho_plus,
        "binding": name,
        "checks": [{"name": nm, "lhs": a, "rhs": b, "verdict": v} for (nm, a, b), v in zip(checks, verdicts)],
    }
    return StabilityCertificate("two-step", lhs, rhs, _combine(verdicts), notes)


def extension_heuristic_certificate(report: SolitonReport) -> StabilityCertificate:
    """``max d_i < tr D / (2 + √2)``: Einstein-extension stability then implies Q-stability."""
    if not report.is_soliton:
        raise SolitonError("extension heuristic needs a soliton")
    lhs = float(symmetric_eigvals(report.D)[-1])
    rhs = report.trace_D / (2.0 + math.sqrt(2.0))
    return StabilityCertificate("ext-heuristic", lhs, rhs, verdict(lhs, rhs), {"trace_D": report.trace_D})


# -- normalization ----------------------------------------------------------------


def normalize(alg: MetricLieAlgebra, scal: float | None = None, lam: float | None = None) -> MetricLieAlgebra:
    """Rescale structure constants so that ``scal`` (or the soliton constant) hits a target."""
    if (scal is None) == (lam is None):
        raise ValueError("give exactly one of scal= or lam=")
    if scal is not None:
        current, target, what = curvature(alg).scal, float(scal), "scal"
        zero_tol = _TOL_FLOOR
    else:
        rep = detect_soliton(alg)
        if not rep.is_soliton:
            raise SolitonError("lambda normalization needs a soliton")
        if np.all(alg.c == 0.0):
            raise SolitonError("soliton constant of a flat algebra is a convention and cannot be rescaled")
        current, target, what = rep.lam, float(lam), "lambda"
        zero_tol = rep.tol_soliton
    if abs(current) <= zero_tol or target == 0.0:
        raise SolitonError(f"cannot normalize {what}: current value {current:.3g}, target {target:.3g}")
    ratio = target / current
    if ratio <= 0.0:
        raise SolitonError(f"cannot normalize {what}: target {target:g} has the wrong sign (current {current:.6g})")
    return alg.scaled(math.sqrt(ratio))


@dataclass(frozen=True)
class TwoStepRicciBounds:
    ric_norm_sq: float
    rho_minus: float
    rho_plus: float
    p: int
    q: int
    lower_bound: float
    bound_ok_flags: dict[str, bool]
    equality: bool
    scale: float


def two_step_ricci_bounds(alg: MetricLieAlgebra, tol: float = 1e-9) -> TwoStepRicciBounds:
    """After rescaling to ``scal = -1``: ``rho_± <= |Ric|²`` and ``|Ric|² >= 1/p + 4/q``."""
    two_step_split(alg)
    report = detect_soliton(alg)
    if not report.is_soliton:
        raise SolitonError("Ricci bounds need a two-step nilsoliton")
    s_cur = curvature(alg).scal
    normed = normalize(alg, scal=-1.0)
    d = _two_step_data(normed)
    norm_sq = float(np.sum(d.ric**2))
    lower = 1.0 / d.p + 4.0 / d.q
    band = tol * max(norm_sq, 1.0)
    flags = {
        "rho_minus_le_ric_sq": d.rho_minus <= norm_sq + band,
        "rho_plus_le_ric_sq": d.rho_plus <= norm_sq + band,
        "ric_sq_ge_bound": norm_sq >= lower - band,
    }
    return TwoStepRicciBounds(
        ric_norm_sq=norm_sq,
        rho_minus=d.rho_minus,
        rho_plus=d.rho_plus,
        p=d.p,
        q=d.q,
        lower_bound=lower,
        bound_ok_flags=flags,
        equality=abs(norm_sq - lower) <= band,
        scale=math.sqrt(-1.0 / s_cur),
    )

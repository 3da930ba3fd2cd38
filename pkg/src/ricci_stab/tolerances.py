"""Numerical cutoffs shared by every module."""

import os

TOL_STRUCTURE = 1e-10
TOL_RANK = 1e-9
TOL_SOLITON_REL = 1e-8
TOL_VERDICT_REL = 1e-6

# env override for the relative verdict band
_ENV_VERDICT = "RICCI_STAB_TOL"


def verdict_rel() -> float:
    raw = os.environ.get(_ENV_VERDICT)
    if raw is None or raw.strip() == "":
        return TOL_VERDICT_REL
    value = float(raw)
    if not value >= 0.0:
        raise ValueError(f"{_ENV_VERDICT} must be a nonnegative number, got {raw!r}")
    return value


def tol_verdict(lhs: float, rhs: float) -> float:
    return verdict_rel() * max(abs(lhs), abs(rhs), 1.0)

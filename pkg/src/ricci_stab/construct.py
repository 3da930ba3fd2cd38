"""Builders for nilsolitons, solvsoliton extensions, and the example catalog."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .algebra import (
    AlgebraError,
    DerivationSet,
    MetricLieAlgebra,
    semidirect_product,
)
from .soliton import SolitonError, SolitonReport, detect_soliton

s2, s3, s6 = math.sqrt(2.0), math.sqrt(3.0), math.sqrt(6.0)


# -- two-step algebras from J-maps ------------------------------------------------


@dataclass(frozen=True, eq=False)
class JMapSet:
    """Skew maps ``J_1..J_p`` on ``v = R^q`` defining ``<J_Z U, V> = <Z, [U, V]>``."""

    p: int
    q: int
    J: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        mats = tuple(np.array(m, dtype=float) for m in self.J)
        if len(mats) != self.p:
            raise AlgebraError(f"expected {self.p} J-maps, got {len(mats)}")
        for idx, m in enumerate(mats):
            if m.shape != (self.q, self.q):
                raise AlgebraError(f"J-map {idx} has shape {m.shape}, expected {(self.q, self.q)}")
            if np.abs(m + m.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(m).max(initial=0.0)):
                raise AlgebraError(f"J-map {idx} is not skew-symmetric")
            m.setflags(write=False)
        object.__setattr__(self, "J", mats)

    @classmethod
    def of(cls, maps: Sequence[np.ndarray]) -> JMapSet:
        maps = [np.asarray(m, dtype=float) for m in maps]
        if not maps:
            raise AlgebraError("need at least one J-map")
        return cls(len(maps), maps[0].shape[0], tuple(maps))

    def clifford_residual(self) -> float:
        """``max |J_a J_b + J_b J_a + 2 delta_ab id|``."""
        eye = np.eye(self.q)
        worst = 0.0
        for a in range(self.p):
            for b in range(a, self.p):
                r = self.J[a] @ self.J[b] + self.J[b] @ self.J[a] + (2.0 * eye if a == b else 0.0)
                worst = max(worst, float(np.abs(r).max()))
        return worst

    def is_clifford(self, tol: float = 1e-10) -> bool:
        return self.clifford_residual() <= tol


def two_step_from_jmaps(jm: JMapSet, label: str = "") -> MetricLieAlgebra:
    """Two-step algebra on ``v ⊕ z`` with ``c_ij^(q+a) = J_a[j, i]``."""
    q, p = jm.q, jm.p
    n = q + p
    C = np.zeros((n, n, n))
    for a, J in enumerate(jm.J):
        C[:q, :q, q + a] = J.T
    return MetricLieAlgebra.from_dense(C, None, label or f"two-step(p={p}, q={q})")


_QUAT_I = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float)
_QUAT_J = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float)
_QUAT_K = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float)
_COMPLEX = np.array([[0.0, -1.0], [1.0, 0.0]])


def clifford_jmaps(p: int, copies: int = 1) -> JMapSet:
    """Built-in Clifford modules: complex unit (p=1), quaternion units (p=2, 3)."""
    if p == 1:
        blocks = [_COMPLEX]
    elif p == 2:
        blocks = [_QUAT_I, _QUAT_J]
    elif p == 3:
        blocks = [_QUAT_I, _QUAT_J, _QUAT_K]
    else:
        raise AlgebraError(f"no built-in J-maps for p={p}; pass explicit maps to two_step_from_jmaps")
    if copies < 1:
        raise AlgebraError("copies must be at least 1")
    return JMapSet.of([np.kron(np.eye(copies), b) for b in blocks])


def heisenberg_like(p: int, copies: int = 1) -> MetricLieAlgebra:
    """Generalized Heisenberg algebra ``h_{p,q}`` with ``q = copies * (module dim)``."""
    jm = clifford_jmaps(p, copies)
    return two_step_from_jmaps(jm, f"heis({p},{jm.q})")


def free_two_step(q: int) -> MetricLieAlgebra:
    """``R^q ⊕ so(q)`` with ``[U_i, U_j] = Z_ij`` (pairs in lexicographic order)."""
    if q < 2:
        raise AlgebraError("free two-step algebra needs q >= 2")
    pairs = list(combinations(range(1, q + 1), 2))
    brackets = {(i, j): {q + 1 + k: 1.0} for k, (i, j) in enumerate(pairs)}
    return MetricLieAlgebra.from_brackets(q + len(pairs), brackets, None, f"free2({q})")


def abelian(n: int, lam: float = -1.0) -> MetricLieAlgebra:
    """``R^n``; the soliton constant of a flat algebra is a free choice, recorded in the label."""
    if n < 1:
        raise AlgebraError("dimension must be positive")
    if not lam < 0:
        raise AlgebraError("soliton constant of the abelian algebra must be negative")
    label = f"abelian({n})" if lam == -1.0 else f"abelian({n}) lambda={lam:g}"
    return MetricLieAlgebra(n, np.zeros((n * (n - 1) // 2, n)), np.eye(n), label)


def direct_sum(a: MetricLieAlgebra, b: MetricLieAlgebra, label: str = "") -> MetricLieAlgebra:
    n = a.n + b.n
    C = np.zeros((n, n, n))
    C[: a.n, : a.n, : a.n] = a.orthonormalized().dense
    C[a.n :, a.n :, a.n :] = b.orthonormalized().dense
    return MetricLieAlgebra.from_dense(C, None, label or f"{a.label} + {b.label}")


def nil3() -> MetricLieAlgebra:
    return MetricLieAlgebra.from_brackets(3, {(1, 2): {3: 1.0}}, None, "nil3")


def h3_plus_r(k: int = 1) -> MetricLieAlgebra:
    return direct_sum(nil3(), abelian(k), f"h3_plus_r({k})")


# -- extensions ----------------------------------------------------------------------


def _base_report(base: MetricLieAlgebra, abelian_lambda: float) -> SolitonReport:
    rep = detect_soliton(base, abelian_lambda=abelian_lambda)
    if not rep.is_soliton:
        raise SolitonError(f"base is not a nilsoliton (derivation defect {rep.defect:.3g})")
    return rep


@dataclass(frozen=True, eq=False)
class ExtensionSpec:
    """Nilsoliton plus commuting self-adjoint derivations and the induced metric on ``a``."""

    base: MetricLieAlgebra
    report: SolitonReport
    a_maps: DerivationSet
    gram_a: np.ndarray
    predicted_lambda: float
    predicted_D: np.ndarray

    @classmethod
    def build(cls, base: MetricLieAlgebra, maps: Sequence[np.ndarray], abelian_lambda: float = -1.0) -> ExtensionSpec:
        report = _base_report(base, abelian_lambda)
        on = report.algebra
        ders = DerivationSet.of(on, maps)
        if len(ders) == 0:
            raise AlgebraError("need at least one derivation")
        mats = ders.maps
        for idx, M in enumerate(mats):
            if np.abs(M - M.T).max() > 1e-10 * max(1.0, np.abs(M).max()):
                raise AlgebraError(f"map {idx} is not self-adjoint")
        for a, b in combinations(range(len(mats)), 2):
            if np.abs(mats[a] @ mats[b] - mats[b] @ mats[a]).max() > 1e-10 * max(1.0, np.abs(mats[a]).max() * np.abs(mats[b]).max()):
                raise AlgebraError(f"maps {a} and {b} do not commute")
        lam = report.lam
        gram_a = np.array([[-np.trace(A @ B) / lam for B in mats] for A in mats])
        if np.linalg.eigvalsh(gram_a)[0] <= 1e-12 * max(1.0, np.abs(gram_a).max()):
            raise AlgebraError("maps are linearly dependent (induced metric on a is degenerate)")
        # mean curvature vector: <H, A_a> = tr A_a
        coef = np.linalg.solve(gram_a, np.array([np.trace(A) for A in mats]))
        ad_H = sum(c * A for c, A in zip(coef, mats))
        n, m = on.n, len(mats)
        D = np.zeros((n + m, n + m))
        D[:n, :n] = report.D - ad_H
        return cls(on, report, ders, gram_a, lam, D)

    def is_einstein(self, tol: float = 1e-9) -> bool:
        """Whether ``D_n`` lies in the span of the maps (least-squares residual)."""
        A = np.stack([M.ravel() for M in self.a_maps.maps], axis=1)
        d = self.report.D.ravel()
        coef, *_ = np.linalg.lstsq(A, d, rcond=None)
        return float(np.linalg.norm(A @ coef - d)) <= tol * max(1.0, float(np.linalg.norm(d)))


def lauret_extension(spec: ExtensionSpec, label: str = "") -> MetricLieAlgebra:
    """``n ⋊ a`` with ``<A, B> = -(1/lam) tr(AB)``, returned in an orthonormal frame.

    The frame on ``n`` is unchanged; only the ``a`` block is orthonormalized.
    """
    s = semidirect_product(spec.base, spec.a_maps, spec.gram_a, label or f"{spec.base.label} extended by {len(spec.a_maps)}")
    return s.orthonormalized().with_label(s.label)


def einstein_rank_one_extension(base: MetricLieAlgebra, abelian_lambda: float = -1.0) -> MetricLieAlgebra:
    """Rank-one extension by ``A`` with ``ad_A = D / sqrt(tr D)`` and ``|A| = 1``."""
    report = _base_report(base, abelian_lambda)
    tr = report.trace_D
    if not tr > 0.0:
        raise SolitonError(f"Einstein extension needs tr D > 0 (got {tr:.6g})")
    A = report.D / math.sqrt(tr)
    return semidirect_product(report.algebra, [A], np.eye(1), f"{base.label or 'base'} Einstein extension")


def diagonal_abelian_solvsoliton(A: np.ndarray, label: str = "") -> MetricLieAlgebra:
    """``R^n ⋊ span(diag(A[:, a]))`` with identity metric; columns must be orthonormal."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] < 1:
        raise AlgebraError("A must be an n×m matrix with m >= 1")
    n, m = A.shape
    if np.abs(A.T @ A - np.eye(m)).max() > 1e-10:
        raise AlgebraError("columns of A are not orthonormal")
    return semidirect_product(abelian(n), [np.diag(A[:, a]) for a in range(m)], np.eye(m), label or f"diagonal abelian extension ({n}x{m})")


def abelian_sectional_oracle(A: np.ndarray | None, u: np.ndarray, v: np.ndarray) -> float:
    """Closed-form sectional curvature on ``diagonal_abelian_solvsoliton(A)``.

    ``u, v`` are coordinate vectors on ``R^n ⊕ a`` (``n`` entries, then ``m``).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    area = float(u @ u * (v @ v) - (u @ v) ** 2)
    if not area > 1e-14 * max(float(u @ u * (v @ v)), np.finfo(float).tiny):
        raise AlgebraError("degenerate plane: u and v are linearly dependent")
    if A is None or np.size(A) == 0:
        return 0.0
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    un, ua, vn, va = u[:n], u[n:], v[:n], v[n:]
    W = np.outer(un, vn) - np.outer(vn, un)
    iu, ju = np.triu_indices(n, 1)
    first = -sum(float(np.sum(A[iu, a] * A[ju, a] * W[iu, ju] ** 2)) for a in range(A.shape[1]))
    cv, cu = A @ va, A @ ua
    second = -float(np.sum((cv * un - cu * vn) ** 2))
    return (first + second) / area


def is_nice_basis(alg: MetricLieAlgebra, tol: float = 1e-12) -> bool:
    """Each bracket hits one basis vector, and two brackets sharing a target use disjoint pairs."""
    n = alg.n
    iu, ju = np.triu_indices(n, 1)
    scale = max(1.0, float(np.abs(alg.c).max(initial=0.0)))
    by_target: dict[int, list[tuple[int, int]]] = {}
    for r in range(len(iu)):
        nz = np.flatnonzero(np.abs(alg.c[r]) > tol * scale)
        if len(nz) > 1:
            return False
        if len(nz) == 1:
            by_target.setdefault(int(nz[0]), []).append((int(iu[r]), int(ju[r])))
    for pairs in by_target.values():
        for a, b in combinations(pairs, 2):
            if set(a) & set(b):
                return False
    return True


# -- catalog ---------------------------------------------------------------------------


def mu11_raw() -> MetricLieAlgebra:
    return MetricLieAlgebra.from_brackets(
        6,
        {(1, 2): {4: 1.0}, (1, 4): {5: 1.0}, (1, 5): {6: 1.0}, (2, 3): {6: 1.0}, (2, 4): {6: 1.0}},
        None,
        "mu11_raw",
    )


def mu11_change_of_basis() -> np.ndarray:
    """``G`` with ``change_basis(mu11_raw(), G) == mu11_diagonalized()``."""
    G = np.zeros((6, 6))
    G[0, 0] = math.sqrt(10.0) / 3.0
    G[1, 1] = math.sqrt(5.0 / 3.0)
    G[2, 3] = 1.0
    G[3, 2] = math.sqrt(2.0 / 3.0)
    G[3, 3] = 1.0 / s6
    G[4, 4] = 1.0
    G[5, 5] = math.sqrt(3.0 / 5.0)
    return G


def mu11_diagonalized() -> MetricLieAlgebra:
    a = 0.6 * math.sqrt(1.5)
    return MetricLieAlgebra.from_brackets(
        6,
        {
            (1, 2): {3: a, 4: 0.3},
            (1, 3): {5: 3.0 / math.sqrt(10.0)},
            (1, 5): {6: a},
            (2, 3): {6: 0.3},
            (2, 4): {6: a},
        },
        None,
        "mu11_diagonalized",
    )


LAURET_RANGE = (0.0, 1.0)
NIL3_FAMILY_RANGE = (-1.0 / s2, 1.0 / s2)


def _check_open(name: str, t: float, lo: float, hi: float) -> float:
    t = float(t)
    if not lo < t < hi:
        raise AlgebraError(f"{name}: parameter t={t:g} outside ({lo:.6g}, {hi:.6g})")
    return t


def lauret_curve(t: float) -> MetricLieAlgebra:
    t = _check_open("lauret_curve", t, *LAURET_RANGE)
    a, b = math.sqrt(1.0 - t), math.sqrt(t)
    return MetricLieAlgebra.from_brackets(
        7,
        {
            (1, 2): {3: a},
            (1, 3): {4: 1.0},
            (1, 4): {5: b},
            (1, 5): {6: 1.0},
            (1, 6): {7: 1.0},
            (2, 3): {5: 1.0},
            (2, 4): {6: 1.0},
            (2, 5): {7: b},
            (3, 4): {7: a},
        },
        None,
        f"lauret_curve({t:g})",
    )


def nil3_family_map(t: float) -> np.ndarray:
    r = math.sqrt(1.0 - t * t)
    return np.diag([t, r, t + r])


def nil3_family(t: float) -> MetricLieAlgebra:
    """``nil3 ⋊ R A`` with ``<A, A> = (4/3)(1 + t sqrt(1 - t^2))`` (non-identity Gram kept)."""
    t = _check_open("nil3_family", t, *NIL3_FAMILY_RANGE)
    g = 4.0 / 3.0 * (1.0 + t * math.sqrt(1.0 - t * t))
    return semidirect_product(nil3(), [nil3_family_map(t)], np.array([[g]]), f"nil3_family({t:g})")


ABELIAN_EX1_A = np.array(
    [
        [s3, 2 * s2, 0.0],
        [s3, -s2, s6],
        [s3, -s2, -s6],
        [s3, 0.0, 0.0],
    ]
) / math.sqrt(12.0)

ABELIAN_EX2_A = np.array(
    [
        [0.0, 1.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, -1.0, 0.0],
        [1.0, 1.0, -1.0],
    ]
) / s3

# probe tensors exhibited for the two diagonal abelian examples
ABELIAN_EX1_PROBE = np.diag([-9.0 / 8.0, -1.0, -1.0, 1.0, 0.0, 1.0, 1.0])


def _ex2_probe() -> np.ndarray:
    h = np.diag([8.0, -4.0, 8.0, -3.0, 1.0, -3.0, 1.0])
    h[4, 5] = h[5, 4] = 3.0
    h[5, 6] = h[6, 5] = -4.0
    return h


ABELIAN_EX2_PROBE = _ex2_probe()


def abelian_ex1() -> MetricLieAlgebra:
    return diagonal_abelian_solvsoliton(ABELIAN_EX1_A, "abelian_ex1")


def abelian_ex2() -> MetricLieAlgebra:
    return diagonal_abelian_solvsoliton(ABELIAN_EX2_A, "abelian_ex2")


def heis(p: int, q: int) -> MetricLieAlgebra:
    """``h_{p,q}`` from the built-in Clifford modules."""
    module = 2 if p == 1 else 4
    if p not in (1, 2, 3):
        raise AlgebraError(f"heis: unsupported p={p} (built-ins cover p = 1, 2, 3)")
    if q < module or q % module:
        raise AlgebraError(f"heis: q={q} must be a positive multiple of {module} for p={p}")
    return heisenberg_like(p, q // module)


def h3_plus_h3() -> MetricLieAlgebra:
    return direct_sum(nil3(), nil3(), "h3_plus_h3")


def heis_plus_r(p: int, q: int) -> MetricLieAlgebra:
    return direct_sum(heis(p, q), abelian(1), f"heis_plus_r({p},{q})")


def _int(x: str) -> int:
    v = float(x)
    if v != int(v):
        raise AlgebraError(f"expected an integer parameter, got {x!r}")
    return int(v)


CATALOG: dict[str, tuple[Callable[..., MetricLieAlgebra], tuple[Callable[[str], object], ...], str]] = {
    "nil3": (nil3, (), "3-dim Heisenberg algebra"),
    "abelian": (lambda n: abelian(n), (_int,), "abelian(n): R^n, lambda = -1"),
    "mu11_raw": (mu11_raw, (), "6-dim step-4 algebra #11, raw orthonormal bracket"),
    "mu11_diagonalized": (mu11_diagonalized, (), "G . mu11, with diagonal Ricci (nilsoliton)"),
    "lauret_curve": (lauret_curve, (float,), "lauret_curve(t), 0<t<1: 7-dim nilsoliton curve"),
    "nil3_family": (nil3_family, (float,), "nil3_family(t), |t|<1/sqrt2: rank-one solvsolitons on nil3"),
    "abelian_ex1": (abelian_ex1, (), "R^4 extended by a 3-dim diagonal torus (Einstein)"),
    "abelian_ex2": (abelian_ex2, (), "R^4 extended by a 3-dim diagonal torus (non-Einstein)"),
    "free2": (free_two_step, (_int,), "free2(q): free two-step nilpotent on q generators"),
    "heis": (heis, (_int, _int), "heis(p,q): generalized Heisenberg, p in {1,2,3}"),
    "h3_plus_r": (h3_plus_r, (_int,), "h3_plus_r(k): nil3 + R^k"),
    "h3_plus_h3": (h3_plus_h3, (), "nil3 + nil3"),
    "heis_plus_r": (heis_plus_r, (_int, _int), "heis_plus_r(p,q): h_{p,q} + R"),
}

_REF = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\(\s*(.*?)\s*\))?\s*$")


def parse_catalog_ref(ref: str) -> tuple[str, list[str]]:
    """``"heis(3,4)"`` -> ``("heis", ["3", "4"])``."""
    m = _REF.match(ref)
    if not m:
        raise AlgebraError(f"malformed catalog reference {ref!r}")
    name, args = m.group(1), m.group(2)
    params = [a.strip() for a in args.split(",")] if args else []
    return name, params


def catalog(name: str, *params: object) -> MetricLieAlgebra:
    """Catalog entry by name, e.g. ``catalog("lauret_curve", 0.5)`` or ``catalog("heis(3,4)")``."""
    if not params and "(" in name:
        name, parsed = parse_catalog_ref(name)
        params = tuple(parsed)
    if name not in CATALOG:
        raise AlgebraError(f"unknown catalog entry {name!r}; known: {', '.join(sorted(CATALOG))}")
    fn, conv, _ = CATALOG[name]
    if len(params) != len(conv):
        raise AlgebraError(f"{name} takes {len(conv)} parameter(s), got {len(params)}")
    try:
        args = [c(p if isinstance(p, str) else repr(p)) for c, p in zip(conv, params)]
    except ValueError as exc:
        raise AlgebraError(f"bad parameter for {name}: {exc}") from None
    return fn(*args)


def catalog_names() -> list[tuple[str, str]]:
    return [(k, v[2]) for k, v in CATALOG.items()]

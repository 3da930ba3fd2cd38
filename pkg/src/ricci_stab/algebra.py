"""Metric Lie algebras given by structure constants and an inner product.

Brackets are stored only for index pairs ``i < j``; the antisymmetric dense
tensor ``C[i, j, k] = c_{ij}^k`` is expanded on demand.  Indices are
0-based in code and 1-based in algebra documents.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .tolerances import TOL_RANK, TOL_STRUCTURE

logger = logging.getLogger(__name__)


class AlgebraError(ValueError):
    """Invalid algebra, derivation, or construction input."""


class ParseError(AlgebraError):
    """Malformed algebra document."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


def _pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, 1)


@dataclass(frozen=True, eq=False)
class MetricLieAlgebra:
    """Structure constants over ``i < j`` plus a Gram matrix.

    ``c`` has shape ``(n(n-1)/2, n)``; row ``r`` holds ``[e_i, e_j]`` for the
    r-th pair of ``np.triu_indices(n, 1)``.
    """

    n: int
    c: np.ndarray
    gram: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        n = int(self.n)
        if n < 1:
            raise AlgebraError(f"dimension must be positive, got {self.n}")
        c = np.asarray(self.c, dtype=float)
        if c.shape != (n * (n - 1) // 2, n):
            raise AlgebraError(f"structure constants have shape {c.shape}, expected {(n * (n - 1) // 2, n)}")
        gram = np.eye(n) if self.gram is None else np.asarray(self.gram, dtype=float)
        if gram.shape != (n, n):
            raise AlgebraError(f"gram has shape {gram.shape}, expected {(n, n)}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(gram))):
            raise AlgebraError("structure constants and gram must be finite")
        _check_spd(gram, "gram")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "gram", _frozen(gram))

    # -- constructors -------------------------------------------------

    @classmethod
    def from_dense(cls, C: np.ndarray, gram: np.ndarray | None = None, label: str = "") -> MetricLieAlgebra:
        """Build from a dense ``C[i, j, k]``; only the ``i < j`` part is read."""
        C = np.asarray(C, dtype=float)
        n = C.shape[0]
        iu, ju = _pair_index(n)
        return cls(n, C[iu, ju, :], np.eye(n) if gram is None else gram, label)

    @classmethod
    def from_brackets(
        cls,
        n: int,
        brackets: Mapping[tuple[int, int], Mapping[int, float]],
        gram: np.ndarray | None = None,
        label: str = "",
    ) -> MetricLieAlgebra:
        """Build from 1-based ``{(i, j): {k: coeff}}`` with ``i < j``."""
        C = np.zeros((n, n, n))
        for (i, j), coeffs in brackets.items():
            if not (1 <= i < j <= n):
                raise AlgebraError(f"bracket index pair ({i}, {j}) must satisfy 1 <= i < j <= {n}")
            for k, v in coeffs.items():
                if not 1 <= k <= n:
                    raise AlgebraError(f"target index {k} out of range 1..{n}")
                C[i - 1, j - 1, k - 1] += float(v)
        return cls.from_dense(C, gram, label)

    # -- dense views ----------------------------------------------------

    @cached_property
    def dense(self) -> np.ndarray:
        """Antisymmetric ``C[i, j, k]`` with ``[e_i, e_j] = sum_k C[i, j, k] e_k``."""
        C = np.zeros((self.n, self.n, self.n))
        iu, ju = _pair_index(self.n)
        C[iu, ju, :] = self.c
        C[ju, iu, :] = -self.c
        C.setflags(write=False)
        return C

    @cached_property
    def ad_matrices(self) -> np.ndarray:
        """``ad[i]`` is the matrix of ``ad_{e_i}``: ``ad[i][k, j] = C[i, j, k]``."""
        A = np.ascontiguousarray(np.transpose(self.dense, (0, 2, 1)))
        A.setflags(write=False)
        return A

    @cached_property
    def has_identity_gram(self) -> bool:
        return bool(np.array_equal(self.gram, np.eye(self.n)))

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.dense)

    def ad(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("i,ikj->kj", np.asarray(x, dtype=float), self.ad_matrices)

    def scaled(self, s: float) -> MetricLieAlgebra:
        """Same Gram, all structure constants multiplied by ``s``."""
        return MetricLieAlgebra(self.n, s * self.c, self.gram, _append_label(self.label, f"scaled by {s:g}"))

    def with_label(self, label: str) -> MetricLieAlgebra:
        return MetricLieAlgebra(self.n, self.c, self.gram, label)

    def orthonormalized(self) -> MetricLieAlgebra:
        """Isometric presentation with identity Gram (Cholesky change of basis)."""
        if self.has_identity_gram:
            return self
        L = np.linalg.cholesky(self.gram)
        out = change_basis(self, L.T)
        return MetricLieAlgebra(self.n, out.c, np.eye(self.n), _append_label(self.label, "orthonormalized"))


def _append_label(label: str, note: str) -> str:
    return f"{label} [{note}]" if label else f"[{note}]"


def _check_spd(g: np.ndarray, what: str) -> None:
    if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(g).max()))):
        raise AlgebraError(f"{what} is not symmetric")
    try:
        L = np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise AlgebraError(f"{what} is not positive-definite") from None
    if not np.all(np.diag(L) > 0):
        raise AlgebraError(f"{what} is not positive-definite")


@dataclass(frozen=True)
class DerivationSet:
    """Maps asserted to be derivations of a host algebra."""

    maps: tuple[np.ndarray, ...]
    symmetric_flag: tuple[bool, ...] = field(default=())

    @classmethod
    def of(cls, alg: MetricLieAlgebra, maps: Iterable[np.ndarray], tol: float = TOL_STRUCTURE) -> DerivationSet:
        mats = tuple(_frozen(m) for m in maps)
        for idx, M in enumerate(mats):
            if M.shape != (alg.n, alg.n):
                raise AlgebraError(f"map {idx} has shape {M.shape}, expected {(alg.n, alg.n)}")
            d = derivation_defect(alg, M)
            if d > tol * _scale(alg, M):
                raise AlgebraError(f"map {idx} is not a derivation (defect {d:.3g})")
        sym = tuple(bool(np.allclose(alg.gram @ M, (alg.gram @ M).T, atol=1e-12 * max(1.0, np.abs(M).max()))) for M in mats)
        return cls(mats, sym)

    def __len__(self) -> int:
        return len(self.maps)


def _scale(alg: MetricLieAlgebra, M: np.ndarray | None = None) -> float:
    s = max(1.0, float(np.abs(alg.c).max(initial=0.0)))
    if M is not None:
        s *= max(1.0, float(np.abs(M).max(initial=0.0)))
    return s


# -- algebra documents ------------------------------------------------------


def load_algebra(doc: Mapping[str, Any] | str, tol: float = TOL_STRUCTURE) -> MetricLieAlgebra:
    """Parse and validate an algebra document (dict or JSON text).

    A non-identity Gram is normalized away by a Cholesky change of basis.
    """
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, Mapping):
        raise ParseError("algebra document must be a JSON object")
    try:
        n = doc["dim"]
    except KeyError:
        raise ParseError("missing 'dim'") from None
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"'dim' must be a positive integer, got {n!r}")
    brackets: dict[tuple[int, int], dict[int, float]] = {}
    entries = doc.get("brackets", [])
    if not isinstance(entries, list):
        raise ParseError("'brackets' must be a list")
    for entry in entries:
        try:
            i, j, coeffs = int(entry["i"]), int(entry["j"]), entry["coeffs"]
            parsed = {int(k): float(v) for k, v in coeffs.items()}
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed bracket entry {entry!r}: {exc}") from None
        if not (1 <= i <= n and 1 <= j <= n) or any(not 1 <= k <= n for k in parsed):
            raise AlgebraError(f"bracket entry {entry!r}: index out of range 1..{n}")
        if not i < j:
            raise AlgebraError(f"bracket entry {entry!r}: requires i < j")
        if not all(np.isfinite(v) for v in parsed.values()):
            raise AlgebraError(f"bracket entry {entry!r}: coefficients must be finite")
        slot = brackets.setdefault((i, j), {})
        for k, v in parsed.items():
            slot[k] = slot.get(k, 0.0) + v
    gram = None
    if doc.get("gram") is not None:
        try:
            gram = np.array(doc["gram"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"malformed gram: {exc}") from None
        if gram.shape != (n, n):
            raise AlgebraError(f"gram has shape {gram.shape}, expected {(n, n)}")
    label = str(doc.get("label", ""))
    alg = MetricLieAlgebra.from_brackets(n, brackets, gram, label)
    defect, triple = jacobi_worst(alg)
    if defect > tol * _scale(alg) ** 2:
        raise AlgebraError(f"Jacobi identity fails: defect {defect:.6g} at triple {triple}")
    return alg.orthonormalized()


def read_algebra(path: str) -> MetricLieAlgebra:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return load_algebra(text)


def algebra_document(alg: MetricLieAlgebra, digits: int = 17) -> dict[str, Any]:
    """Inverse of :func:`load_algebra` (1-based indices, zero brackets omitted)."""
    iu, ju = _pair_index(alg.n)
    brackets = []
    for r, (i, j) in enumerate(zip(iu, ju)):
        coeffs = {str(k + 1): float(f"{v:.{digits}g}") for k, v in enumerate(alg.c[r]) if v != 0.0}
        if coeffs:
            brackets.append({"i": int(i) + 1, "j": int(j) + 1, "coeffs": coeffs})
    doc: dict[str, Any] = {"dim": alg.n, "brackets": brackets}
    if not alg.has_identity_gram:
        doc["gram"] = alg.gram.tolist()
    if alg.label:
        doc["label"] = alg.label
    return doc


# -- identities -------------------------------------------------------------


def jacobi_tensor(alg: MetricLieAlgebra) -> np.ndarray:
    """``J[i, j, k] = [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]``."""
    C = alg.dense
    T = np.einsum("ijl,lkm->ijkm", C, C)
    return T + np.transpose(T, (1, 2, 0, 3)) + np.transpose(T, (2, 0, 1, 3))


def jacobi_worst(alg: MetricLieAlgebra) -> tuple[float, tuple[int, int, int] | None]:
    """Largest Jacobi defect and its 1-based triple (``None`` when n < 3)."""
    if alg.n < 3:
        return 0.0, None
    norms = np.linalg.norm(jacobi_tensor(alg), axis=-1)
    best, where = -1.0, None
    for i, j, k in combinations(range(alg.n), 3):
        if norms[i, j, k] > best:
            best, where = float(norms[i, j, k]), (i + 1, j + 1, k + 1)
    return best, where


def jacobi_defect(alg: MetricLieAlgebra) -> float:
    return jacobi_worst(alg)[0]


def ad_star(alg: MetricLieAlgebra, x: np.ndarray) -> np.ndarray:
    """Gram-adjoint of ``ad_x``: ``<ad*_x y, z> = <y, [x, z]>``."""
    A = alg.ad(x)
    if alg.has_identity_gram:
        return A.T.copy()
    return np.linalg.solve(alg.gram, A.T @ alg.gram)


def _defect_tensor(alg: MetricLieAlgebra, M: np.ndarray) -> np.ndarray:
    C = alg.dense
    return (
        np.einsum("kl,ijl->ijk", M, C)
        - np.einsum("ai,ajk->ijk", M, C)
        - np.einsum("bj,ibk->ijk", M, C)
    )


def derivation_defect(alg: MetricLieAlgebra, M: np.ndarray) -> float:
    """``max_{i<j} |M[e_i,e_j] - [Me_i,e_j] - [e_i,Me_j]|``."""
    M = np.asarray(M, dtype=float)
    if alg.n < 2:
        return 0.0
    iu, ju = _pair_index(alg.n)
    T = _defect_tensor(alg, M)
    return float(np.linalg.norm(T[iu, ju, :], axis=-1).max())


def derivation_operator(alg: MetricLieAlgebra) -> np.ndarray:
    """Matrix of ``M -> (M[e_i,e_j] - [Me_i,e_j] - [e_i,Me_j])_{i<j}``.

    Shape ``(npairs * n, n * n)``, acting on ``M.ravel()`` (row-major).
    """
    n = alg.n
    C = alg.dense
    eye = np.eye(n)
    L = (
        np.einsum("ka,ijb->ijkab", eye, C)
        - np.einsum("ib,ajk->ijkab", eye, C)
        - np.einsum("jb,iak->ijkab", eye, C)
    )
    iu, ju = _pair_index(n)
    return L[iu, ju].reshape(len(iu) * n, n * n)


def derivation_space(alg: MetricLieAlgebra, tol: float = TOL_RANK) -> np.ndarray:
    """Frobenius-orthonormal basis of Der(alg), shape ``(d, n, n)``."""
    n = alg.n
    if n < 2:
        return np.eye(1).reshape(1, 1, 1)
    L = derivation_operator(alg)
    _, s, Vt = np.linalg.svd(L, full_matrices=True)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return Vt[rank:].reshape(-1, n, n)


# -- structure ----------------------------------------------------------------


@dataclass(frozen=True)
class StructureReport:
    is_nilpotent: bool
    step: int | None
    is_solvable: bool
    derived_subalgebra_basis: np.ndarray
    is_unimodular: bool
    lower_central_dims: tuple[int, ...]
    derived_series_dims: tuple[int, ...]

    @property
    def derived_dim(self) -> int:
        return self.derived_subalgebra_basis.shape[1]


def _span(vectors: np.ndarray, cutoff: float) -> np.ndarray:
    """Orthonormal basis (columns) of the row span of ``vectors``."""
    if vectors.size == 0:
        return np.zeros((vectors.shape[-1], 0))
    U, s, Vt = np.linalg.svd(vectors, full_matrices=False)
    r = int(np.sum(s > cutoff))
    return Vt[:r].T


def _rank_cutoff(alg: MetricLieAlgebra, tol: float) -> float:
    return tol * max(float(np.linalg.norm(alg.c)), np.finfo(float).tiny)


def _bracket_span(alg: MetricLieAlgebra, X: np.ndarray, Y: np.ndarray, cutoff: float) -> np.ndarray:
    vecs = np.einsum("ia,jb,ijk->abk", X, Y, alg.dense).reshape(-1, alg.n)
    return _span(vecs, cutoff)


def structure_report(alg: MetricLieAlgebra, tol: float = TOL_RANK) -> StructureReport:
    """Lower central and derived series, with ranks decided at ``tol``."""
    n = alg.n
    cutoff = _rank_cutoff(alg, tol)
    full = np.eye(n)

    lcs = [n]
    cur = full
    while cur.shape[1] > 0:
        nxt = _bracket_span(alg, full, cur, cutoff)
        if nxt.shape[1] == cur.shape[1]:
            break
        lcs.append(nxt.shape[1])
        cur = nxt
    nilpotent = lcs[-1] == 0
    # lcs = [n, dim g^1, ..., 0]; abelian gives [n, 0] and step 1
    step = len(lcs) - 1 if nilpotent else None

    ds = [n]
    cur = full
    derived = None
    while cur.shape[1] > 0:
        nxt = _bracket_span(alg, cur, cur, cutoff)
        if derived is None:
            derived = nxt
        if nxt.shape[1] == cur.shape[1]:
            break
        ds.append(nxt.shape[1])
        cur = nxt
    solvable = ds[-1] == 0
    if derived is None:
        derived = np.zeros((n, 0))

    traces = np.trace(alg.ad_matrices, axis1=1, axis2=2)
    unimodular = bool(np.all(np.abs(traces) <= TOL_STRUCTURE * _scale(alg)))
    return StructureReport(
        is_nilpotent=nilpotent,
        step=step,
        is_solvable=solvable,
        derived_subalgebra_basis=derived,
        is_unimodular=unimodular,
        lower_central_dims=tuple(lcs),
        derived_series_dims=tuple(ds),
    )


# -- transformations ----------------------------------------------------------


def change_basis(alg: MetricLieAlgebra, G: np.ndarray) -> MetricLieAlgebra:
    """Bracket ``G.mu(X, Y) = G mu(G^-1 X, G^-1 Y)`` with the same Gram."""
    G = np.asarray(G, dtype=float)
    if G.shape != (alg.n, alg.n):
        raise AlgebraError(f"G has shape {G.shape}, expected {(alg.n, alg.n)}")
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1.0 / np.finfo(float).eps:
        raise AlgebraError(f"change of basis is singular (condition number {cond:.3g})")
    if cond > 1e8:
        logger.warning("change of basis is ill-conditioned (condition number %.3g)", cond)
    Gi = np.linalg.inv(G)
    C = np.einsum("ai,bj,abl,kl->ijk", Gi, Gi, alg.dense, G)
    return MetricLieAlgebra.from_dense(C, alg.gram, alg.label)


def semidirect_product(
    n_alg: MetricLieAlgebra,
    a: DerivationSet | Sequence[np.ndarray],
    gram_a: np.ndarray | None = None,
    label: str = "",
) -> MetricLieAlgebra:
    """``n ⋊ a`` with ``[A, X] = A(X)``, ``[A, B] = 0`` and Gram ``n.gram ⊕ gram_a``.

    The basis is ``(e_1..e_n, A_1..A_m)``.
    """
    # re-validate even a prebuilt set: it may have been made for another host
    mats = DerivationSet.of(n_alg, a.maps if isinstance(a, DerivationSet) else a).maps
    m = len(mats)
    for p in range(m):
        for q in range(p + 1, m):
            comm = mats[p] @ mats[q] - mats[q] @ mats[p]
            if np.abs(comm).max(initial=0.0) > TOL_STRUCTURE * max(1.0, np.abs(mats[p]).max() * np.abs(mats[q]).max()):
                raise AlgebraError(f"maps {p} and {q} do not commute")
    gram_a = np.eye(m) if gram_a is None else np.asarray(gram_a, dtype=float).reshape(m, m)
    if m:
        _check_spd(gram_a, "gram_a")
    n = n_alg.n
    N = n + m
    C = np.zeros((N, N, N))
    C[:n, :n, :n] = n_alg.dense
    for alpha, M in enumerate(mats):
        A = n + alpha
        # [A, e_j] = sum_k M[k, j] e_k
        C[A, :n, :n] = M.T
        C[:n, A, :n] = -M.T
    gram = np.zeros((N, N))
    gram[:n, :n] = n_alg.gram
    gram[n:, n:] = gram_a
    return MetricLieAlgebra.from_dense(C, gram, label or _append_label(n_alg.label, f"semidirect with {m} derivation(s)"))


def ad_traces(alg: MetricLieAlgebra) -> np.ndarray:
    return np.trace(alg.ad_matrices, axis1=1, axis2=2)


def mean_curvature(alg: MetricLieAlgebra) -> np.ndarray:
    """Vector ``H`` with ``<H, x> = tr ad_x`` for every ``x``.

    The trace form vanishes on ``[s, s]``, so ``H`` lies in its orthogonal
    complement; for ``n ⋊ a`` with nilpotent ``n`` it lies in ``a``.
    """
    return np.linalg.solve(alg.gram, ad_traces(alg))

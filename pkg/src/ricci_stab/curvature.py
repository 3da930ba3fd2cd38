"""Curvature of left-invariant metrics computed from structure constants.

Every function works in an orthonormal frame: an algebra with a
non-identity Gram is first replaced by its Cholesky-orthonormalized
presentation, and all returned tensors refer to that frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import (
    AlgebraError,
    MetricLieAlgebra,
    derivation_operator,
    structure_report,
)
from .eigen import symmetric_eigvals
from .tolerances import TOL_RANK

DEFAULT_SEED = 0x5EED
DEFAULT_SAMPLES = 4096

# set by the self-check at the bottom of this module
_FLIP_34 = False


@dataclass(frozen=True, eq=False)
class CurvaturePackage:
    nabla: np.ndarray
    riem: np.ndarray
    ric: np.ndarray
    scal: float
    source: MetricLieAlgebra

    @property
    def n(self) -> int:
        return self.source.n


def connection(alg: MetricLieAlgebra) -> np.ndarray:
    """``nabla[i, j, k]``: component ``k`` of ``∇_{e_i} e_j``."""
    C = alg.orthonormalized().dense
    return 0.5 * (C - np.transpose(C, (0, 2, 1)) - np.transpose(C, (2, 0, 1)))


def _riemann_from(C: np.ndarray, G: np.ndarray) -> np.ndarray:
    # R(a,b,c,d) = <∇_a c, ∇_b d> - <∇_b c, ∇_a d> - <∇_[a,b] c, d>
    R = np.einsum("ack,bdk->abcd", G, G)
    R = R - np.transpose(R, (1, 0, 2, 3))
    R -= np.einsum("abm,mcd->abcd", C, G)
    if _FLIP_34:
        R = -R
    return R


def riemann(alg: MetricLieAlgebra) -> np.ndarray:
    """``riem[a, b, c, d] = R(e_a, e_b, e_c, e_d)``; ``R(u, v, v, u)`` is sectional."""
    return curvature(alg).riem


def _ricci_from(R: np.ndarray) -> np.ndarray:
    ric = np.einsum("ippj->ij", R)
    return 0.5 * (ric + ric.T)


@lru_cache(maxsize=128)
def curvature(alg: MetricLieAlgebra) -> CurvaturePackage:
    """Connection, Riemann tensor, Ricci matrix and scalar curvature."""
    on = alg.orthonormalized()
    C = on.dense
    G = connection(on)
    R = _riemann_from(C, G)
    ric = _ricci_from(R)
    for a in (G, R, ric):
        a.setflags(write=False)
    return CurvaturePackage(nabla=G, riem=R, ric=ric, scal=float(np.trace(ric)), source=on)


def ricci(alg: MetricLieAlgebra) -> np.ndarray:
    return curvature(alg).ric


def scalar(alg: MetricLieAlgebra) -> float:
    return curvature(alg).scal


def _plane_values(R: np.ndarray, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    num = np.einsum("abcd,sa,sb,sc,sd->s", R, U, V, V, U, optimize=True)
    uu = np.einsum("sa,sa->s", U, U)
    vv = np.einsum("sa,sa->s", V, V)
    uv = np.einsum("sa,sa->s", U, V)
    return num / (uu * vv - uv * uv)


def sectional(alg: MetricLieAlgebra, u: np.ndarray, v: np.ndarray) -> float:
    """Sectional curvature of the plane spanned by ``u, v`` (orthonormal-frame coordinates)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    area = float(u @ u * (v @ v) - (u @ v) ** 2)
    if not area > 1e-14 * max(float(u @ u * (v @ v)), np.finfo(float).tiny):
        raise AlgebraError("degenerate plane: u and v are linearly dependent")
    R = curvature(alg).riem
    return float(np.einsum("abcd,a,b,c,d->", R, u, v, v, u) / area)


def lambda2_matrix(pkg: CurvaturePackage) -> np.ndarray:
    """Curvature operator on Λ² in the basis ``e_i ∧ e_j`` (i < j).

    Its quadratic form on a unit decomposable ``u ∧ v`` is ``sec(u, v)``.
    """
    n = pkg.n
    iu, ju = np.triu_indices(n, 1)
    M = pkg.riem[iu[:, None], ju[:, None], ju[None, :], iu[None, :]]
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SectionalScan:
    coordinate_plane_values: dict[tuple[int, int], float]
    sampled_min: float
    sampled_max: float
    lambda2_eig_bounds: tuple[float, float]
    samples: int
    seed: int

    def positive_plane_found(self, tol: float = 0.0) -> bool:
        return self.sampled_max > tol


def sectional_scan(alg: MetricLieAlgebra, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED) -> SectionalScan:
    """Coordinate planes plus ``samples`` random planes, and Λ² eigenvalue bounds.

    Coordinate-plane keys are 1-based index pairs.
    """
    pkg = curvature(alg)
    n = pkg.n
    R = pkg.riem
    coord = {(i + 1, j + 1): float(R[i, j, j, i]) for i in range(n) for j in range(i + 1, n)}
    values = list(coord.values())
    if n >= 2 and samples > 0:
        rng = np.random.default_rng(seed)
        U = rng.standard_normal((samples, n))
        V = rng.standard_normal((samples, n))
        values.extend(_plane_values(R, U, V).tolist())
    if n >= 2:
        ev = symmetric_eigvals(lambda2_matrix(pkg))
        bounds = (float(ev[0]), float(ev[-1]))
    else:
        bounds = (0.0, 0.0)
    lo = float(min(values)) if values else 0.0
    hi = float(max(values)) if values else 0.0
    return SectionalScan(coord, lo, hi, bounds, samples, seed)


# -- oracles ------------------------------------------------------------------


def two_step_split(alg: MetricLieAlgebra, tol: float = TOL_RANK) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal bases (columns) of ``v = z^⊥`` and ``z = [n, n]`` for a two-step algebra."""
    on = alg.orthonormalized()
    rep = structure_report(on, tol)
    if not (rep.is_nilpotent and rep.step == 2):
        raise AlgebraError(f"algebra is not two-step nilpotent (step {rep.step})")
    Z = rep.derived_subalgebra_basis
    U, s, _ = np.linalg.svd(Z, full_matrices=True)
    V = U[:, Z.shape[1]:]
    return V, Z


def ricci_two_step_oracle(alg: MetricLieAlgebra, split: tuple[np.ndarray, np.ndarray] | None = None) -> np.ndarray:
    """Ricci of a two-step nilpotent metric from block sums over an adapted frame."""
    V, Z = two_step_split(alg) if split is None else split
    q = V.shape[1]
    B = np.hstack([V, Z])
    C = np.einsum("ia,jb,ijk,kc->abc", B, B, alg.orthonormalized().dense, B)
    cz = C[:q, :q, q:]
    Rv = -0.5 * np.einsum("ika,jka->ij", cz, cz)
    Rz = 0.25 * np.einsum("ija,ijb->ab", cz, cz)
    Rp = np.zeros_like(C[0])
    Rp[:q, :q] = Rv
    Rp[q:, q:] = Rz
    return B @ Rp @ B.T


@dataclass(frozen=True)
class MomentMapRicci:
    ric_mm: np.ndarray
    scal_mm: float


def ricci_moment_map_oracle(alg: MetricLieAlgebra) -> MomentMapRicci:
    """Ricci of a nilpotent metric as a quarter of the moment map.

    ``<m(mu), E_ab> = <pi(E_ab) mu, mu>`` with the inner product on brackets
    summed over all ordered index pairs.
    """
    on = alg.orthonormalized()
    if not structure_report(on).is_nilpotent:
        raise AlgebraError("moment-map oracle requires a nilpotent algebra")
    n = on.n
    if n < 2:
        return MomentMapRicci(np.zeros((n, n)), 0.0)
    L = derivation_operator(on)
    m = (2.0 * L.T @ on.c.ravel()).reshape(n, n)
    m = 0.5 * (m + m.T)
    mu_sq = 2.0 * float(np.sum(on.c**2))
    return MomentMapRicci(0.25 * m, -0.25 * mu_sq)


# -- sign-convention self-check ---------------------------------------------------


def _self_check() -> None:
    global _FLIP_34
    nil3 = MetricLieAlgebra.from_brackets(3, {(1, 2): {3: 1.0}})
    C = nil3.dense
    expected_ric = np.diag([-0.5, -0.5, 0.5])
    for flip in (False, True):
        _FLIP_34 = flip
        R = _riemann_from(C, connection(nil3))
        if abs(R[0, 1, 1, 0] + 0.75) < 1e-12 and np.allclose(_ricci_from(R), expected_ric, atol=1e-12):
            return
    raise RuntimeError("curvature sign convention self-check failed")


_self_check()

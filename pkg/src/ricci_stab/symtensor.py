"""Curvature operators acting on symmetric 2-tensors, as explicit matrices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any

import numpy as np

from .curvature import CurvaturePackage, lambda2_matrix
from .eigen import symmetric_eig

KINDS = ("rho", "ric_compose", "q", "weitzenboeck", "lambda2")


@dataclass(frozen=True, eq=False)
class SymBasis:
    """Frobenius-orthonormal basis ``E_ii, (E_ij + E_ji)/√2`` (i < j) of Sym²."""

    n: int

    @property
    def N(self) -> int:
        return self.n * (self.n + 1) // 2

    @cached_property
    def pairs(self) -> list[tuple[int, int]]:
        return [(i, i) for i in range(self.n)] + [(i, j) for i in range(self.n) for j in range(i + 1, self.n)]

    @cached_property
    def matrix(self) -> np.ndarray:
        """``B`` of shape ``(n*n, N)``: column ``a`` is element ``a`` flattened row-major."""
        n = self.n
        B = np.zeros((n * n, self.N))
        r = 1.0 / np.sqrt(2.0)
        for a, (i, j) in enumerate(self.pairs):
            if i == j:
                B[i * n + i, a] = 1.0
            else:
                B[i * n + j, a] = r
                B[j * n + i, a] = r
        B.setflags(write=False)
        return B

    @property
    def elements(self) -> list[np.ndarray]:
        return [self.matrix[:, a].reshape(self.n, self.n) for a in range(self.N)]

    def coords(self, h: np.ndarray) -> np.ndarray:
        return self.matrix.T @ np.asarray(h, dtype=float).ravel()

    def tensor(self, x: np.ndarray) -> np.ndarray:
        return (self.matrix @ x).reshape(self.n, self.n)


@lru_cache(maxsize=32)
def sym_basis(n: int) -> SymBasis:
    return SymBasis(n)


@dataclass(frozen=True, eq=False)
class SymOperator:
    mat: np.ndarray
    basis: SymBasis | None
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        m = np.array(self.mat, dtype=float)
        m = 0.5 * (m + m.T)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    def apply(self, h: np.ndarray) -> np.ndarray:
        if self.basis is None:
            raise ValueError("operator on Λ² has no Sym² action")
        return self.basis.tensor(self.mat @ self.basis.coords(h))

    def to_json(self) -> dict[str, Any]:
        w, _ = sym_spectrum(self)
        return {"kind": self.kind, "n": None if self.basis is None else self.basis.n, "matrix": self.mat.tolist(), "eigenvalues": w.tolist()}


def _restrict(op4: np.ndarray, n: int) -> np.ndarray:
    B = sym_basis(n).matrix
    return B.T @ op4.reshape(n * n, n * n) @ B


def _rho_matrix(pkg: CurvaturePackage) -> np.ndarray:
    # (R̊h)_ij = sum_pq R[i,p,q,j] h_pq, as a map on flattened n×n matrices
    n = pkg.n
    op4 = np.transpose(pkg.riem, (0, 3, 1, 2))
    return _restrict(op4, n)


def _ric_compose_matrix(pkg: CurvaturePackage) -> np.ndarray:
    n = pkg.n
    eye = np.eye(n)
    op = 0.5 * (np.kron(pkg.ric, eye) + np.kron(eye, pkg.ric.T))
    return _restrict(op, n)


def rho_operator(pkg: CurvaturePackage) -> SymOperator:
    """``h -> R̊h`` on Sym²."""
    return SymOperator(_rho_matrix(pkg), sym_basis(pkg.n), "rho")


def ric_compose_operator(pkg: CurvaturePackage) -> SymOperator:
    """``h -> ½(Ric h + h Ric)``, the symmetric part of ``h -> Ric∘h``."""
    return SymOperator(_ric_compose_matrix(pkg), sym_basis(pkg.n), "ric_compose")


def q_operator(pkg: CurvaturePackage) -> SymOperator:
    """Self-adjoint operator of ``Q(h) = <R̊h + Ric∘h, h>``."""
    return SymOperator(_rho_matrix(pkg) + _ric_compose_matrix(pkg), sym_basis(pkg.n), "q")


def weitzenboeck_operator(pkg: CurvaturePackage) -> SymOperator:
    """``h -> -2R̊h + Ric h + h Ric``."""
    return SymOperator(-2.0 * _rho_matrix(pkg) + 2.0 * _ric_compose_matrix(pkg), sym_basis(pkg.n), "weitzenboeck")


def lambda2_operator(pkg: CurvaturePackage) -> SymOperator:
    return SymOperator(lambda2_matrix(pkg), None, "lambda2")


def sym_spectrum(op: SymOperator) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (columns, in basis coordinates)."""
    return symmetric_eig(op.mat)


def max_eigenvalue(op: SymOperator) -> float:
    w, _ = sym_spectrum(op)
    return float(w[-1]) if w.size else 0.0


def evaluate_form(op: SymOperator, h: np.ndarray) -> float:
    """``<op(h), h>`` for symmetric ``h``."""
    h = np.asarray(h, dtype=float)
    if op.basis is None:
        raise ValueError("evaluate_form needs a Sym² operator")
    if h.shape != (op.basis.n, op.basis.n):
        raise ValueError(f"h has shape {h.shape}, expected {(op.basis.n, op.basis.n)}")
    if np.abs(h - h.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(h).max(initial=0.0)):
        raise ValueError("h is not symmetric")
    x = op.basis.coords(0.5 * (h + h.T))
    return float(x @ op.mat @ x)

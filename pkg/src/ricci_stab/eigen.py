"""Dense symmetric eigensolver: cyclic Jacobi rotations in fixed row order."""

from __future__ import annotations

import numba
import numpy as np

MAX_SWEEPS = 50
OFF_REL = 1e-12
RESIDUAL_REL = 1e-9


class EigenError(ArithmeticError):
    """Input not symmetric, or the iteration did not converge."""


@numba.njit(cache=True)
def _off_norm(A):
    n = A.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += A[i, j] * A[i, j]
    return np.sqrt(s)


@numba.njit(cache=True)
def _jacobi_sweeps(A, V, target, max_sweeps):
    n = A.shape[0]
    sweeps = 0
    off = _off_norm(A)
    while off >= target and sweeps < max_sweeps:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
        sweeps += 1
        off = _off_norm(A)
    return sweeps, off


def symmetric_eig(M: np.ndarray, check: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of ``M``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise EigenError(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    if not np.all(np.isfinite(M)):
        raise EigenError("matrix has non-finite entries")
    norm = float(np.linalg.norm(M))
    asym = float(np.abs(M - M.T).max())
    if asym > OFF_REL * max(norm, np.finfo(float).tiny):
        raise EigenError(f"matrix is not symmetric (max asymmetry {asym:.3g})")
    A = np.ascontiguousarray(0.5 * (M + M.T))
    V = np.eye(n)
    sweeps, off = _jacobi_sweeps(A, V, OFF_REL * norm, MAX_SWEEPS)
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    w, V = w[order], np.ascontiguousarray(V[:, order])
    if check and norm > 0.0:
        res = float(np.linalg.norm(M @ V - V * w, axis=0).max())
        if res > RESIDUAL_REL * norm:
            raise EigenError(f"Jacobi iteration stalled after {sweeps} sweeps (residual {res:.3g}, off-diagonal {off:.3g})")
    return w, V


def symmetric_eigvals(M: np.ndarray) -> np.ndarray:
    return symmetric_eig(M)[0]


def max_eigenvalue(M: np.ndarray) -> float:
    return float(symmetric_eig(M)[0][-1])

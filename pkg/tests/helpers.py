"""Shared builders for randomized tests."""

import numpy as np

from ricci_stab import construct
from ricci_stab.algebra import semidirect_product


def random_two_step(rng, p, q):
    """Two-step algebra from random skew J-maps (Jacobi holds automatically)."""
    maps = []
    for _ in range(p):
        a = rng.standard_normal((q, q))
        maps.append(a - a.T)
    return construct.two_step_from_jmaps(construct.JMapSet.of(maps))


def lambda2_extension(A):
    """Matrix of the derivation of free2(q) induced by A in gl(q)."""
    q = A.shape[0]
    pairs = [(i, j) for i in range(q) for j in range(i + 1, q)]
    m = len(pairs)
    D = np.zeros((q + m, q + m))
    D[:q, :q] = A
    # [A u_i, u_j] + [u_i, A u_j] expanded in the z basis
    for b, (i, j) in enumerate(pairs):
        for a, (k, l) in enumerate(pairs):
            D[q + a, q + b] = A[k, i] * (l == j) - A[l, i] * (k == j) + A[l, j] * (k == i) - A[k, j] * (l == i)
    return D


def random_solvable(rng, q=3, rank=1):
    """free2(q) extended by commuting derivations induced from diagonal matrices."""
    base = construct.free_two_step(q)
    maps = [lambda2_extension(np.diag(rng.standard_normal(q))) for _ in range(rank)]
    return semidirect_product(base, maps, np.eye(rank))


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_symmetric(rng, n):
    h = rng.standard_normal((n, n))
    return h + h.T


def random_algebra(rng):
    kind = rng.integers(4)
    if kind == 0:
        return random_two_step(rng, int(rng.integers(1, 3)), int(rng.integers(2, 5)))
    if kind == 1:
        return random_solvable(rng, q=3, rank=int(rng.integers(1, 3)))
    if kind == 2:
        return construct.lauret_curve(float(rng.uniform(0.05, 0.95)))
    return construct.mu11_raw()


NILPOTENT_CATALOG = [
    "nil3", "abelian(1)", "abelian(4)", "mu11_raw", "mu11_diagonalized", "lauret_curve(0.1)", "lauret_curve(0.7)",
    "free2(2)", "free2(3)", "free2(4)", "heis(1,4)", "heis(2,4)", "heis(3,4)", "heis(3,8)", "h3_plus_r(2)", "h3_plus_h3",
    "heis_plus_r(1,4)",
]
TWO_STEP_CATALOG = [
    "nil3", "free2(2)", "free2(3)", "free2(4)", "heis(1,2)", "heis(1,4)", "heis(2,4)", "heis(3,4)", "heis(3,8)",
    "h3_plus_r(1)", "h3_plus_r(3)", "h3_plus_h3", "heis_plus_r(1,4)",
]
SOLITON_CATALOG = [
    "nil3", "abelian(3)", "mu11_diagonalized", "lauret_curve(0.5)", "nil3_family(0.3)", "nil3_family(-0.6)",
    "abelian_ex1", "abelian_ex2", "free2(3)", "heis(3,4)", "h3_plus_r(1)",
]

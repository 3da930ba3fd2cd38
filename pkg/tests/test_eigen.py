import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import random_orthogonal, random_symmetric
from ricci_stab.eigen import EigenError, max_eigenvalue, symmetric_eig, symmetric_eigvals


def test_diagonal_is_sorted():
    w, V = symmetric_eig(np.diag([3.0, -1.0, 2.0]))
    assert np.array_equal(w, [-1.0, 2.0, 3.0])
    assert np.allclose(np.abs(V), np.eye(3)[:, [1, 2, 0]])


def test_two_by_two():
    w = symmetric_eigvals(np.array([[2.0, 1.0], [1.0, 2.0]]))
    assert np.allclose(w, [1.0, 3.0])


def test_zero_and_empty():
    w, V = symmetric_eig(np.zeros((4, 4)))
    assert not w.any() and np.array_equal(V, np.eye(4))
    w, V = symmetric_eig(np.zeros((0, 0)))
    assert w.shape == (0,)


def test_one_by_one():
    assert max_eigenvalue(np.array([[-2.5]])) == -2.5


def test_repeated_eigenvalues(rng):
    Q = random_orthogonal(rng, 6)
    lam = np.array([1.0, 1.0, 1.0, -2.0, -2.0, 5.0])
    M = Q @ np.diag(lam) @ Q.T
    w, V = symmetric_eig(M)
    assert np.allclose(w, np.sort(lam), atol=1e-12)
    assert np.allclose(V.T @ V, np.eye(6), atol=1e-12)


@pytest.mark.parametrize(
    "M",
    [np.array([[1.0, 2.0], [0.0, 1.0]]), np.ones((2, 3)), np.array([[np.nan, 0.0], [0.0, 1.0]])],
)
def test_rejects_bad_input(M):
    with pytest.raises(EigenError):
        symmetric_eig(M)


def test_matches_numpy(rng):
    for n in (3, 10, 40):
        M = random_symmetric(rng, n)
        assert np.allclose(symmetric_eigvals(M), np.linalg.eigvalsh(M), atol=1e-10 * np.linalg.norm(M))


@given(st.integers(1, 30), st.integers(0, 2**32 - 1), st.floats(1e-6, 1e6))
def test_reconstruction_property(n, seed, scale):
    rng = np.random.default_rng(seed)
    M = scale * random_symmetric(rng, n)
    w, V = symmetric_eig(M)
    norm = np.linalg.norm(M)
    assert np.linalg.norm(V @ np.diag(w) @ V.T - M) <= 1e-9 * norm
    assert np.abs(V.T @ V - np.eye(n)).max() <= 1e-10
    assert np.all(np.diff(w) >= 0)


@given(st.integers(0, 2**32 - 1))
def test_trace_and_frobenius_preserved(seed):
    rng = np.random.default_rng(seed)
    M = random_symmetric(rng, 12)
    w = symmetric_eigvals(M)
    assert w.sum() == pytest.approx(np.trace(M), abs=1e-9 * np.linalg.norm(M))
    assert np.sum(w**2) == pytest.approx(np.sum(M**2), rel=1e-10)

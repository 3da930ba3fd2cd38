import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import random_algebra, random_orthogonal, random_symmetric
from ricci_stab import construct
from ricci_stab.algebra import change_basis
from ricci_stab.curvature import curvature
from ricci_stab.soliton import detect_soliton
from ricci_stab.symtensor import (
    SymOperator,
    evaluate_form,
    lambda2_operator,
    max_eigenvalue,
    q_operator,
    rho_operator,
    ric_compose_operator,
    sym_basis,
    sym_spectrum,
    weitzenboeck_operator,
)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_basis_is_orthonormal(n):
    B = sym_basis(n).matrix
    assert B.shape == (n * n, n * (n + 1) // 2)
    assert np.allclose(B.T @ B, np.eye(B.shape[1]))
    for E in sym_basis(n).elements:
        assert np.array_equal(E, E.T)


def test_coords_roundtrip(rng):
    h = random_symmetric(rng, 4)
    b = sym_basis(4)
    assert np.allclose(b.tensor(b.coords(h)), h)
    assert np.linalg.norm(b.coords(h)) == pytest.approx(np.linalg.norm(h))


def _rho_direct(R, h):
    return np.einsum("ipqj,pq->ij", R, h)


@given(st.integers(0, 2**32 - 1))
def test_rho_matches_direct_contraction(seed):
    rng = np.random.default_rng(seed)
    pkg = curvature(random_algebra(rng))
    h = random_symmetric(rng, pkg.n)
    assert np.allclose(rho_operator(pkg).apply(h), _rho_direct(pkg.riem, h), atol=1e-12 * max(1.0, np.abs(pkg.riem).max()) * np.abs(h).max())


@given(st.integers(0, 2**32 - 1))
def test_operator_relations(seed):
    rng = np.random.default_rng(seed)
    pkg = curvature(random_algebra(rng))
    n = pkg.n
    h = random_symmetric(rng, n)
    rho, rc = rho_operator(pkg), ric_compose_operator(pkg)
    assert np.allclose(rho.apply(np.eye(n)), pkg.ric, atol=1e-12)
    assert np.allclose(rc.apply(h), 0.5 * (pkg.ric @ h + h @ pkg.ric), atol=1e-12 * np.abs(h).max() * max(1.0, np.abs(pkg.ric).max()))
    assert np.allclose(q_operator(pkg).mat, rho.mat + rc.mat)
    assert np.allclose(weitzenboeck_operator(pkg).mat, -2 * rho.mat + 2 * rc.mat)
    q_direct = float(np.sum((_rho_direct(pkg.riem, h) + pkg.ric @ h) * h))
    assert evaluate_form(q_operator(pkg), h) == pytest.approx(q_direct, rel=1e-9, abs=1e-9)


def test_operators_are_symmetric(rng):
    pkg = curvature(construct.mu11_raw())
    for op in (rho_operator(pkg), q_operator(pkg), weitzenboeck_operator(pkg), lambda2_operator(pkg)):
        assert np.array_equal(op.mat, op.mat.T)


def test_nil3_spectra():
    pkg = curvature(construct.nil3())
    assert max_eigenvalue(q_operator(pkg)) == pytest.approx(0.5687, abs=5e-4)
    w, V = sym_spectrum(rho_operator(pkg))
    assert np.allclose(V.T @ V, np.eye(6))


def test_abelian_operators_vanish():
    pkg = curvature(construct.abelian(3))
    assert max_eigenvalue(q_operator(pkg)) == 0.0


@given(st.integers(0, 2**32 - 1))
def test_spectrum_orthogonal_invariance(seed):
    rng = np.random.default_rng(seed)
    alg = random_algebra(rng)
    Q = random_orthogonal(rng, alg.n)
    a = sym_spectrum(q_operator(curvature(alg)))[0]
    b = sym_spectrum(q_operator(curvature(change_basis(alg, Q))))[0]
    assert np.allclose(a, b, atol=1e-9 * max(1.0, np.abs(a).max()))


def test_evaluate_form_errors():
    op = q_operator(curvature(construct.nil3()))
    with pytest.raises(ValueError):
        evaluate_form(op, np.ones((2, 2)))
    with pytest.raises(ValueError):
        evaluate_form(op, np.triu(np.ones((3, 3))))
    with pytest.raises(ValueError):
        evaluate_form(lambda2_operator(curvature(construct.nil3())), np.eye(3))


def test_unknown_kind():
    with pytest.raises(ValueError):
        SymOperator(np.eye(2), None, "bogus")


def test_to_json_shape():
    doc = rho_operator(curvature(construct.nil3())).to_json()
    assert doc["kind"] == "rho" and doc["n"] == 3
    assert len(doc["eigenvalues"]) == 6


def _extension_case(ref):
    base = construct.catalog(ref)
    rep = detect_soliton(base)
    ext = construct.einstein_rank_one_extension(base)
    return rep, ext


EXTENSION_BASES = ["nil3", "mu11_diagonalized", "lauret_curve(0.3)", "free2(3)", "abelian(3)", "heis(1,4)"]


@pytest.mark.parametrize("ref", EXTENSION_BASES)
def test_rho_restriction_identity(ref, rng):
    rep, ext = _extension_case(ref)
    n = rep.algebra.n
    D, trD = rep.D, rep.trace_D
    rho_n = rho_operator(curvature(rep.algebra))
    rho_s = rho_operator(curvature(ext))
    for _ in range(100):
        h = random_symmetric(rng, n)
        H = np.zeros((n + 1, n + 1))
        H[:n, :n] = h
        lhs = evaluate_form(rho_s, H)
        rhs = evaluate_form(rho_n, h) + (np.trace(D @ h @ D @ h) - np.sum(D * h) ** 2) / trD
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("ref", EXTENSION_BASES)
def test_ric_restriction_identity(ref, rng):
    rep, ext = _extension_case(ref)
    n = rep.algebra.n
    rc_n = ric_compose_operator(curvature(rep.algebra))
    rc_s = ric_compose_operator(curvature(ext))
    for _ in range(100):
        h = random_symmetric(rng, n)
        H = np.zeros((n + 1, n + 1))
        H[:n, :n] = h
        lhs = evaluate_form(rc_s, H)
        rhs = evaluate_form(rc_n, h) - np.trace(rep.D @ h @ h)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)

import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import random_orthogonal, random_solvable, random_two_step
from ricci_stab import construct
from ricci_stab.algebra import (
    AlgebraError,
    DerivationSet,
    MetricLieAlgebra,
    ParseError,
    ad_star,
    algebra_document,
    change_basis,
    derivation_defect,
    derivation_space,
    jacobi_defect,
    jacobi_worst,
    load_algebra,
    mean_curvature,
    semidirect_product,
    structure_report,
)

NIL3_DOC = {"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"3": 1.0}}]}
BROKEN_DOC = {
    "dim": 3,
    "brackets": [
        {"i": 1, "j": 2, "coeffs": {"2": 1.0}},
        {"i": 1, "j": 3, "coeffs": {"3": 1.0}},
        {"i": 2, "j": 3, "coeffs": {"1": 1.0}},
    ],
}


def test_load_nil3():
    alg = load_algebra(NIL3_DOC)
    assert alg.n == 3
    assert jacobi_defect(alg) == 0.0
    assert alg.dense[0, 1, 2] == 1.0
    assert alg.dense[1, 0, 2] == -1.0


def test_load_accepts_json_text():
    alg = load_algebra(json.dumps(NIL3_DOC))
    assert alg.dense[0, 1, 2] == 1.0


def test_load_rejects_jacobi_failure():
    with pytest.raises(AlgebraError, match=r"\(1, 2, 3\)"):
        load_algebra(BROKEN_DOC)


def test_broken_jacobi_cyclic_sum_is_2e1():
    alg = MetricLieAlgebra.from_brackets(3, {(1, 2): {2: 1.0}, (1, 3): {3: 1.0}, (2, 3): {1: 1.0}})
    defect, triple = jacobi_worst(alg)
    assert triple == (1, 2, 3)
    assert defect == pytest.approx(2.0)
    from ricci_stab.algebra import jacobi_tensor

    assert np.allclose(jacobi_tensor(alg)[0, 1, 2], [2.0, 0.0, 0.0])


def test_load_abelian():
    alg = load_algebra({"dim": 4, "brackets": []})
    assert jacobi_defect(alg) == 0.0
    assert not alg.c.any()


@pytest.mark.parametrize(
    "doc, exc",
    [
        ({"brackets": []}, ParseError),
        ({"dim": "three"}, ParseError),
        ({"dim": 3, "brackets": [{"i": 1, "coeffs": {"3": 1}}]}, ParseError),
        ({"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"x": 1}}]}, ParseError),
        ({"dim": 3, "brackets": [{"i": 2, "j": 1, "coeffs": {"3": 1}}]}, AlgebraError),
        ({"dim": 3, "brackets": [{"i": 1, "j": 4, "coeffs": {"3": 1}}]}, AlgebraError),
        ({"dim": 3, "brackets": [{"i": 1, "j": 2, "coeffs": {"5": 1}}]}, AlgebraError),
        ({"dim": 2, "gram": [[1, 0], [0, -1]]}, AlgebraError),
        ({"dim": 2, "gram": [[1, 0.5], [0, 1]]}, AlgebraError),
        ({"dim": 2, "gram": [[1, 0, 0]]}, AlgebraError),
    ],
)
def test_load_errors(doc, exc):
    with pytest.raises(exc):
        load_algebra(doc)


def test_load_invalid_json_text():
    with pytest.raises(ParseError):
        load_algebra("{not json")


def test_load_normalizes_gram():
    doc = dict(NIL3_DOC, gram=[[4.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]], label="stretched")
    alg = load_algebra(doc)
    assert alg.has_identity_gram
    assert "orthonormalized" in alg.label
    # e1 has length 2, so f1 = e1 / 2 and [f1, f2] = f3 / 2
    assert alg.dense[0, 1, 2] == pytest.approx(0.5)


def test_document_roundtrip():
    alg = construct.lauret_curve(0.3)
    back = load_algebra(algebra_document(alg))
    assert np.array_equal(back.c, alg.c)
    assert back.label == alg.label


def test_document_keeps_gram():
    alg = construct.nil3_family(0.2)
    doc = algebra_document(alg)
    assert "gram" in doc
    assert doc["dim"] == 4


def test_instances_are_immutable():
    alg = construct.nil3()
    with pytest.raises(ValueError):
        alg.c[0, 0] = 1.0
    with pytest.raises(ValueError):
        alg.dense[0, 0, 0] = 1.0


def test_ad_star_abelian_is_zero():
    alg = construct.abelian(3)
    assert not ad_star(alg, np.array([1.0, 2.0, 3.0])).any()


def test_ad_star_identity_gram_is_transpose():
    alg = construct.nil3()
    x = np.array([0.3, -1.0, 2.0])
    assert np.allclose(ad_star(alg, x), alg.ad(x).T)


def test_ad_star_is_gram_adjoint(rng):
    alg = construct.nil3_family(0.4)
    G = alg.gram
    x, y, z = rng.standard_normal((3, 4))
    lhs = (ad_star(alg, x) @ y) @ G @ z
    rhs = y @ G @ alg.bracket(x, z)
    assert lhs == pytest.approx(rhs)


def test_derivation_defect_examples():
    nil3 = construct.nil3()
    assert derivation_defect(nil3, np.diag([1.0, 1.0, 2.0])) == 0.0
    assert derivation_defect(nil3, np.diag([1.0, 0.0, 0.0])) == pytest.approx(1.0)
    assert derivation_defect(construct.abelian(3), np.arange(9.0).reshape(3, 3)) == 0.0


def test_structure_report_nil3():
    rep = structure_report(construct.nil3())
    assert rep.is_nilpotent and rep.step == 2 and rep.is_unimodular
    assert rep.derived_dim == 1


def test_structure_report_abelian():
    rep = structure_report(construct.abelian(3))
    assert rep.is_nilpotent and rep.step == 1 and rep.derived_dim == 0


@pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
def test_structure_report_lauret_curve(t):
    rep = structure_report(construct.lauret_curve(t))
    assert rep.is_nilpotent and rep.step == 6
    assert rep.derived_dim == 5


def test_structure_report_rank_one_extension():
    ext = construct.einstein_rank_one_extension(construct.nil3())
    rep = structure_report(ext)
    assert rep.is_solvable and not rep.is_nilpotent
    assert not rep.is_unimodular
    B = rep.derived_subalgebra_basis
    assert B.shape == (4, 3)
    # span(e1, e2, e3): projector onto it is diag(1,1,1,0)
    assert np.allclose(B @ B.T, np.diag([1.0, 1.0, 1.0, 0.0]))


def test_structure_report_semisimple():
    so3 = MetricLieAlgebra.from_brackets(3, {(1, 2): {3: 1.0}, (2, 3): {1: 1.0}, (1, 3): {2: -1.0}})
    assert jacobi_defect(so3) == pytest.approx(0.0)
    rep = structure_report(so3)
    assert not rep.is_solvable and not rep.is_nilpotent and rep.step is None


def test_change_basis_identity():
    alg = construct.mu11_raw()
    assert np.array_equal(change_basis(alg, np.eye(6)).c, alg.c)


def test_change_basis_mu11_matches_diagonalized_constants():
    out = change_basis(construct.mu11_raw(), construct.mu11_change_of_basis())
    assert np.allclose(out.c, construct.mu11_diagonalized().c, atol=1e-14)
    # [X1, X3] = (3/sqrt10) X5
    assert out.dense[0, 2, 4] == pytest.approx(3.0 / np.sqrt(10.0))


def test_change_basis_swap():
    P = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    out = change_basis(construct.nil3(), P)
    assert out.dense[0, 1, 2] == -1.0


def test_change_basis_singular():
    with pytest.raises(AlgebraError):
        change_basis(construct.nil3(), np.diag([1.0, 0.0, 1.0]))


@given(st.integers(0, 2**32 - 1))
def test_change_basis_roundtrip(seed):
    rng = np.random.default_rng(seed)
    alg = random_two_step(rng, 2, 3)
    G = rng.standard_normal((5, 5)) + 3 * np.eye(5)
    back = change_basis(change_basis(alg, G), np.linalg.inv(G))
    assert np.allclose(back.c, alg.c, atol=1e-10 * max(1.0, np.abs(alg.c).max()))


@given(st.integers(0, 2**32 - 1))
def test_structure_report_invariant_under_change_basis(seed):
    rng = np.random.default_rng(seed)
    alg = random_solvable(rng, rank=1) if seed % 2 else construct.lauret_curve(0.4)
    G = rng.standard_normal((alg.n, alg.n)) + 3 * np.eye(alg.n)
    a, b = structure_report(alg), structure_report(change_basis(alg, G))
    assert (a.is_nilpotent, a.step, a.derived_dim, a.is_solvable) == (b.is_nilpotent, b.step, b.derived_dim, b.is_solvable)


def test_semidirect_nil3_rank_one():
    s = semidirect_product(construct.nil3(), [0.5 * np.diag([1.0, 1.0, 2.0])], np.eye(1))
    assert s.n == 4
    rep = structure_report(s)
    assert rep.is_solvable and not rep.is_nilpotent
    # [A, e3] = e3
    assert s.dense[3, 2, 2] == pytest.approx(1.0)


def test_semidirect_zero_maps_is_direct_sum():
    s = semidirect_product(construct.nil3(), [np.zeros((3, 3)), np.zeros((3, 3))], np.eye(2))
    assert s.n == 5
    assert not s.dense[3:].any() and not s.dense[:, 3:].any()
    assert s.dense[0, 1, 2] == 1.0


def test_semidirect_rejects_non_derivation():
    with pytest.raises(AlgebraError, match="not a derivation"):
        semidirect_product(construct.nil3(), [np.diag([1.0, 0.0, 0.0])], np.eye(1))


def test_semidirect_rejects_noncommuting():
    a = np.zeros((2, 2))
    a[0, 1] = 1.0
    with pytest.raises(AlgebraError, match="commute"):
        semidirect_product(construct.abelian(2), [a, a.T], np.eye(2))


def test_derivation_set_flags_symmetry():
    ders = DerivationSet.of(construct.nil3(), [np.diag([1.0, 1.0, 2.0]), np.array([[0, 1.0, 0], [0, 0, 0], [0, 0, 0]])])
    assert ders.symmetric_flag == (True, False)


@given(st.integers(0, 2**32 - 1))
def test_semidirect_of_nilpotent_is_solvable(seed):
    rng = np.random.default_rng(seed)
    assert structure_report(random_solvable(rng, rank=int(rng.integers(1, 3)))).is_solvable


def test_mean_curvature_rank_one_extension():
    s = semidirect_product(construct.nil3(), [0.5 * np.diag([1.0, 1.0, 2.0])], np.eye(1))
    assert np.allclose(mean_curvature(s), [0, 0, 0, 2.0])


@pytest.mark.parametrize("ref", ["nil3", "lauret_curve(0.5)", "free2(3)", "abelian(3)"])
def test_mean_curvature_nilpotent_is_zero(ref):
    alg = construct.catalog(ref)
    assert np.allclose(mean_curvature(alg), 0.0)
    assert structure_report(alg).is_unimodular


def test_mean_curvature_diagonal_abelian():
    A = construct.ABELIAN_EX2_A
    H = mean_curvature(construct.abelian_ex2())
    expected = np.concatenate([np.zeros(4), A.sum(axis=0)])
    assert np.allclose(H, expected)


def test_mean_curvature_non_identity_gram():
    t = 0.3
    alg = construct.nil3_family(t)
    H = mean_curvature(alg)
    g = alg.gram[3, 3]
    r = np.sqrt(1 - t * t)
    assert np.allclose(H, [0, 0, 0, 2 * (t + r) / g])


@pytest.mark.parametrize("n", [2, 3, 4])
def test_derivation_space_abelian(n):
    assert derivation_space(construct.abelian(n)).shape == (n * n, n, n)


def test_derivation_space_nil3():
    basis = derivation_space(construct.nil3())
    assert basis.shape[0] == 6
    for M in basis:
        assert derivation_defect(construct.nil3(), M) <= 1e-8


@pytest.mark.parametrize("ref", ["mu11_diagonalized", "lauret_curve(0.4)", "free2(3)", "heis(3,4)"])
def test_derivation_space_members_are_derivations(ref):
    alg = construct.catalog(ref)
    basis = derivation_space(alg)
    assert basis.shape[0] >= 1
    for M in basis:
        assert derivation_defect(alg, M) <= 1e-8
    # Frobenius-orthonormal
    flat = basis.reshape(len(basis), -1)
    assert np.allclose(flat @ flat.T, np.eye(len(basis)), atol=1e-10)


def test_orthonormalized_is_isometric(rng):
    alg = construct.nil3_family(-0.4)
    on = alg.orthonormalized()
    assert on.has_identity_gram
    Q = random_orthogonal(rng, 4)
    # orthogonal change of an orthonormal presentation keeps the structure series
    assert structure_report(change_basis(on, Q)).derived_dim == 3

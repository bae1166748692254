import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from osculant.jet import Jet, jet_variable, num_coeffs
from osculant.linalg import (
    AsymmetryError,
    RankTolerance,
    clamp_psd,
    fix_signs,
    mgs_pivoted,
    mgs_pivoted_jets,
    project_off,
    project_onto,
    rank_positive,
    span_distance,
    sym_eigen,
)


def exact_rank(rows):
    """Row-echelon rank over the rationals."""
    M = [[Fraction(int(x)) for x in row] for row in rows]
    rank = 0
    ncols = len(M[0]) if M else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(M)) if M[i][col] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        for i in range(len(M)):
            if i != rank and M[i][col] != 0:
                f = M[i][col] / M[rank][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------- tolerance


@pytest.mark.parametrize("bad", [0.0, 1.0, -1e-3, 2.0])
def test_rank_tolerance_range(bad):
    with pytest.raises(ValueError):
        RankTolerance(bad)


def test_rank_tolerance_default():
    assert RankTolerance().rel_tol == 1e-8


# ---------------------------------------------------------------- eigen


def test_sym_eigen_identity():
    w, V = sym_eigen(np.eye(3))
    np.testing.assert_allclose(w, [1, 1, 1])
    np.testing.assert_allclose(V.T @ V, np.eye(3), atol=1e-14)


def test_sym_eigen_diagonal():
    w, V = sym_eigen(np.diag([1.0, 4.0]))
    np.testing.assert_allclose(w, [4, 1])
    np.testing.assert_allclose(np.abs(V), [[0, 1], [1, 0]], atol=1e-15)


def test_sym_eigen_two_by_two():
    w, V = sym_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
    np.testing.assert_allclose(w, [3, 1], atol=1e-14)
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(V[:, 0], [s, s], atol=1e-14)
    np.testing.assert_allclose(V[:, 1], [s, -s], atol=1e-14)


def test_sym_eigen_rejects_asymmetric_and_nonsquare():
    with pytest.raises(AsymmetryError):
        sym_eigen(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        sym_eigen(np.zeros((2, 3)))


def test_sym_eigen_empty():
    w, V = sym_eigen(np.zeros((0, 0)))
    assert w.shape == (0,) and V.shape == (0, 0)


@pytest.mark.parametrize("size", [1, 2, 5, 13, 40])
def test_sym_eigen_reconstruction_against_numpy(size):
    rng = np.random.default_rng(size)
    B = rng.normal(size=(size, size))
    A = (B + B.T) / 2
    w, V = sym_eigen(A)
    norm = np.abs(A).max()
    assert np.abs(A - V @ np.diag(w) @ V.T).max() <= 1e-9 * (1 + norm)
    assert np.abs(V.T @ V - np.eye(size)).max() <= 1e-10
    np.testing.assert_allclose(w, np.sort(np.linalg.eigvalsh(A))[::-1], atol=1e-10 * (1 + norm))
    for i in range(size):
        assert np.linalg.norm(A @ V[:, i] - w[i] * V[:, i]) <= 1e-10 * (1 + np.linalg.norm(A))


def test_sym_eigen_small_eigenvalues_relative_accuracy():
    # graded PSD matrix: Jacobi keeps the tiny eigenvalue accurate
    Q, _ = np.linalg.qr(np.random.default_rng(3).normal(size=(4, 4)))
    lam = np.array([1.0, 1e-3, 1e-6, 1e-9])
    A = Q @ np.diag(lam) @ Q.T
    w, _ = sym_eigen(A)
    np.testing.assert_allclose(w, lam, atol=1e-15)


def test_fix_signs_convention():
    V = np.array([[-1e-9, 0.0], [-2.0, 1.0]])
    out = fix_signs(V)
    np.testing.assert_array_equal(out[:, 0], [1e-9, 2.0])
    np.testing.assert_array_equal(out[:, 1], [0.0, 1.0])


# ---------------------------------------------------------------- ranks


def test_rank_positive_examples():
    assert rank_positive(np.array([3.0, 1.0, 1e-17]), RankTolerance(1e-8)) == 2
    assert rank_positive(np.zeros(3)) == 0
    assert rank_positive(np.array([-1.0, -2.0])) == 0
    assert rank_positive(np.zeros(0)) == 0


def test_clamp_psd():
    np.testing.assert_array_equal(clamp_psd(np.array([2.0, -1e-12]), 1.0), [2.0, 0.0])
    with pytest.raises(ValueError):
        clamp_psd(np.array([1.0, -1e-3]), 1.0)


# ---------------------------------------------------------------- Gram-Schmidt


def test_mgs_example_xy_plane():
    cols = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    basis, pivots = mgs_pivoted(cols)
    assert pivots == [0, 2]
    assert basis.shape == (3, 2)
    np.testing.assert_allclose(np.abs(basis), [[1, 0], [0, 1], [0, 0]], atol=1e-15)


def test_mgs_all_zero():
    basis, pivots = mgs_pivoted(np.zeros((4, 3)))
    assert basis.shape == (4, 0) and pivots == []


def test_mgs_tie_break_lowest_index():
    basis, pivots = mgs_pivoted(np.eye(3)[:, [2, 0, 1]])
    assert pivots == [0, 1, 2]


def test_mgs_against_basis():
    against = np.array([[1.0], [0.0], [0.0]])
    cols = np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 0.0]])
    basis, pivots = mgs_pivoted(cols, against=against)
    assert pivots == [0]
    np.testing.assert_allclose(np.abs(basis[:, 0]), [0, 1, 0], atol=1e-15)


def test_mgs_extremal_second_order_partials():
    from osculant.immersion import eval_jet, extremal_example
    from osculant.jet import jet_extract_derivative, multi_indices

    im = extremal_example(2, 2)
    jets = eval_jet(im, [0.0, 0.0], 2)
    cols = np.column_stack([jet_extract_derivative(jets, a) for a in multi_indices(2, 2) if sum(a) >= 1])
    basis, _ = mgs_pivoted(cols)
    assert basis.shape[1] == 5
    assert np.linalg.matrix_rank(cols) == 5


@settings(max_examples=200, deadline=None)
@given(
    st.integers(1, 8).flatmap(
        lambda m: st.integers(1, 8).flatmap(
            lambda p: st.lists(st.lists(st.integers(-3, 3), min_size=p, max_size=p), min_size=m, max_size=m)
        )
    )
)
def test_mgs_rank_matches_exact_row_echelon(rows):
    basis, pivots = mgs_pivoted(np.array(rows, dtype=float))
    assert basis.shape[1] == exact_rank(rows)
    assert len(pivots) == basis.shape[1]
    if basis.shape[1]:
        assert np.abs(basis.T @ basis - np.eye(basis.shape[1])).max() <= 1e-10


def test_mgs_low_rank_products():
    rng = np.random.default_rng(11)
    for trial in range(50):
        m, p, k = 8, 8, int(rng.integers(0, 6))
        A = rng.integers(-2, 3, size=(m, k)) @ rng.integers(-2, 3, size=(k, p))
        basis, _ = mgs_pivoted(A.astype(float))
        assert basis.shape[1] == exact_rank(A.tolist())


# ---------------------------------------------------------------- jet Gram-Schmidt


def vec_jet(components):
    return Jet(components[0].num_vars, components[0].order, np.stack([c.coeffs for c in components]))


def test_mgs_jets_unit_direction_field():
    u = jet_variable(0, 0.0, 1, 2)
    zero = u * 0.0
    res = mgs_pivoted_jets([vec_jet([1.0 + u, zero])])
    assert len(res.frame) == 1
    np.testing.assert_allclose(res.frame[0].coeffs, [[1, 0, 0], [0, 0, 0]], atol=1e-15)


def test_mgs_jets_circle_tangent():
    from osculant.jet import jet_elementary

    u = jet_variable(0, 0.0, 1, 2)
    tangent = vec_jet([-jet_elementary(u, "sin"), jet_elementary(u, "cos")])
    res = mgs_pivoted_jets([tangent])
    Y = res.frame[0]
    np.testing.assert_allclose(Y.coeffs[:, 0], [0, 1], atol=1e-15)
    np.testing.assert_allclose(Y.coeffs[:, 1], [-1, 0], atol=1e-15)


def test_mgs_jets_dependent_columns():
    u = jet_variable(0, 0.3, 1, 2)
    v = vec_jet([u, u * u, 1.0 + u])
    res = mgs_pivoted_jets([v, v * 2.0])
    assert len(res.frame) == 1 and res.pivots == [0]


def test_mgs_jets_constant_terms_match_pointwise():
    rng = np.random.default_rng(5)
    n, R, m = 2, 2, 4
    N = num_coeffs(n, R)
    cols = [Jet(n, R, rng.normal(size=(m, N))) for _ in range(3)]
    res = mgs_pivoted_jets(cols)
    basis, pivots = mgs_pivoted(np.column_stack([c.value for c in cols]))
    assert res.pivots == pivots
    np.testing.assert_allclose(res.values(), basis, atol=1e-12)
    # orthonormal as fields, up to truncation
    for i, a in enumerate(res.frame):
        for j, b in enumerate(res.frame):
            g = (a * b).coeffs.sum(axis=0)
            expect = np.zeros(N)
            expect[0] = float(i == j)
            np.testing.assert_allclose(g, expect, atol=1e-12)


def test_mgs_jets_levels_are_graded():
    e = np.eye(3)
    n, R = 1, 1
    cols = [Jet(n, R, np.column_stack([e[:, k], np.zeros(3)])) for k in (0, 1, 2)]
    res = mgs_pivoted_jets(cols, levels=[1, 0, 1])
    assert res.level_of == [0, 1, 1]
    assert res.pivots[0] == 1


# ---------------------------------------------------------------- projections


def test_projection_examples():
    e1 = np.array([[1.0], [0.0]])
    np.testing.assert_array_equal(project_off(np.array([1.0, 1.0]), e1), [0, 1])
    np.testing.assert_array_equal(project_onto(np.array([1.0, 2.0]), np.zeros((2, 0))), [0, 0])
    b = np.array([[0.6], [0.8]])
    np.testing.assert_allclose(project_onto(b[:, 0], b), b[:, 0])


def test_projection_dimension_mismatch():
    with pytest.raises(ValueError):
        project_onto(np.ones(3), np.ones((2, 1)))


def test_span_distance_examples():
    e1 = np.array([[1.0], [0.0]])
    e2 = np.array([[0.0], [1.0]])
    d = np.array([[1.0], [1.0]]) / math.sqrt(2)
    assert span_distance(e1, e1) == 0.0
    assert span_distance(e1, e2) == pytest.approx(math.sqrt(2))
    assert span_distance(e1, d) == pytest.approx(1.0)
    assert span_distance(np.zeros((2, 0)), np.zeros((2, 0))) == 0.0
    with pytest.raises(ValueError):
        span_distance(e1, np.ones((3, 1)))


def test_span_distance_ignores_basis_choice():
    rng = np.random.default_rng(2)
    A, _ = np.linalg.qr(rng.normal(size=(6, 3)))
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    assert span_distance(A, A @ Q) < 1e-14

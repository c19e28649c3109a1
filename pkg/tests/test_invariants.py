import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shrinkcheck.invariants import (ShapeOperator, SymmetryViolation, charpoly_residual, check_newton_identities,
                                    diagonal_frame_gradients, finite_difference_gradients, invariants,
                                    principal_curvatures, random_h4, random_symmetric_h3)

fracs = st.fractions(min_value=-20, max_value=20, max_denominator=12)
floats = st.floats(-2, 2, allow_nan=False)


def _sym(entries):
    a11, a12, a13, a22, a23, a33 = entries
    return ShapeOperator(a11, a12, a13, a22, a23, a33)


def test_rank_one_projection():
    r = invariants(ShapeOperator.diag(1, 0, 0))
    assert (r.H, r.S, r.f3, r.f4) == (1, 1, 1, 1)


def test_zero_matrix():
    r = invariants(ShapeOperator.diag(0, 0, 0))
    assert (r.H, r.S, r.f3, r.f4) == (0, 0, 0, 0)


def test_two_equal_curvatures():
    k = 1 / math.sqrt(2)
    r = invariants(ShapeOperator.diag(k, k, 0.0))
    assert r.H == pytest.approx(math.sqrt(2))
    assert r.S == pytest.approx(1)
    assert r.f3 == pytest.approx(math.sqrt(2) / 2)
    assert r.f4 == pytest.approx(0.5)


@pytest.mark.parametrize("diag", [(1, 1, 1), (2, -1, -1)])
def test_newton_residuals_exact_examples(diag):
    r = check_newton_identities(ShapeOperator.diag(*map(Fraction, diag)))
    assert (r.f3, r.f4) == (0, 0)


@settings(max_examples=500, deadline=None)
@given(st.lists(fracs, min_size=6, max_size=6))
def test_newton_identities_exact_on_rationals(entries):
    r = check_newton_identities(_sym(entries))
    assert r.f3 == 0 and r.f4 == 0


@settings(max_examples=500, deadline=None)
@given(st.lists(floats, min_size=6, max_size=6))
def test_newton_identities_float(entries):
    assert max(check_newton_identities(_sym(entries)).relative) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(st.lists(fracs, min_size=6, max_size=6))
def test_power_sums_match_eigenvalue_oracle(entries):
    A = _sym(entries)
    ev = np.linalg.eigvalsh(np.array(A.matrix(), dtype=float))
    r = invariants(A)
    want = [np.sum(ev ** k) for k in (1, 2, 3, 4)]
    got = [float(x) for x in (r.H, r.S, r.f3, r.f4)]
    assert np.allclose(got, want, rtol=1e-9, atol=1e-9)


@settings(max_examples=300, deadline=None)
@given(st.lists(floats, min_size=6, max_size=6), st.integers(0, 2**32 - 1))
def test_orthogonal_invariance(entries, seed):
    A = _sym(entries)
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(3, 3)))
    B = q @ np.array(A.matrix(), dtype=float) @ q.T
    a, b = invariants(A), invariants(ShapeOperator.from_matrix(B, tol=1e-12))
    norm = max(1.0, max(abs(x) for x in entries))
    for k, x, y in zip((1, 2, 3, 4), (a.H, a.S, a.f3, a.f4), (b.H, b.S, b.f3, b.f4)):
        assert abs(x - y) <= 1e-12 * (3 * norm) ** k


@settings(max_examples=300, deadline=None)
@given(st.lists(floats, min_size=6, max_size=6))
def test_principal_curvatures(entries):
    A = _sym(entries)
    pc = list(principal_curvatures(A))
    assert pc == sorted(pc, reverse=True)
    assert np.allclose(pc, sorted(np.linalg.eigvalsh(np.array(A.matrix(), dtype=float)), reverse=True), atol=1e-7)
    for lam in pc:
        assert charpoly_residual(A, lam) <= 1e-9 * (1 + abs(lam) ** 3)


def test_diag_power_sums_exact():
    lam = (Fraction(1, 2), Fraction(-3), Fraction(5, 7))
    r = invariants(ShapeOperator.diag(*lam))
    assert (r.H, r.S, r.f3, r.f4) == tuple(sum(x ** k for x in lam) for k in (1, 2, 3, 4))


def test_asymmetric_matrix_rejected():
    with pytest.raises(SymmetryViolation):
        ShapeOperator.from_matrix([[0, 1, 0], [0, 0, 0], [0, 0, 0]])


# diagonal-frame derivative formulas -----------------------------------

def test_zero_third_derivatives():
    g = diagonal_frame_gradients((1.0, -0.5, 0.25), np.zeros((3, 3, 3)))
    for name in ("grad_f3", "hess_f3", "grad_f4", "hess_f4"):
        assert not np.any(getattr(g, name))


def test_only_mixed_third_derivative_leaves_grad_f4_zero():
    h3 = np.zeros((3, 3, 3))
    for p in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        h3[p] = 1.0
    g = diagonal_frame_gradients((1.0, -1.0, 0.0), h3)
    assert np.array_equal(g.grad_f4, np.zeros(3))


def test_non_symmetric_h3_rejected():
    h3 = np.zeros((3, 3, 3))
    h3[0, 1, 2] = 1.0
    with pytest.raises(SymmetryViolation):
        diagonal_frame_gradients((1, 0, 0), h3)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_formulas_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    lam, h3, h4 = rng.uniform(-2, 2, 3), random_symmetric_h3(rng), random_h4(rng)
    exact, approx = diagonal_frame_gradients(lam, h3, h4), finite_difference_gradients(lam, h3, h4)
    for name in ("grad_f3", "hess_f3", "grad_f4", "hess_f4"):
        a, b = getattr(exact, name), getattr(approx, name)
        assert np.max(np.abs(a - b)) <= 1e-6 * max(1.0, np.max(np.abs(a)))

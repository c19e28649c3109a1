import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from shrinkcheck.models import (CylinderModel, DomainError, RadicalScalar, classification_table, float_agreement,
                                format_table, model_invariants, shrinker_residual)


def test_three_sphere():
    inv = model_invariants(CylinderModel(3, 3))
    assert inv.S == 1 and inv.f4 == Fraction(1, 3)


def test_flat_space():
    inv = model_invariants(CylinderModel(0, 3))
    assert inv.S == 0 and inv.f4 == 0 and inv.H == 0


def test_two_sphere_cylinder():
    inv = model_invariants(CylinderModel(2, 3))
    assert inv.S == 1 and inv.f4 == Fraction(1, 2) and inv.H == RadicalScalar.sqrt(2)


def test_table_n3():
    rows = classification_table(3)
    assert [(r.S, r.f4) for r in rows] == [(0, 0), (1, 1), (1, Fraction(1, 2)), (1, Fraction(1, 3))]
    assert all(r.residual == 0 for r in rows)
    assert [r.name for r in rows] == ["R^3", "S^1(1) x R^2", "S^2(sqrt(2)) x R^1", "S^3(sqrt(3))"]


def test_table_n1():
    assert [r.name for r in classification_table(1)] == ["R^1", "S^1(1)"]


def test_table_n2():
    assert [(r.S, r.f4) for r in classification_table(2)] == [(0, 0), (1, 1), (1, Fraction(1, 2))]


@pytest.mark.parametrize("m", [0, 1, 3])
def test_shrinker_residual_zero(m):
    assert shrinker_residual(CylinderModel(m, 3)) == 0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40).flatmap(lambda n: st.tuples(st.integers(1, n), st.just(n))))
def test_family_invariants(mn):
    m, n = mn
    c = CylinderModel(m, n)
    inv = model_invariants(c)
    assert inv.S == 1 and inv.f4 * m == 1
    assert shrinker_residual(c) == 0
    assert float(inv.H) == pytest.approx(math.sqrt(m))
    assert float(inv.f3) == pytest.approx(m ** -0.5)


@pytest.mark.parametrize("m", range(4))
def test_matches_matrix_path(m):
    assert float_agreement(CylinderModel(m, 3)) <= 1e-12


@pytest.mark.parametrize("m, n", [(4, 3), (-1, 3), (0, 0)])
def test_domain(m, n):
    with pytest.raises(DomainError):
        CylinderModel(m, n)


def test_table_domain():
    with pytest.raises(DomainError):
        classification_table(0)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 50), st.fractions(-100, 100, max_denominator=20), st.fractions(-100, 100, max_denominator=20),
       st.integers(0, 5))
def test_radical_arithmetic_against_floats(m, p, q, k):
    a = RadicalScalar.sqrt(m) * p
    b = RadicalScalar(q)
    fa, fb = float(p) * math.sqrt(m), float(q)
    assert float(a * b) == pytest.approx(fa * fb, rel=1e-12, abs=1e-9)
    assert float(a ** k) == pytest.approx(fa ** k, rel=1e-12, abs=1e-9)
    c = RadicalScalar.sqrt(m) * q
    assert float(a - c) == pytest.approx(fa - float(q) * math.sqrt(m), rel=1e-12, abs=1e-9)
    if math.isqrt(m) ** 2 != m and p and q:
        with pytest.raises(DomainError):
            a + b
    if p:
        assert a * a.inverse() == 1
    assert (RadicalScalar.sqrt(m) ** 2) == m


def test_radical_printing():
    assert str(RadicalScalar.sqrt(2)) == "sqrt(2)"
    assert str(RadicalScalar.sqrt(4)) == "2"


def test_format_table_aligned():
    text = format_table(classification_table(3))
    lines = text.splitlines()
    assert len(lines) == 5 and lines[0].split() == ["m", "model", "H", "S", "f3", "f4", "residual"]

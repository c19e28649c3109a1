import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shrinkcheck.deriv import (IndexCollision, NotAScalar, hessian_H, hessian_H_closed_form, hypothesis, l_op,
                               laplacian, nabla, normalize, ricci_normalize, verify_corpus, verify_identity)
from shrinkcheck.dsl import load_identity_file, parse, to_source
from shrinkcheck.deriv import default_corpus_path
from shrinkcheck.props import random_expression
from shrinkcheck.tensor import constant
from _oracles import eval_poly, shrinker_jet

seeds = st.integers(0, 2**32 - 1)
JETS = [shrinker_jet(s) for s in range(4)]


def _same(a, b, free=()):
    return all(np.array_equal(eval_poly(a, d, free), eval_poly(b, d, free)) for d in JETS)


# derivative table -----------------------------------------------------

def test_nabla_of_h_appends_index():
    assert nabla(parse("h[i,j]"), "k") == parse("h[i,j,k]")
    assert nabla(parse("h[i,j,k]"), "l") == parse("h[i,j,k,l]")


def test_nabla_of_mean_curvature():
    assert nabla(parse("H"), "i") == parse("h[i,k]*T[k]")


def test_nabla_of_position_square():
    got = nabla(parse("T[i]*T[i]"), "k")
    assert got == parse("2*T[k] - 2*H*h[k,a]*T[a]")


def test_nabla_of_constant_is_zero():
    assert nabla(constant(7), "k").is_zero()


def test_nabla_label_collision():
    with pytest.raises(IndexCollision):
        nabla(parse("T[k]"), "k")


def test_drift_needs_scalar():
    with pytest.raises(NotAScalar):
        l_op(parse("T[i]"))
    with pytest.raises(NotAScalar):
        laplacian(parse("h[i,j]"))


def test_drift_of_constant():
    assert l_op(constant(3)).is_zero()


# properties -----------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(seeds)
def test_leibniz(seed):
    rng = random.Random(seed)
    a, b = random_expression(rng, 2, 2, 3), random_expression(rng, 2, 2, 3)
    diff = nabla(a * b, "k") - nabla(a, "k") * b - a * nabla(b, "k")
    assert normalize(diff).is_zero()


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_scalar_hessian_symmetric(seed):
    f = random_expression(random.Random(seed), 2, 2, 3)
    assert normalize(nabla(nabla(f, "k"), "l") - nabla(nabla(f, "l"), "k")).is_zero()


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_normalize_preserves_value_on_shrinker_data(seed):
    # rank-2 inputs keep second derivatives within the h4 data
    f = random_expression(random.Random(seed), 2, 2, 2)
    g = nabla(nabla(f, "k"), "l")
    assert _same(g, normalize(g), ("k", "l"))


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_hessian_symmetric_numerically(seed):
    f = random_expression(random.Random(seed), 2, 2, 2)
    g = nabla(nabla(f, "k"), "l")
    assert _same(g, g.rename({"k": "l", "l": "k"}), ("k", "l"))


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_normalize_idempotent(seed):
    f = random_expression(random.Random(seed), 2, 3, 4, ("i",))
    once = normalize(f)
    assert normalize(once) == once


# Ricci commutation ----------------------------------------------------

def test_ricci_commutator_is_quintic_in_h():
    diff = ricci_normalize(parse("h[i,j,k,l] - h[i,j,l,k]"))
    assert not diff.is_zero()
    assert {sum(1 for n, _ in f if n == "h") for _, _, f in diff.monomials()} == {3}
    assert _same(parse("h[i,j,k,l] - h[i,j,l,k]"), diff, ("i", "j", "k", "l"))


def test_ricci_normalize_fixes_normal_forms():
    e = normalize(parse("h[a,b]*h[a,b,c,d]*h[c,d]"))
    assert ricci_normalize(e) == e


# named identities -----------------------------------------------------

def test_hessian_of_mean_curvature():
    assert normalize(hessian_H("i", "j") - hessian_H_closed_form("i", "j")).is_zero()
    assert _same(hessian_H("i", "j"), hessian_H_closed_form("i", "j"), ("i", "j"))


def test_hessian_trace_is_drift_plus_gradient_term():
    # tr Hess H = L H + <T, grad H>
    trace = hessian_H("i", "j") * parse("delta[i,j]")
    want = l_op(parse("H")) + parse("T[k]") * nabla(parse("H"), "k")
    assert normalize(trace - want).is_zero()


@pytest.mark.parametrize("name", ["drift-H", "drift-X2", "drift-S", "hessian-H", "closed-f3", "closed-f4",
                                  "grad-f3", "hess-f3", "grad-f4", "hess-f4"])
def test_corpus_identity_holds_numerically(name):
    (st_,) = [s for s in load_identity_file(default_corpus_path()) if s.name == name]
    lhs, rhs = parse(st_.lhs), parse(st_.rhs)
    free = tuple(sorted(lhs.free_indices))
    assert _same(lhs, rhs, free)


def test_corpus_reduces_to_zero():
    reports = verify_corpus()
    assert len(reports) >= 6
    assert [r.name for r in reports if not r.ok] == []
    assert all(r.residual.is_zero() for r in reports)


def test_gradh_drift_needs_constant_S():
    (st_,) = [s for s in load_identity_file(default_corpus_path()) if s.name == "drift-gradh"]
    rep = verify_identity("drift-gradh-bare", parse(st_.lhs), parse(st_.rhs))
    assert rep.status == "residual_nonzero" and not rep.residual.is_zero()
    assert verify_identity("with", parse(st_.lhs), parse(st_.rhs), ("SConstant",)).ok


def test_report_json_shape():
    rep = verify_identity("lemma-H", l_op(parse("H")), parse("H*(1 - S)"))
    assert rep.to_json().keys() == {"name", "status", "residual", "rewrite_count", "elapsed_ms"}
    assert rep.to_json()["residual"] == "0"


def test_wrong_identity_reports_residual():
    rep = verify_identity("bad", l_op(parse("H")), parse("H"))
    assert rep.status == "residual_nonzero"
    assert to_source(rep.residual) == to_source(normalize(parse("-H*S")))


def test_S_constant_rules():
    assert not normalize(parse("h[a,b]*h[a,b,k]")).is_zero()
    assert normalize(parse("h[a,b]*h[a,b,k]"), ("SConstant",)).is_zero()
    second = parse("h[a,b]*h[a,b,k,l] + h[a,b,k]*h[a,b,l]")
    assert normalize(second, ("SConstant",)).is_zero()


def test_unknown_hypothesis():
    with pytest.raises(KeyError):
        hypothesis("NoSuchRule")

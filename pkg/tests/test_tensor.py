import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shrinkcheck import KERNEL
from shrinkcheck.props import random_monomial
from shrinkcheck.tensor import (MalformedIndexing, TensorPolynomial, _canon_py, canonicalize, constant, dim,
                                factor, fresh_labels)
from _oracles import eval_poly, eval_terms, random_data

seeds = st.integers(0, 2**32 - 1)
FREE = ((), ("i",), ("i", "j"))


def _raw_terms(rng, free):
    return [(rng.randint(-5, 5) or 1, rng.randint(0, 1), random_monomial(rng, 4, 4, free))
            for _ in range(rng.randint(1, 3))]


@settings(max_examples=200, deadline=None)
@given(seeds, st.sampled_from(FREE))
def test_canonical_form_evaluates_like_raw_terms(seed, free):
    rng = random.Random(seed)
    raw = _raw_terms(rng, free)
    poly = TensorPolynomial.from_terms(raw)
    data = random_data(np.random.default_rng(seed))
    out = tuple(sorted(free))
    assert np.array_equal(eval_poly(poly, data, out), eval_terms(raw, data, out))


@settings(max_examples=300, deadline=None)
@given(seeds, st.sampled_from(FREE))
def test_canonicalize_idempotent(seed, free):
    rng = random.Random(seed)
    poly = TensorPolynomial.from_terms(_raw_terms(rng, free))
    once = canonicalize(poly)
    assert canonicalize(once) == once == poly


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_dummy_relabeling_is_invisible(seed):
    rng = random.Random(seed)
    facs = random_monomial(rng, 4, 4, ("i",))
    dummies = sorted({l for _, idx in facs for l in idx} - {"i"})
    fresh = fresh_labels(set(dummies) | {"i"}, len(dummies))
    rng.shuffle(fresh)
    ren = dict(zip(dummies, fresh))
    moved = tuple((n, tuple(ren.get(l, l) for l in idx)) for n, idx in facs)
    assert TensorPolynomial.from_terms([(1, 0, facs)]) == TensorPolynomial.from_terms([(1, 0, moved)])


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_kernels_agree(seed):
    from shrinkcheck.tensor import canon_factors

    rng = random.Random(seed)
    enc = [(1, rng.choice((2, 3)), *(rng.randrange(6) for _ in range(rng.choice((2, 3, 4))))) for _ in range(3)]
    assert canon_factors(enc, 1) == _canon_py.canon_factors(enc, 1)


def test_kernel_selected():
    assert KERNEL in ("cython", "python")


def test_codazzi_slot_symmetry():
    assert factor("h", "i", "j", "k") == factor("h", "k", "i", "j")
    assert factor("h", "i", "j", "k", "l") == factor("h", "k", "j", "i", "l")
    assert factor("h", "i", "j", "k", "l") != factor("h", "i", "j", "l", "k")


def test_delta_contraction_and_trace():
    assert factor("delta", "i", "j") * factor("h", "j", "k") == factor("h", "i", "k")
    assert factor("delta", "a", "a") == dim()


def test_arithmetic_identities():
    a = factor("h", "a", "b") * factor("h", "a", "b")
    assert a - a == TensorPolynomial()
    assert (a + 1) * 2 == a.scale(2) + constant(2)
    assert (a * a) == a ** 2


def test_triple_index_rejected():
    with pytest.raises(MalformedIndexing):
        TensorPolynomial.from_terms([(1, 0, (("h", ("a", "a")), ("T", ("a",))))])


def test_mismatched_free_indices_rejected():
    with pytest.raises(MalformedIndexing):
        factor("T", "i") + factor("T", "j")

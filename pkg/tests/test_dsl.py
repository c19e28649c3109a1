import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shrinkcheck.dsl import (ArityError, ParseError, UnknownSymbol, load_identity_file, parse,
                             parse_identity_file, to_source)
from shrinkcheck.props import random_expression
from _oracles import eval_poly, random_data

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=300, deadline=None)
@given(seeds, st.sampled_from(((), ("i",), ("i", "j"))))
def test_print_parse_round_trip(seed, free):
    e = random_expression(random.Random(seed), 3, 4, 4, free)
    assert parse(to_source(e)) == e


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_scalar_names_match_matrix_traces(seed):
    data = random_data(np.random.default_rng(seed))
    a, t = data[("h", 2)], data[("T", 1)]
    oracle = {
        "H": np.trace(a),
        "S": np.sum(a * a),
        "f3": np.trace(a @ a @ a),
        "f4": np.trace(a @ a @ a @ a),
        "X2": np.trace(a) ** 2 + t @ t,
        "e3": round(np.linalg.det(a)),
        "e4": 0,
        "n": 3,
    }
    for name, want in oracle.items():
        assert eval_poly(parse(name), data, ()) == want, name


def test_codazzi_difference_is_zero():
    assert to_source(parse("h[i,j,k]-h[i,k,j]")) == "0"


def test_printer_is_deterministic_and_rational():
    e = parse("1/2*T[i] - 3/4*h[i,a]*T[a]")
    assert to_source(e) == "1/2*T[i] - 3/4*h[i,a]*T[a]"
    assert dict(((f, c) for c, _, f in e.monomials()))[(("T", ("i",)),)] == Fraction(1, 2)


@pytest.mark.parametrize("src, exc, col", [
    ("h[i]", ArityError, 1),
    ("T[i,j]", ArityError, 1),
    ("foo[i]", UnknownSymbol, 1),
    ("h[i,j", ParseError, 6),
    ("1/0", ParseError, 3),
    ("h[i,j] h[j,k]", ParseError, 8),
    ("h[i,j]+T[i]", ParseError, 1),
    ("h[a,a]*T[a]", ParseError, 1),
])
def test_parse_errors(src, exc, col):
    with pytest.raises(exc) as info:
        parse(src)
    assert info.value.col == col


def test_identity_file_statements():
    text = ("# comment\n"
            "one : H == h[a,a]\n"
            "two : S == h[a,b]*h[b,a] \\\n"
            "      + 0 [given SConstant, dim3]\n")
    sts = parse_identity_file(text, "t.idt")
    assert [s.name for s in sts] == ["one", "two"]
    assert sts[1].hyps == ("SConstant", "dim3")
    assert parse(sts[1].lhs) == parse(sts[1].rhs)


def test_identity_file_errors_carry_location(tmp_path):
    f = tmp_path / "bad.idt"
    f.write_text("ok : H == H\n\nbroken H H\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_identity_file(f)
    assert info.value.line == 3 and info.value.origin == str(f)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_third_occurrence_of_a_label_is_rejected(seed):
    from shrinkcheck.props import random_monomial

    rng = random.Random(seed)
    facs = random_monomial(rng, 3, 4)
    src = "*".join(f"{n}[{','.join(i)}]" for n, i in facs)
    label = rng.choice([l for _, i in facs for l in i])
    with pytest.raises(ParseError):
        parse(f"{src}*T[{label}]")

import json
import re

import pytest
import sympy as sp

from shrinkcheck.cases import (CASES, ConstraintSet, LimitPoint, S, StepMismatch, UnknownCase, UnknownStep,
                               build_case, check_step, gradh_squared_polynomial, s_gap_check,
                               simons_terminal_polynomial, verify_all, verify_case)
from shrinkcheck.cases.chain import Chain

TAG = re.compile(r"^(2\.1-(1[3-9]|20)|3\.1-([1-9]|[1-4]\d|5[0-4])|Scenario [12]|Case [12]|Subcase 1\.[12])$")


@pytest.fixture(scope="module")
def reports():
    return {r.case: r for r in verify_all()}


def test_catalog_complete():
    assert CASES == ("scenario-1", "scenario-2", "case-1-sub-1.1", "case-1-sub-1.1-alt", "case-1-sub-1.2", "case-2")


def test_all_contradictions_confirmed(reports):
    assert {c: r.status for c, r in reports.items()} == {c: "contradiction_confirmed" for c in CASES}
    for r in reports.values():
        assert r.ok and all(s.ok for s in r.steps) and r.steps[-1].residual == "0"


def test_witness_scenario_1(reports):
    assert reports["scenario-1"].witness["relations"] == ["S = 0"]


def test_witness_sub_1_1(reports):
    w = reports["case-1-sub-1.1"].witness
    assert w["relations"] == ["S = 5/2", "S = 3/2"]


def test_witness_alt(reports):
    assert reports["case-1-sub-1.1-alt"].witness["relations"] == ["h123^2 = lam1^2/2", "h112^2 = 0"]


def test_witness_sub_1_2(reports):
    w = reports["case-1-sub-1.2"].witness
    assert w["relations"] == ["S = 2/3"]
    poly = sp.sympify(w["polynomials"][0].replace("^", "**"), locals={"S": S})
    assert sp.expand(poly - (S ** 2 / 10 - S / 15)) == 0


@pytest.mark.parametrize("case", ["scenario-2", "case-2"])
def test_witness_all_curvatures_vanish(reports, case):
    assert reports[case].witness["relations"] == ["lam1 = 0", "lam2 = 0", "lam3 = 0"]


def test_report_json_shape(reports):
    for r in reports.values():
        js = json.loads(json.dumps(r.to_json()))
        assert set(js) >= {"case", "status", "witness", "steps"}
        for step in js["steps"]:
            assert set(step) >= {"id", "paper_eq", "ok", "residual"}


def test_step_ids_unique(reports):
    for r in reports.values():
        ids = [s.id for s in r.steps]
        assert len(ids) == len(set(ids)), r.case


def test_nonzero_hypotheses_are_logged(reports):
    ids = [s.id for s in reports["case-1-sub-1.1"].steps]
    assert "lam1-nonzero" in ids
    assert any(i.endswith("h113-nonzero/hypothesis") for i in ids)


def test_deterministic(reports):
    fresh = json.dumps([r.to_json() for r in verify_all()])
    assert fresh == json.dumps([reports[c].to_json() for c in CASES])


# single steps ---------------------------------------------------------

def test_h123_squared_step():
    ok, residual = check_step("case-1-sub-1.1", "h123-squared")
    assert ok and residual == "0"


def test_ricci_pins_S():
    assert check_step("case-1-sub-1.1", "ricci-pins-S")


def test_h111_squared_step():
    assert check_step("case-1-sub-1.2", "h111-squared").ok


def test_unknown_step():
    with pytest.raises(UnknownStep):
        check_step("case-1-sub-1.1", "no-such-step")


@pytest.mark.parametrize("fn", [verify_case, build_case])
def test_unknown_case(fn):
    with pytest.raises(UnknownCase):
        fn("case-3")


def test_failed_step_raises_with_residual():
    c = Chain("probe", LimitPoint.generic())
    with pytest.raises(StepMismatch) as info:
        c.check("S-is-zero", "probe", S)
    assert info.value.step.residual == "S" and not info.value.step.ok


# constraint systems ---------------------------------------------------

@pytest.mark.parametrize("case", CASES)
def test_every_equation_tagged(case):
    cs = build_case(case)
    assert len(cs) > 0
    assert all(TAG.match(t) for t in cs.tags()), sorted(t for t in cs.tags() if not TAG.match(t))


def test_constraint_set_refuses_untagged():
    cs = ConstraintSet("x")
    with pytest.raises(ValueError):
        cs.add("e1", "", S)
    cs.add("e1", "3.1-1", S)
    with pytest.raises(ValueError):
        cs.add("e1", "3.1-1", S)


def _proportional(a, b):
    q = sp.cancel(sp.sympify(a) / sp.sympify(b))
    return q.is_number and q != 0


def test_sub_1_1_has_square_relation():
    eqs = [e for _, _, e in build_case("case-1-sub-1.1").equations]
    target = sp.sympify("4*h111**2 - h133**2")
    assert any(_proportional(e, target) for e in eqs if e != 0)


def test_scenario_1_pins_curvature():
    cs = build_case("scenario-1")
    assert cs.get("mean-curvature-zero") == sp.Symbol("mu")


def test_case_2_hessian_traces():
    cs = build_case("case-2")
    assert {"hessian-trace-11", "hessian-trace-22", "hessian-trace-33"} <= set(cs.ids())
    assert cs.get("hessian-trace-11").has(sp.Symbol("lam1"))


def test_always_present_families():
    tags = build_case("case-1-sub-1.2").tags()
    assert {f"3.1-{k}" for k in range(1, 11)} <= tags


# gap and terminal polynomial -------------------------------------------

def test_gradh_squared_is_S_times_S_minus_1():
    assert sp.expand(gradh_squared_polynomial() - S * (S - 1)) == 0


def test_s_gap():
    rep = s_gap_check()
    verdict = {e.S: (e.gradh_squared, e.admissible) for e in rep.entries}
    assert verdict[sp.Rational(1, 2)] == (sp.Rational(-1, 4), False)
    assert verdict[0][1] and verdict[1] == (0, True)
    assert rep.to_json()["admissible"] == "{0} U [1, oo)"


def test_simons_terminal_polynomial():
    p = simons_terminal_polynomial()
    assert sp.Poly(p, S) == sp.Poly(S * (3 - 2 * S), S)
    assert p.subs(S, sp.Rational(3, 2)) == 0
    assert p.subs(S, 1) == 1

"""One test per acceptance criterion; each prints a PASS/FAIL line and records it for the summary."""
import json
import subprocess
import sys
from contextlib import contextmanager

import sympy as sp

from conftest import ACCEPTANCE
from shrinkcheck.cases import S, simons_terminal_polynomial
from shrinkcheck.props import run_all


@contextmanager
def criterion(key: str, text: str):
    ACCEPTANCE[key] = (False, text)
    try:
        yield
    except BaseException:
        print(f"FAIL  [{key}] {text}")
        raise
    ACCEPTANCE[key] = (True, text)
    print(f"PASS  [{key}] {text}")


def _fresh(code: str) -> dict:
    """Run ``code`` in a new interpreter so no cache from other tests helps; it prints one JSON line."""
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def test_1_lemma_suite():
    with criterion(1, "drift identities for H, |X|^2, S and |grad h|^2 reduce to exactly zero in < 60 s"):
        res = _fresh(
            "import json, time\n"
            "from shrinkcheck.deriv import verify_corpus\n"
            "t = time.perf_counter(); reps = verify_corpus(); dt = time.perf_counter() - t\n"
            "print(json.dumps({'status': {r.name: r.status for r in reps}, 'seconds': dt}))")
        for name in ("drift-H", "drift-X2", "drift-S", "drift-gradh"):
            assert res["status"][name] == "reduced_to_zero", name
        assert res["seconds"] < 60


def test_2_scalar_chain():
    from shrinkcheck.deriv import verify_corpus

    with criterion(2, "f4 closed form at n=3 and its first four derivative chains reduce to exactly zero"):
        status = {r.name: r for r in verify_corpus()}
        for name in ("closed-f4", "chain-1", "chain-2", "chain-3", "chain-4"):
            assert status[name].ok and status[name].residual.is_zero(), name


def test_3_model_table():
    with criterion(3, "n=3 models give (S, f4) = (0,0),(1,1),(1,1/2),(1,1/3), residuals exactly 0, in < 1 s"):
        res = _fresh(
            "import json, time\n"
            "from shrinkcheck.models import classification_table\n"
            "t = time.perf_counter(); rows = classification_table(3); dt = time.perf_counter() - t\n"
            "print(json.dumps({'rows': [[str(r.S), str(r.f4), str(r.residual)] for r in rows], 'seconds': dt}))")
        assert res["rows"] == [["0", "0", "0"], ["1", "1", "0"], ["1", "1/2", "0"], ["1", "1/3", "0"]]
        assert res["seconds"] < 1


def test_4_case_catalog():
    with criterion(4, "all six cases return contradiction_confirmed with the expected witnesses, exact, in < 10 s"):
        res = _fresh(
            "import json, time\n"
            "from shrinkcheck.cases import verify_all\n"
            "t = time.perf_counter(); reps = verify_all(); dt = time.perf_counter() - t\n"
            "print(json.dumps({'reports': [r.to_json() for r in reps], 'seconds': dt}))")
        reps = {r["case"]: r for r in res["reports"]}
        assert {r["status"] for r in reps.values()} == {"contradiction_confirmed"} and len(reps) == 6
        lam_zero = ["lam1 = 0", "lam2 = 0", "lam3 = 0"]
        assert reps["scenario-1"]["witness"]["relations"] == ["S = 0"]
        assert reps["scenario-2"]["witness"]["relations"] == lam_zero
        assert reps["case-1-sub-1.1"]["witness"]["relations"] == ["S = 5/2", "S = 3/2"]
        assert reps["case-1-sub-1.1-alt"]["witness"]["relations"] == ["h123^2 = lam1^2/2", "h112^2 = 0"]
        assert reps["case-1-sub-1.2"]["witness"]["relations"] == ["S = 2/3"]
        assert reps["case-2"]["witness"]["relations"] == lam_zero
        assert all(s["ok"] for r in reps.values() for s in r["steps"])
        assert res["seconds"] < 10


def test_5_simons_terminal_polynomial():
    with criterion(5, "terminal Simons polynomial is exactly S(3 - 2S)"):
        p = simons_terminal_polynomial()
        assert sp.Poly(p, S) == sp.Poly(S * (3 - 2 * S), S)


def test_6_property_suites():
    with criterion(6, "Newton float <= 1e-9 (1000) and rational == 0 (1000), Leibniz and Hessian symmetry (1000), "
                      "canonicalize idempotence (10^4), finite differences <= 1e-6 (500)"):
        results = {r.name: r for r in run_all(1000, 0)}
        expected = {"newton-float": 1000, "newton-rational": 1000, "leibniz": 1000, "hessian-symmetry": 1000,
                    "canonicalize-idempotence": 10000, "fd-gradients": 500}
        assert {k: r.trials for k, r in results.items()} == expected
        assert results["newton-float"].worst <= 1e-9
        assert results["newton-rational"].worst == 0
        assert results["fd-gradients"].worst <= 1e-6
        assert all(r.ok for r in results.values()), [r.to_json() for r in results.values() if not r.ok]

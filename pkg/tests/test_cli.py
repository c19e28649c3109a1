import json
import subprocess
import sys

import pytest

from shrinkcheck.cli import run


def _run(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_simplify_codazzi(capsys):
    assert _run(capsys, "simplify", "h[i,j,k]-h[i,k,j]") == (0, "0\n", "")


def test_simplify_json(capsys):
    code, out, _ = _run(capsys, "--format", "json", "simplify", "h[j,i]")
    assert code == 0
    assert json.loads(out) == {"schema": "1", "command": "simplify", "input": "h[j,i]", "result": "h[i,j]"}


def test_simplify_parse_error(capsys):
    code, out, err = _run(capsys, "simplify", "h[i,j")
    assert code == 2 and out == "" and "expected ']'" in err


def test_verify_lemmas(capsys):
    code, out, _ = _run(capsys, "verify", "lemmas", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["schema"] == "1" and rep["ok"]
    assert len(rep["identities"]) >= 6
    assert {i["status"] for i in rep["identities"]} == {"reduced_to_zero"}


def test_verify_lemmas_failing_corpus(capsys, tmp_path):
    corpus = tmp_path / "bad.idt"
    corpus.write_text("good : H == h[a,a]\nbad : L(H) == H\n", encoding="utf-8")
    code, out, err = _run(capsys, "verify", "lemmas", "--corpus", str(corpus))
    assert code == 1
    assert "residual_nonzero" in out and "failed" in err


def test_verify_lemmas_broken_corpus(capsys, tmp_path):
    corpus = tmp_path / "broken.idt"
    corpus.write_text("nonsense\n", encoding="utf-8")
    assert _run(capsys, "verify", "lemmas", "--corpus", str(corpus))[0] == 2
    assert _run(capsys, "verify", "lemmas", "--corpus", str(tmp_path / "missing.idt"))[0] == 2


def test_verify_single_case(capsys):
    code, out, _ = _run(capsys, "verify", "cases", "--case", "scenario-1", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and [c["case"] for c in rep["cases"]] == ["scenario-1"]
    assert rep["cases"][0]["status"] == "contradiction_confirmed"


def test_verify_unknown_case(capsys):
    assert _run(capsys, "verify", "cases", "--case", "case-9")[0] == 2


def test_models_table_text(capsys):
    code, out, _ = _run(capsys, "models", "table", "--n", "3")
    assert code == 0 and len(out.splitlines()) == 5


def test_models_table_json(capsys):
    code, out, _ = _run(capsys, "--format", "json", "models", "table", "--n", "3")
    rows = json.loads(out)["rows"]
    assert [(r["S"], r["f4"]) for r in rows] == [("0", "0"), ("1", "1"), ("1", "1/2"), ("1", "1/3")]
    assert {r["shrinker_residual"] for r in rows} == {"0"}


@pytest.mark.parametrize("argv", [[], ["bogus"], ["models", "table"], ["models", "table", "--n", "x"],
                                  ["models", "table", "--n", "0"], ["props", "run", "--trials", "0"],
                                  ["--format", "yaml", "simplify", "H"]])
def test_usage_errors(capsys, argv):
    code, out, err = _run(capsys, *argv)
    assert code == 2 and out == "" and err


def test_out_file(capsys, tmp_path):
    dest = tmp_path / "table.json"
    code, out, _ = _run(capsys, "models", "table", "--n", "2", "--format", "json", "--out", str(dest))
    assert code == 0 and out == ""
    assert json.loads(dest.read_text())["n"] == 2


def test_props_deterministic(capsys):
    first = _run(capsys, "props", "run", "--trials", "10", "--seed", "5", "--format", "json")
    second = _run(capsys, "props", "run", "--trials", "10", "--seed", "5", "--format", "json")
    assert first == second and first[0] == 0
    suites = json.loads(first[1])["suites"]
    assert [s["name"] for s in suites] == ["newton-float", "newton-rational", "leibniz", "hessian-symmetry",
                                            "canonicalize-idempotence", "fd-gradients"]


def test_default_trials():
    from shrinkcheck.cli import build_parser

    args = build_parser().parse_args(["props", "run"])
    assert (args.trials, args.seed) == (1000, 0)


def test_no_color_and_console_script(tmp_path):
    env = {"NO_COLOR": "1", "PATH": "/usr/bin:/bin"}
    proc = subprocess.run([sys.executable, "-m", "shrinkcheck.cli", "verify", "cases", "--case", "case-2"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0
    assert "\x1b[" not in proc.stdout and proc.stdout.startswith("PASS  case-2")

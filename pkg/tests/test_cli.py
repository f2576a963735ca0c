import json
import subprocess
import sys
from pathlib import Path

import pytest

from szego_trace.cli import main, parse_range, UsageError

INPUTS = Path(__file__).resolve().parent.parent / "inputs"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_parse_range():
    assert parse_range("1..6", 8, "n") == [1, 2, 3, 4, 5, 6]
    assert parse_range("3", 8, "n") == [3]
    assert parse_range("1,3,5", 8, "n") == [1, 3, 5]
    for bad in ("0..2", "1..9", "a", ""):
        with pytest.raises(UsageError):
            parse_range(bad, 8, "n")


def test_res_lemma(capsys):
    code, rec = run_json(capsys, "res", "--op", "(rho)^-3", "--n", "3")
    assert code == 0
    assert rec["exact"] == "1/2" and abs(rec["numeric"] - 0.5) < 1e-9 and rec["status"] == "pass"


def test_res_identity_vanishes(capsys):
    code, rec = run_json(capsys, "res", "--op", "1", "--n", "4")
    assert code == 0 and rec["exact"] == "0"


def test_res_poles(capsys):
    code, rec = run_json(capsys, "res", "--op", "1", "--n", "2", "--poles", "2")
    assert rec["poles"] == [{"s": 2, "residue": "1"}, {"s": 1, "residue": "1"}]


def test_res_parse_error(capsys):
    code, out, err = run(capsys, "res", "--op", "(rho", "--n", "2")
    assert code == 2
    assert "column 5" in err
    lines = err.splitlines()
    assert lines[-1].index("^") == lines[-2].index("(") + 4
    code, rec = run_json(capsys, "res", "--op", "(rho", "--n", "2")
    assert code == 2 and rec["error"] == "ParseError" and rec["column"] == 5


def test_res_text_table(capsys):
    code, out, _ = run(capsys, "res", "--op", "(rho)^-2", "--n", "2", "--poles", "2")
    assert code == 0
    assert "exact    1" in out and "residue" in out


def test_verify_suites(capsys):
    code, rec = run_json(capsys, "verify", "c1", "--n", "1..3", "--d", "1..2")
    assert code == 0 and rec["status"] == "pass"
    assert rec["suites"][0]["criterion"] == 3
    code, rec = run_json(capsys, "verify", "identity", "--n", "1..6", "--order", "50")
    assert code == 0
    code, rec = run_json(capsys, "verify", "vanishing", "--n", "1..8")
    assert code == 0 and all(c["exact"] == "0" for c in rec["suites"][0]["cases"] if c["key"].endswith("d=0"))


def test_verify_bounds(capsys):
    assert run(capsys, "verify", "c1", "--n", "9")[0] == 2
    assert run(capsys, "verify", "c1", "--d", "4")[0] == 2
    assert run(capsys, "verify", "identity", "--order", "201")[0] == 2


def test_verify_deterministic(capsys):
    a = run(capsys, "verify", "logtrace", "--count", "30", "--seed", "4", "--format", "json")[1]
    b = run(capsys, "verify", "logtrace", "--count", "30", "--seed", "4", "--format", "json", "--jobs", "2")[1]
    assert a == b


def test_embed_s3(capsys):
    code, rec = run_json(capsys, "embed", str(INPUTS / "s3.json"))
    assert code == 0 and rec["R"] == "1" and rec["N"] == 2
    assert rec["max_form_deviation"] == 0 and rec["max_sphere_deviation"] == 0


def test_embed_two_xdy(capsys):
    code, rec = run_json(capsys, "embed", str(INPUTS / "two_xdy.json"))
    assert code == 0 and rec["R"] == "3" and rec["samples"] == 1000


def test_embed_corrupted(capsys):
    code, rec = run_json(capsys, "embed", str(INPUTS / "corrupted.json"))
    assert code == 1 and rec["status"] == "fail"


def test_embed_schema_error(capsys):
    code, rec = run_json(capsys, "embed", str(INPUTS / "malformed.json"))
    assert code == 2 and rec["path"] == "/pairs/0/1"


def test_embed_radius_too_small(capsys, tmp_path):
    f = tmp_path / "small.json"
    f.write_text(json.dumps({"params": ["u", "v"], "pairs": [["u", "v"]], "radius": 1}))
    code, rec = run_json(capsys, "embed", str(f))
    assert code == 1 and rec["error"] == "RadicandNonpositive"


def test_embed_bad_expression(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text(json.dumps({"params": ["u"], "pairs": [["u", "w"]]}))
    code, out, err = run(capsys, "embed", str(f))
    assert code == 2 and "unknown parameter" in err


def test_gaussian(capsys):
    code, rec = run_json(capsys, "gaussian", str(INPUTS / "gaussian_diag.json"))
    assert code == 0 and abs(rec["closed"][0] - 2.221441469079183) < 1e-12 and rec["difference"] < 1e-8
    code, rec = run_json(capsys, "gaussian", str(INPUTS / "gaussian_indefinite.json"))
    assert code == 1 and rec["error"] == "NotPositive"


def test_gaussian_schema(capsys, tmp_path):
    f = tmp_path / "g.json"
    f.write_text(json.dumps({"matrix": [[1, "x"]]}))
    code, rec = run_json(capsys, "gaussian", str(f))
    assert code == 2 and rec["path"] == "/matrix/0/1"
    f.write_text(json.dumps({"matrix": [[1, 2]]}))
    code, rec = run_json(capsys, "gaussian", str(f))
    assert code == 2 and rec["path"] == "/matrix"


def test_out_file(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, stdout, _ = run(capsys, "res", "--op", "(rho)^-1", "--n", "1", "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["exact"] == "1"


def test_module_entry_point_and_logging():
    proc = subprocess.run(
        [sys.executable, "-m", "szego_trace", "res", "--op", "(rho)^-2", "--n", "2"],
        capture_output=True, text=True, env={"SZEGO_TRACE_LOG": "debug", "PATH": ""},
    )
    assert proc.returncode == 0 and "1" in proc.stdout

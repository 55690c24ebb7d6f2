import json
import subprocess
import sys

import pytest

from schottkykit.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def strip_timing(doc):
    doc.pop("wall_seconds", None)
    doc["config"].pop("out", None)
    for c in doc["checks"]:
        c.pop("seconds", None)
    return doc


def test_verify_eigen_passes(capsys):
    code, out, err = run(["verify", "--suite", "eigen", "--genus", "1-3"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["pass"] is True
    assert doc["summary"]["failed"] == 0
    assert all(c["pass"] for c in doc["checks"])
    assert "PASS" in err


def test_verify_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["verify", "--suite", "identities", "--genus", "2,3", "--precision", "30", "--seed", "5"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    capsys.readouterr()
    da, db = (strip_timing(json.loads(p.read_text())) for p in (a, b))
    assert da == db
    assert all(len(c["inputs_digest"]) == 16 for c in da["checks"])


def test_parallel_jobs_give_same_results(capsys):
    args = ["verify", "--suite", "identities", "--genus", "2,3", "--precision", "30"]
    _, one, _ = run(args, capsys)
    _, two, _ = run(args + ["--jobs", "2"], capsys)
    a, b = strip_timing(json.loads(one)), strip_timing(json.loads(two))
    a["config"].pop("jobs")
    b["config"].pop("jobs")
    assert a == b


def test_impossible_tolerance_fails(capsys):
    code, out, _ = run(["verify", "--suite", "identities", "--genus", "2", "--tolerance", "1e-80"], capsys)
    assert code == 1
    doc = json.loads(out)
    assert doc["pass"] is False
    assert doc["summary"]["failed"] > 0


def test_env_override(capsys, monkeypatch):
    monkeypatch.setenv("SCHOTTKYKIT_PRECISION", "25")
    monkeypatch.setenv("SCHOTTKYKIT_SEED", "9")
    _, out, _ = run(["verify", "--suite", "eigen", "--genus", "1"], capsys)
    cfg = json.loads(out)["config"]
    assert cfg["precision"] == 25 and cfg["seed"] == 9
    # flags win over the environment
    _, out, _ = run(["verify", "--suite", "eigen", "--genus", "1", "--seed", "3"], capsys)
    assert json.loads(out)["config"]["seed"] == 3


def test_bad_env_value_is_usage_error(capsys, monkeypatch):
    monkeypatch.setenv("SCHOTTKYKIT_PRECISION", "lots")
    code, _, err = run(["verify", "--suite", "eigen"], capsys)
    assert code == 2
    assert "SCHOTTKYKIT_PRECISION" in err


def test_catalog_R(capsys, tmp_path):
    path = tmp_path / "r.json"
    assert main(["catalog", "--kind", "R", "--genus", "5", "--out", str(path)]) == 0
    doc = json.loads(path.read_text())
    assert [r["name"] for r in doc["relations"]] == ["R_34", "R_35", "R_45"]
    assert all(len(r["expanded"]) == 12 for r in doc["relations"])
    _, out, _ = run(["catalog", "--kind", "R", "--genus", "5", "--all-pairs"], capsys)
    assert len(json.loads(out)["relations"]) == 6


def test_catalog_S_and_eigenbasis(capsys):
    _, out, _ = run(["catalog", "--kind", "S", "--genus", "4"], capsys)
    doc = json.loads(out)
    (s,) = doc["identities"]
    assert len(s["terms"]) == 3 and s["sign_patterns"] == 4
    _, out, _ = run(["catalog", "--kind", "eigenbasis", "--genus", "2"], capsys)
    doc = json.loads(out)
    assert doc["rank"] == 5 and len(doc["columns"]) == 6


def test_eval_R_and_S(capsys):
    code, out, _ = run(["eval", "R_34", "--genus", "4", "--seed", "1"], capsys)
    assert code == 0
    assert json.loads(out)["relative_residual"] < 1e-30
    code, out, _ = run(["eval", "S_34", "--genus", "4", "--diagonal"], capsys)
    assert code == 0
    assert json.loads(out)["exact_zero"] is True


def test_eval_precision_agreement(capsys):
    vals = []
    for p in ("20", "60"):
        _, out, _ = run(["sj", "S_34", "--genus", "4", "--seed", "2", "--precision", p], capsys)
        vals.append(json.loads(out))
    assert abs(float(vals[0]["log_magnitude"]) - float(vals[1]["log_magnitude"])) < 1e-15
    assert vals[0]["exact_zero"] is False


def test_tau_file(capsys, tmp_path):
    from schottkykit.theta import random_period_matrix

    path = tmp_path / "tau.json"
    path.write_text(json.dumps(random_period_matrix(4, 3).to_json()))
    code, out, _ = run(["sj", "S_34", "--tau", str(path)], capsys)
    assert code == 0
    assert json.loads(out)["tau_ref"] == str(path)


@pytest.mark.parametrize(
    "entries,needle",
    [
        ([["0", "1"], ["0.1", "0"], ["0.2", "0"], ["0", "1"]], "symmetric"),
        ([["0", "1"], ["0", "0"], ["0", "0"], ["0", "-1"]], "positive definite"),
        ([["0", "1"], ["0", "0"]], "expected 4 entries"),
    ],
)
def test_invalid_tau_exits_2(capsys, tmp_path, entries, needle):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"genus": 2, "entries": entries}))
    code, _, err = run(["eval", "R_34", "--tau", str(path)], capsys)
    assert code == 2
    assert needle in err


def test_bad_identity_name(capsys):
    code, _, err = run(["eval", "Q_12", "--genus", "4"], capsys)
    assert code == 2
    code, _, _ = run(["sj", "R_34", "--genus", "4"], capsys)
    assert code == 2


def test_expand_genus4(capsys):
    code, out, _ = run(["expand", "S_34", "--genus", "4"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["pass"] is True
    assert doc["slope_expected"] == 8
    assert abs(doc["slope"] - 8) < 0.05


def test_expand_genus5_needs_deep(capsys):
    code, _, err = run(["expand", "S_34", "--genus", "5"], capsys)
    assert code == 2
    assert "--deep" in err


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "schottkykit.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0
    assert "schottkykit" in out.stdout

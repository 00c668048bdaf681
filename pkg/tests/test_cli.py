from __future__ import annotations

import json
import subprocess
import sys

import pytest

from folia import __version__
from folia.cli import main
from folia.exactla import GF
from folia.logfol import LogParams
from folia.poly import Poly


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def m3_file(tmp_path):
    ring = GF(32003)
    polys = [Poly.variable(ring, 3, i) for i in range(3)]
    params = LogParams(2, 2, (1, 1, 1), [[1, 0, -1], [0, 1, -1]], polys, ring)
    path = tmp_path / "m3.json"
    path.write_text(json.dumps(params.to_json()))
    return path


@pytest.fixture
def case_a_file(tmp_path, capsys):
    path = tmp_path / "a.json"
    code, _, _ = run(capsys, "random", "--n", "4", "--degrees", "1,1,1,1,1", "--seed", "1", "--out", str(path))
    assert code == 0
    return path


# -- random -------------------------------------------------------------------


def test_random_deterministic(capsys):
    argv = ["random", "--n", "4", "--q", "2", "--degrees", "1,1,1,1,1", "--seed", "1", "--prime", "32003"]
    code1, out1, _ = run(capsys, *argv)
    code2, out2, _ = run(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2
    obj = json.loads(out1)
    assert obj["degrees"] == [1] * 5 and obj["field"] == {"Fp": 32003} and obj["seed"] == 1
    assert LogParams.from_json(obj).problems() == []


def test_random_precondition(capsys):
    code, out, err = run(capsys, "random", "--n", "3", "--q", "2", "--degrees", "1,1")
    assert code == 2 and out == "" and "m >= q + 1" in err


def test_random_sampling_error(capsys):
    code, _, err = run(capsys, "random", "--n", "3", "--degrees", "2,1,1")
    assert code == 2 and "no generic instance" in err


def test_random_bad_degrees(capsys):
    code, _, _ = run(capsys, "random", "--n", "3", "--degrees", "1,x")
    assert code == 3


# -- verify -------------------------------------------------------------------


def test_verify_m3_example(capsys, m3_file):
    code, out, _ = run(capsys, "verify", str(m3_file))
    res = json.loads(out)
    assert code == 0
    for k in ("descent", "pluecker", "integrability", "logdiff_identity", "genericity"):
        assert res[k] is True
    assert res["balanced_k2"] is False
    assert res["provenance"]["version"] == __version__


def test_verify_malformed(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "verify", str(bad))[0] == 3
    bad.write_text(json.dumps({"n": 2, "q": 2}))
    assert run(capsys, "verify", str(bad))[0] == 3
    assert run(capsys, "verify", str(tmp_path / "missing.json"))[0] == 3


def test_verify_tampered_lambda(capsys, m3_file):
    obj = json.loads(m3_file.read_text())
    obj["lambdas"][0][0] = "2"
    m3_file.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "verify", str(m3_file))
    assert code == 1
    assert json.loads(out)["descent"] is False


def test_verify_field_override(capsys, m3_file):
    code, out, _ = run(capsys, "verify", str(m3_file), "--field", "Q")
    assert code == 0
    assert json.loads(out)["provenance"]["field"] == "Q"


# -- certify ------------------------------------------------------------------


def test_certify_case_a(capsys, case_a_file, tmp_path):
    report = tmp_path / "r.json"
    code, _, _ = run(capsys, "certify", str(case_a_file), "--out", str(report))
    assert code == 0
    rep = json.loads(report.read_text())
    assert rep["verdict"] == "stable" and rep["dim_ambient"] == 126
    assert rep["provenance"]["flags"]["directions"] == 10
    assert rep["provenance"]["field"] == {"Fp": 32003}
    # byte-identical on re-run
    again = tmp_path / "r2.json"
    run(capsys, "certify", str(case_a_file), "--out", str(again))
    assert again.read_text() == report.read_text()


def test_certify_two_primes(capsys, case_a_file):
    code, out, _ = run(capsys, "certify", str(case_a_file), "--primes", "32003,65537", "--directions", "2")
    res = json.loads(out)
    assert code == 0 and res["primes_agree"]
    assert [r["field"] for r in res["reports"]] == [{"Fp": 32003}, {"Fp": 65537}]


def test_certify_n3_precondition(capsys, tmp_path):
    path = tmp_path / "n3.json"
    run(capsys, "random", "--n", "3", "--degrees", "1,1,1,1", "--seed", "1", "--out", str(path))
    assert run(capsys, "certify", str(path))[0] == 2


@pytest.mark.slow
def test_certify_non_balanced_theorem_silent(capsys, tmp_path):
    path = tmp_path / "nb.json"
    assert run(capsys, "random", "--n", "4", "--degrees", "1,2,3,3", "--seed", "3", "--out", str(path))[0] == 0
    code, out, err = run(capsys, "certify", str(path), "--directions", "2")
    rep = json.loads(out)
    assert code == 1
    assert rep["theorem_silent"] is True and rep["balanced_k2"] is False
    assert rep["sanity"]["step1_vanishing"] is None
    assert rep["drho_rank"] <= rep["ker_dim"]
    assert "not 2-balanced" in err


# -- scan ---------------------------------------------------------------------


def _lines(path):
    return [json.loads(l) for l in path.read_text().splitlines() if l.strip()]


def test_scan_single_and_idempotent(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"instances": [{"n": 4, "degrees": [1, 1, 1, 1, 1]}], "seeds": [1],
                               "primes": [32003], "directions": 2}))
    out = tmp_path / "out.jsonl"
    assert run(capsys, "scan", str(cfg), str(out))[0] == 0
    assert len(_lines(out)) == 1
    assert run(capsys, "scan", str(cfg), str(out))[0] == 0
    assert len(_lines(out)) == 1


def test_scan_product_count(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "instances": [{"n": 4, "degrees": [1, 1, 1, 1, 1]}, {"n": 4, "degrees": [1, 1, 1, 1]},
                      {"n": 4, "degrees": [1, 1, 1, 2]}],
        "seeds": [1, 2], "primes": [32003, 65537], "directions": 1,
    }))
    out = tmp_path / "out.jsonl"
    assert run(capsys, "scan", str(cfg), str(out))[0] == 0
    recs = _lines(out)
    assert len(recs) == 12
    keys = {(r["n"], tuple(r["degrees"]), r["seed"], r["field"]["Fp"]) for r in recs}
    assert len(keys) == 12
    # an interrupted run resumes without duplicates
    out.write_text("\n".join(out.read_text().splitlines()[:5]) + "\n")
    assert run(capsys, "scan", str(cfg), str(out))[0] == 0
    assert len(_lines(out)) == 12
    assert len({(r["n"], tuple(r["degrees"]), r["seed"], r["field"]["Fp"]) for r in _lines(out)}) == 12


def test_scan_bad_config(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seeds": [1]}))
    assert run(capsys, "scan", str(cfg), str(tmp_path / "o.jsonl"))[0] == 3


# -- basis-dim and environment ------------------------------------------------


def test_basis_dim(capsys):
    code, out, _ = run(capsys, "basis-dim", "--n", "4", "--q", "2", "--d", "5")
    res = json.loads(out)
    assert code == 0
    assert res["dimension"] == res["bott"] == res["radial_kernel"] == 126 and res["agree"]
    assert run(capsys, "basis-dim", "--n", "2", "--q", "2", "--d", "2")[0] == 2


def test_default_prime_env(capsys, monkeypatch):
    monkeypatch.setenv("FOLIA_DEFAULT_PRIME", "65537")
    _, out, _ = run(capsys, "random", "--n", "3", "--degrees", "1,1,1", "--seed", "2")
    assert json.loads(out)["field"] == {"Fp": 65537}
    _, out, _ = run(capsys, "random", "--n", "3", "--degrees", "1,1,1", "--seed", "2", "--prime", "101")
    assert json.loads(out)["field"] == {"Fp": 101}
    monkeypatch.setenv("FOLIA_DEFAULT_PRIME", "abc")
    assert run(capsys, "random", "--n", "3", "--degrees", "1,1,1")[0] == 3


def test_field_precedence(capsys, tmp_path, monkeypatch):
    path = tmp_path / "p.json"
    run(capsys, "random", "--n", "3", "--degrees", "1,1,1", "--seed", "2", "--prime", "101", "--out", str(path))
    monkeypatch.setenv("FOLIA_DEFAULT_PRIME", "65537")
    _, out, _ = run(capsys, "verify", str(path))
    assert json.loads(out)["provenance"]["field"] == {"Fp": 101}
    _, out, _ = run(capsys, "verify", str(path), "--field", "32003")
    assert json.loads(out)["provenance"]["field"] == {"Fp": 32003}
    obj = json.loads(path.read_text())
    del obj["field"]
    path.write_text(json.dumps(obj))
    _, out, _ = run(capsys, "verify", str(path))
    assert json.loads(out)["provenance"]["field"] == {"Fp": 65537}


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "folia", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout

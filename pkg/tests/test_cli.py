import json
import subprocess
import sys


from dimlab.cli import main

FAST = ["--r0", "2", "--K", "1/4"]


def run(*argv):
    return main([str(a) for a in argv])


def test_pipeline_end_to_end(tmp_path):
    f = tmp_path / "f.csv"
    cert = tmp_path / "cert.json"
    audit = tmp_path / "audit.csv"
    assert run("generate", "--family", "takagi:terms=4", "--n", 65, "--out", f) == 0
    assert run("construct", "--f0", f, "--center-n", 65, "--out", cert, *FAST) == 0
    assert run("verify", cert) == 0
    assert run("audit", cert, "--battery", 12, "--out", audit) == 0
    lines = audit.read_text().splitlines()
    assert lines[0] == "adversary_id,probe_id,block,l_i,cover_cost" and len(lines) > 1
    manifest = json.loads((tmp_path / "audit.csv.manifest.json").read_text())
    assert str(cert) in manifest["inputs"] and manifest["versions"]["rng"]


def test_default_pipeline(tmp_path):
    cert = tmp_path / "cert.json"
    assert run("construct", "--out", cert) == 0
    assert run("verify", cert) == 0


def test_tampered_certificate_exits_1(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    assert run("construct", "--out", cert, *FAST) == 0
    data = json.loads(cert.read_text())
    for e in data["ledger"]:
        if e["id"] == "separation":
            e["lhs"] = "1/1000"
    cert.write_text(json.dumps(data))
    assert run("verify", cert) == 1
    assert "NOT verified" in capsys.readouterr().err


def test_bad_alpha_exits_2(tmp_path, capsys):
    assert run("construct", "--alpha", "3/2", "--out", tmp_path / "x.json") == 2
    assert "0 < alpha < 1" in capsys.readouterr().err
    assert run("construct", "--bogus") == 2
    assert run("search", "--class", "holder", "--input", tmp_path / "missing.csv",
               "--out", tmp_path / "w.json") == 2


def test_float_mode_banner(tmp_path):
    cert = tmp_path / "c.json"
    assert run("construct", "--alpha", "0.55", "--float", "--out", cert, *FAST) == 0
    manifest = json.loads((tmp_path / "c.json.manifest.json").read_text())
    assert manifest["mode"] == "EMPIRICAL" and "EMPIRICAL" in manifest["banner"]
    assert run("verify", cert) == 0


def test_bv_construct_and_audit(tmp_path):
    cert = tmp_path / "bv.json"
    assert run("construct", "--mode", "bv", "--out", cert) == 0
    assert json.loads(cert.read_text())["plan"]["m"] == 23
    assert run("audit", cert, "--battery", 8, "--out", tmp_path / "a.csv") == 0


def test_search_and_dimension(tmp_path):
    f = tmp_path / "f.json"
    assert run("generate", "--family", "midpoint_displacement:hurst=0.6", "--seed", 3,
               "--n", 65, "--out", f) == 0
    for cls, extra in (("holder", ["--alpha", "1/2", "--K", "1"]), ("bv", ["--V", "1"]),
                       ("monotone", [])):
        out = tmp_path / f"{cls}.json"
        assert run("search", "--class", cls, "--input", f, *extra, "--out", out) == 0
        assert json.loads(out.read_text())["class"]["name"] == cls
    assert run("search", "--class", "holder", "--input", f, "--out", tmp_path / "x.json") == 2
    cells = tmp_path / "cells.json"
    cells.write_text(json.dumps({"resolution": "1/64", "cells": list(range(64))}))
    assert run("dimension", "--input", cells, "--scales", "2^-1..2^-6", "--out", tmp_path / "d.json",
               "--csv", tmp_path / "d.csv") == 0
    assert abs(json.loads((tmp_path / "d.json").read_text())["slope"] - 1) < 1e-9
    assert run("dimension", "--input", cells, "--scales", "2^-8") == 2


def test_dimension_of_witness_matches_search(tmp_path):
    f, w, d = tmp_path / "f.csv", tmp_path / "w.json", tmp_path / "d.json"
    assert run("generate", "--seed", 7, "--n", 129, "--out", f) == 0
    assert run("search", "--class", "bv", "--V", "2", "--input", f, "--out", w) == 0
    assert run("dimension", "--input", w, "--out", d) == 0
    scales = json.loads(d.read_text())["scales"]
    assert scales[0] == "1/4" and scales[-1] == "1/128"
    recorded = json.loads(w.read_text())["dimension"]["slope"]
    assert abs(json.loads(d.read_text())["slope"] - recorded) < 1e-12


def test_probe_reproducible_and_config(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"probe": {"trials": 2, "n": "33"}}))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["probe", "--class", "holder", "--params", "1/3,2/3", "--seed", 5, "--config", cfg]
    assert run(*args, "--out", a) == 0
    monkeypatch.setenv("DIMLAB_JOBS", "2")
    assert run(*args, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1 + 2 * 2
    cfg.write_text(json.dumps({"probe": {"nonsense": 1}}))
    assert run(*args, "--out", a) == 2


def test_console_script_runs(tmp_path):
    out = subprocess.run([sys.executable, "-m", "dimlab.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and "dimlab" in out.stdout

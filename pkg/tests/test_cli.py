import json
import subprocess
import sys

import pytest

from kronlimit.cli import CliConfig, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def nocache(tmp_path, monkeypatch):
    monkeypatch.setenv("KRONLIMIT_CACHE_DIR", str(tmp_path / "cache"))
    return tmp_path / "cache"


def test_eta(capsys):
    code, out, _ = run(capsys, "eta", "--tau", "i")
    assert code == 0
    assert json.loads(out)["eta"].startswith("0.76822542232605665900259")


def test_lvalue_dual(capsys):
    code, out, _ = run(capsys, "lvalue", "--chi", "kron:-4", "--dual")
    rec = json.loads(out)
    assert code == 0 and rec["L0_exact"] == "1/2"
    assert rec["coefficients"][1].startswith("0.39159439270683677647")
    assert float(rec["dual_path_diff"]) < 1e-18


def test_psi_tau(capsys):
    code, out, _ = run(capsys, "psi", "--tau", "i")
    assert code == 0 and json.loads(out)["psi"].startswith("0.391594392706836776471945")


def test_psi_needs_one_source(capsys):
    code, _, err = run(capsys, "psi")
    assert code == 2 and "usage" in err


def test_zeta_taylor_base(capsys):
    code, out, _ = run(capsys, "zeta-taylor", "--field", "Qsqrt-5", "--base")
    assert code == 0 and json.loads(out)["gamma_F"].startswith("0.9189385332046727")


def test_epstein_direct(capsys):
    code, out, _ = run(capsys, "epstein", "--tau", "i", "--s", "2", "--direct", "--digits", "20")
    rec = json.loads(out)
    assert code == 0 and rec["certified"] is True
    assert rec["continuation"][:15] == rec["direct"][:15] == "3.0134060198459"


def test_cmtypes_rank_text(capsys):
    code, out, _ = run(capsys, "cmtypes", "rank", "--group", "D8")
    assert code == 0 and out.strip() == "dim_even=3 rank_B=3"


def test_cmtypes_rank_json(capsys):
    code, out, _ = run(capsys, "cmtypes", "rank", "--group", "C4", "--output", "json")
    assert json.loads(out) == {"group": "C4", "dim_even": 1, "rank_B": 1, "equal": True}


def test_cmtypes_decompose(capsys):
    code, out, _ = run(capsys, "cmtypes", "decompose", "--group", "C4", "--values", "2,0,-2,0")
    rec = json.loads(out)
    assert code == 0 and rec["reproduces"] is True


def test_cmtypes_decompose_rejects_odd(capsys):
    code, _, err = run(capsys, "cmtypes", "decompose", "--group", "C4", "--values", "1,1,-1,-1")
    assert code == 2 and "not even" in err


def test_cmtypes_relations_tsv(capsys):
    code, out, _ = run(capsys, "cmtypes", "relations", "--group", "V4", "--output", "tsv")
    assert code == 0
    rows = [line.split("\t") for line in out.strip().splitlines()]
    assert all(len(r) == 3 and r[2] == "0" for r in rows)


def test_verify_class_number_one(capsys, nocache):
    code, out, _ = run(capsys, "verify", "truc7", "--field", "Qi", "--digits", "30")
    recs = json.loads(out)
    assert code == 0 and len(recs) == 1 and recs[0]["pass"] is True


def test_verify_cache_warm_identical(capsys, nocache):
    args = ("verify", "unit-index", "--jobs", "2")
    _, cold, _ = run(capsys, *args)
    _, warm, _ = run(capsys, *args)
    assert cold == warm and len(json.loads(cold)) == 8


def test_verify_no_cache(capsys, tmp_path):
    code, _, _ = run(capsys, "verify", "unit-index", "--field", "Qi", "--cache-dir", "none")
    assert code == 0


def test_verify_tsv(capsys, nocache):
    code, out, _ = run(capsys, "verify", "unit-index", "--field", "Qzeta5", "--output", "tsv")
    cols = out.strip().split("\t")
    assert code == 0 and cols[0] == "unit-index" and cols[-1] == "pass"


def test_unknown_field(capsys, nocache):
    code, _, err = run(capsys, "verify", "truc7", "--field", "Qsqrt-999")
    assert code == 2 and "Qzeta5" in err


def test_bad_digits(capsys):
    code, _, err = run(capsys, "eta", "--tau", "i", "--digits", "5")
    assert code == 2 and "usage" in err


def test_bad_expression(capsys):
    code, _, _ = run(capsys, "eta", "--tau", "import os")
    assert code == 2


def test_lower_half_plane(capsys):
    code, _, _ = run(capsys, "eta", "--tau", "-i")
    assert code == 2


def test_missing_subcommand(capsys):
    assert run(capsys)[0] == 2


def test_catalog(capsys):
    code, out, _ = run(capsys, "catalog", "show", "--field", "Qsqrt-15")
    rec = json.loads(out)
    assert code == 0 and rec["hilbert_class_field"]["w_H"] == 6
    code, out, _ = run(capsys, "catalog", "list")
    assert len(json.loads(out)["fields"]) == 8


def test_config_validation():
    with pytest.raises(ValueError):
        CliConfig(digits=25, jobs=0)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "kronlimit", "cmtypes", "rank", "--group", "Z2"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0 and res.stdout.strip() == "dim_even=1 rank_B=1"

"""End-to-end tests of the command-line interface through ``main(argv)``."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from cartannf.cli import main

DATA = Path(__file__).resolve().parents[1] / "data"
ITO_LAMBDA = [[1, 0, -1, 0], [0, 1, 0, -1]]


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def diag_field(values, extra=()):
    terms = [{"q": [int(k == i) for k in range(len(values))], "i": i, "c": str(v)} for i, v in enumerate(values)]
    terms += [{"q": list(q), "i": i, "c": str(c)} for q, i, c in extra]
    return {"terms": terms}


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def test_diagnose_ito_morphism(capsys):
    code, out = run(capsys, "diagnose", str(DATA / "ito_morphism.json"), "--kmax", "3")
    assert code == 0
    rep = out["report"]
    assert rep["omega"][1:] == [1.0, 1.0, 1.0]
    assert rep["bruno_partial"] == 0


def test_diagnose_rank_deficient(tmp_path, capsys):
    path = write(tmp_path, "m.json", {"Lambda": [[1, -1], [2, -2]]})
    assert main(["diagnose", path]) == 2


def test_diagnose_kmax_one(capsys):
    code, out = run(capsys, "diagnose", str(DATA / "ito_morphism.json"), "--kmax", "1")
    assert code == 0 and len(out["report"]["omega"]) == 2


def test_normalize_linear_family_gives_identity(tmp_path, capsys):
    fam = {"morphism": {"Lambda": ITO_LAMBDA}, "fields": [diag_field([1, "7/23", -1, "-7/23"]), diag_field([0, 1, 0, -1])]}
    code, out = run(capsys, "normalize", write(tmp_path, "f.json", fam), "--order", "6")
    assert code == 0
    comps = out["diffeo"]["psi"]["components"]
    for i, comp in enumerate(comps):
        assert [(t["q"], t["re"]) for t in comp["terms"]] == [([int(k == i) for k in range(4)], "1")]


def test_normalize_two_dim_example(capsys):
    code, out = run(capsys, "normalize", str(DATA / "two_dim_example.json"), "--order", "8")
    assert code == 0
    assert out["mode_used"] == "stepwise" and out["newton_fallback"].startswith("NotInModule")
    assert out["residual_checks"]["passed"]
    # in the diagonal coordinates u = x, v = x + y the normal form is u^2 du + v dv
    nf = out["nf"][0]["components"]
    assert [(t["q"], t["re"]) for t in nf[0]["terms"]] == [([2, 0], "1")]
    assert [(t["q"], t["re"]) for t in nf[1]["terms"]] == [([0, 1], "1")]


def test_normalize_newton_strict_on_two_dim_example():
    assert main(["normalize", str(DATA / "two_dim_example.json"), "--mode", "newton"]) == 4


def test_corrupted_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"fields": [')
    assert main(["normalize", str(p)]) == 2


def test_order_too_small():
    assert main(["normalize", str(DATA / "saddle_family.json"), "--order", "1"]) == 2


def test_not_regular_is_exit_three(tmp_path):
    fam = {"morphism": {"Lambda": ITO_LAMBDA}, "fields": [diag_field([1, 1, -1, -1]), diag_field([0, 1, 0, -1])]}
    assert main(["normalize", write(tmp_path, "f.json", fam), "--order", "4"]) == 3


def test_commutation_failure_is_exit_five(tmp_path):
    X1 = diag_field([1, "7/23", -1, "-7/23"], extra=[((2, 0, 0, 0), 1, 1)])
    fam = {"morphism": {"Lambda": ITO_LAMBDA}, "fields": [X1, diag_field([0, 1, 0, -1])]}
    assert main(["normalize", write(tmp_path, "f.json", fam), "--order", "4"]) == 5


@pytest.mark.parametrize("family", ["saddle_family.json", "ito2_family.json", "two_dim_example.json"])
def test_verify_own_result(tmp_path, capsys, family):
    res = str(tmp_path / "r.json")
    assert main(["normalize", str(DATA / family), "--order", "8", "--out", res]) == 0
    code, out = run(capsys, "verify", str(DATA / family), res)
    assert code == 0 and out["ok"]


def test_verify_detects_tampered_normal_form(tmp_path, capsys):
    res = tmp_path / "r.json"
    assert main(["normalize", str(DATA / "saddle_family.json"), "--order", "8", "--out", str(res)]) == 0
    data = json.loads(res.read_text())
    terms = data["nf"][0]["components"][0]["terms"]
    victim = max(terms, key=lambda t: sum(t["q"]))
    victim["re"] = "12345"
    res.write_text(json.dumps(data))
    code, out = run(capsys, "verify", str(DATA / "saddle_family.json"), str(res))
    assert code == 1
    assert out["failures"][0]["degree"] == sum(victim["q"])


def test_verify_rejects_identity_on_non_normal_input(tmp_path, capsys):
    res = tmp_path / "r.json"
    assert main(["normalize", str(DATA / "saddle_family.json"), "--order", "8", "--out", str(res)]) == 0
    data = json.loads(res.read_text())
    psi = data["diffeo"]["psi"]
    for i, comp in enumerate(psi["components"]):
        comp["terms"] = [{"q": [int(k == i) for k in range(2)], "re": "1", "im": "0"}]
    res.write_text(json.dumps(data))
    code, out = run(capsys, "verify", str(DATA / "saddle_family.json"), str(res))
    assert code == 1 and not out["ok"]


def test_check_commands(capsys):
    code, out = run(capsys, "check", str(DATA / "saddle_family.json"))
    assert code == 0 and out["cartan"] and out["ord_detA"] == out["predicted_ord_detA"]
    code, out = run(capsys, "check", str(DATA / "two_dim_example.json"))
    assert code == 4 and out["error"]["type"] == "NotInModule"


def test_ito_end_to_end_small(capsys):
    code, out = run(capsys, "ito", str(DATA / "ito_pair.json"), "--order", "6")
    assert code == 0
    assert out["star"]["holds"] and out["action_normal_form"] and out["master_invariant"]


def test_ito_rejects_non_commuting_pair(tmp_path):
    ham = {
        "n_pairs": 2,
        "hamiltonians": [
            {"terms": [{"q": [1, 0, 1, 0], "c": "1"}, {"q": [0, 1, 0, 1], "c": "7/23"}, {"q": [3, 0, 1, 0], "c": "1"}]},
            {"terms": [{"q": [0, 1, 0, 1], "c": "1"}, {"q": [1, 1, 1, 1], "c": "2"}]},
        ],
    }
    assert main(["ito", write(tmp_path, "h.json", ham), "--order", "6"]) == 5


def test_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["normalize", str(DATA / "ito2_family.json"), "--order", "8", "--out", str(p)]) == 0
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    da["config"].pop("out"), db["config"].pop("out")
    assert da == db


def test_float_mode(capsys):
    code, out = run(capsys, "normalize", str(DATA / "saddle_family.json"), "--arith", "float", "--order", "6")
    assert code == 0 and out["residual_checks"]["passed"]

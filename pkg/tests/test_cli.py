import io
import json
import shutil

import pytest

from bollab import catalog as cat
from bollab.cli import main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def assert_error(code, out, expected_code, kind=None):
    assert code == expected_code
    body = json.loads(out)
    assert set(body) == {"error"} and body["error"]["code"] == expected_code
    if kind:
        assert body["error"]["type"] == kind
    return body["error"]


# --- the three documented examples -----------------------------------------------


def test_verify_fixture_file():
    code, out, _ = run("verify", "fixtures/BOL_III.2.json")
    assert code == 0 and json.loads(out)["valid"] is True


def test_classify_zero_tensor_text():
    code, out, _ = run("classify", "fixtures/LTS_zero3.json", "--format", "text")
    assert code == 0 and out.strip() == "Type I"


def test_loop_check_iii_minus():
    code, out, _ = run("loop-check", "LOOP/III-.1", "--samples", "500", "--radius", "0.05", "--seed", "7")
    rep = json.loads(out)
    assert code == 0 and rep["pass"] and rep["max_residual"] <= 1e-9 and rep["samples"] == 500


# --- verbs -----------------------------------------------------------------------------


def test_verify_invalid_entry_exits_one():
    code, out, err = run("verify", "LTS/VII")
    e = assert_error(code, out, 1)
    assert e["result"]["valid"] is False and err


def test_classify_catalog_and_json(tmp_path):
    code, out, _ = run("classify", "LTS/V+")
    assert code == 0 and json.loads(out)["type"] == "V+"
    code, out, _ = run("classify", "LTS2/noncompact")
    assert code == 0 and json.loads(out)["case"] == "noncompact"
    code, out, _ = run("classify", "LTS/Bianchi.IX")
    assert code == 1


def test_classify_wrong_dimension(tmp_path):
    p = tmp_path / "four.json"
    p.write_text(json.dumps({"kind": "lts", "dim": 4, "trilinear": []}))
    code, out, _ = run("classify", str(p))
    assert_error(code, out, 2)


def test_envelope_verb():
    code, out, _ = run("envelope", "LTS/II")
    d = json.loads(out)
    assert code == 0 and d["dim"] == 4 and len(d["B_basis"]) == 3
    code, out, _ = run("envelope", "LTS/II", "--canonical")
    assert code == 0


def test_tangent_verb():
    code, out, _ = run("tangent", "LOOP/III.2")
    assert code == 0
    code, out, _ = run("tangent", "LOOP/RA.B")
    assert code == 1


def test_isotopy_verbs():
    code, out, _ = run("isotopy", "BOL/III.5", "BOL/III.6")
    assert assert_error(code, out, 1, "not_isomorphic")["result"]["verdict"] == "distinguished"
    code, out, _ = run("isotopy", "BOL/RA.A", "BOL/RA.B")
    assert code == 0 and json.loads(out)["verdict"] == "witness"
    w = json.dumps({"phi": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], "xi": [0, 0, -1, 0]})
    code, out, _ = run("isotopy", "BOL/II.1", "BOL/II.4", "--witness", w)
    assert code == 0
    w = json.dumps({"phi": [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], "xi": [0, 0, 1, 0]})
    code, out, _ = run("isotopy", "BOL/II.1", "BOL/II.4", "--witness", w)
    assert code == 1


def test_catalog_verb(tmp_path):
    code, out, _ = run("catalog", "--kind", "LTS3")
    ids = json.loads(out)
    assert code == 0 and "LTS/II" in json.dumps(ids)
    code, out, _ = run("catalog", "BOL/III.5")
    assert code == 0 and json.loads(out)["id"] == "BOL/III.5"
    code, out, _ = run("catalog", "--export", str(tmp_path))
    assert code == 0 and (tmp_path / "BOL_III.5.json").exists()
    code, out, _ = run("catalog", "--check-fixtures", str(tmp_path))
    assert code == 0


# --- failure paths: JSON error on stdout, text on stderr -----------------------------


def test_malformed_json_has_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"dim": 3,\n  "trilinear": [1, }')
    code, out, err = run("verify", str(p))
    e = assert_error(code, out, 2, "malformed_json")
    assert e["line"] == 2 and e["column"] > 0 and err


def test_unknown_id():
    code, out, _ = run("verify", "LTS/XII")
    assert_error(code, out, 2, "unknown_id")


@pytest.mark.parametrize(
    "argv",
    [
        ("loop-check", "LOOP/III.1", "--samples", "0"),
        ("loop-check", "LOOP/III.1", "--radius", "2"),
        ("loop-check", "LOOP/III.1", "--tol", "-1"),
        ("loop-check", "LOOP/III.1", "--seed", "-3"),
        ("tangent", "LOOP/III.1", "--step", "0.5"),
        ("frobnicate",),
        ("verify",),
    ],
)
def test_usage_errors(argv):
    code, out, err = run(*argv)
    assert_error(code, out, 2)
    assert err.startswith("bollab:")


def test_missing_file():
    code, out, _ = run("verify", "/nonexistent/x.json")
    assert_error(code, out, 2)


def test_fixture_env_override(tmp_path, monkeypatch):
    shutil.copy(cat.fixture_dir() / "BOL_III.2.json", tmp_path / "mine.json")
    monkeypatch.setenv("BOLLAB_FIXTURES", str(tmp_path))
    assert cat.fixture_dir() == tmp_path
    code, out, _ = run("verify", "fixtures/mine.json")
    assert code == 0


def test_shipped_fixtures_match_catalog():
    assert cat.fixture_divergence() == []


def test_fixture_divergence_detected(tmp_path):
    cat.export_fixtures(tmp_path)
    target = tmp_path / "BOL_III.5.json"
    d = json.loads(target.read_text())
    d["payload"]["bilinear"] = []
    target.write_text(json.dumps(d))
    (tmp_path / "LTS_I.json").unlink()
    assert set(cat.fixture_divergence(tmp_path)) == {"BOL/III.5", "LTS/I"}

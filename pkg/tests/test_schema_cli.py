import json
import pathlib
import subprocess
import sys

import pytest

from toricheights.schema import SpecError, canonical_json, parse_divisor

DATA = pathlib.Path(__file__).resolve().parent.parent / "src" / "toricheights" / "data"


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "toricheights.cli", *args],
        capture_output=True,
        text=True,
        timeout=300,
    )
    return proc.returncode, proc.stdout, proc.stderr


@pytest.mark.parametrize("fname", sorted(p.name for p in DATA.glob("*.json")))
def test_roundtrip_shipped_files(fname):
    raw = (DATA / fname).read_text()
    doc, divisor = parse_divisor(json.loads(raw))
    assert canonical_json(doc) == raw


def test_floats_forbidden_in_pa_data():
    doc = {
        "dim": 1,
        "domain": {"polytope": [["0"], ["1"]]},
        "places": [
            {"kind": "infinite", "label": "oo",
             "roof": {"kind": "pa", "points": [[0.5, "1"]]}}
        ],
    }
    with pytest.raises(SpecError, match="floats are forbidden"):
        parse_divisor(doc)


def test_schema_error_paths():
    with pytest.raises(SpecError, match=r"\$\.dim"):
        parse_divisor({"domain": {"polytope": [["0"]]}})
    with pytest.raises(SpecError, match=r"places\[0\]\.kind"):
        parse_divisor(
            {"dim": 1, "domain": {"polytope": [["0"], ["1"]]}, "places": [{"roof": None}]}
        )


def test_cli_check_pass():
    code, out, _ = run_cli("check", str(DATA / "ramp_family.json"))
    assert code == 0
    assert "[pass]" in out and "FAIL" not in out
    assert "nef verdict: Nef" in out


def test_cli_check_not_nef_still_exit_0():
    code, out, _ = run_cli("check", str(DATA / "cusp_half.json"))
    assert code == 0
    assert "NotNef" in out


def test_cli_height_and_json():
    code, out, _ = run_cli("height", str(DATA / "cusp_half.json"), "--tol", "1e-4", "--json")
    assert code == 0
    doc = json.loads(out)
    val = doc["heights"][0]
    assert val["kind"] == "numeric"
    assert abs(val["value"] + 2) < 1e-3
    assert val["abs_error"] < 1e-2


def test_cli_input_error_exit_2():
    code, _, err = run_cli("height", str(DATA / "does_not_exist.json"))
    assert code == 2
    code, _, err = run_cli("lf", '{"pieces": "oops"}')
    assert code == 2


def test_cli_minus_inf_exit_1():
    code, out, _ = run_cli("example", "ex2", "--alpha=-1")
    assert code == 1
    assert "-infinity" in out
    assert "divergence trace" in out


def test_cli_lf_inline():
    code, out, _ = run_cli("lf", '{"pieces": [["0","0"],["1","0"]]}')
    assert code == 0
    assert "indicator" in out


def test_cli_fan_subcommands():
    p2 = '{"dim":2,"cones":[[[1,0],[0,1]],[[0,1],[-1,-1]],[[-1,-1],[1,0]]]}'
    for action, marker in [
        ("check-smooth", "[pass]"),
        ("check-complete", "[pass]"),
        ("check-projective", "[pass]"),
    ]:
        code, out, _ = run_cli("fan", action, p2)
        assert code == 0 and marker in out
    code, out, _ = run_cli("fan", "refine", '{"dim":2,"cones":[[[1,0],[1,2]]]}')
    assert code == 0 and "(1, 1)" in out
    code, out, _ = run_cli("fan", "normal-fan", '{"polytope": [["0"],["1"]]}')
    assert code == 0


def test_cli_norm():
    code, out, _ = run_cli("norm", '{"psi": [["1","0"],["-1","0"]]}')
    assert code == 0
    assert "boundary norm: 1" in out


def test_cli_supconv():
    code, out, _ = run_cli(
        "supconv",
        '{"points": [["0","0"],["1","0"]]}',
        '{"points": [["0","0"],["1","0"]]}',
    )
    assert code == 0 and "('2',)" in out


def test_report_json_text_agree():
    code, out_json, _ = run_cli("example", "ex1", "--json")
    code2, out_text, _ = run_cli("example", "ex1")
    doc = json.loads(out_json)
    assert doc["command"] == "example ex1"
    # same fields surface in the text rendering
    for h in doc["heights"]:
        assert h["label"] in out_text

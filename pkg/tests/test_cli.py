import json
import subprocess
import sys
from pathlib import Path

import pytest

from glacalc.cli import main
from glacalc.fixtures import BUILTIN_NAMES, builtin
from glacalc.schema import (
    Declaration,
    DeclarationError,
    dumps,
    export_declaration,
    load_declaration,
    read_declaration,
)

DECL = Path(__file__).resolve().parent.parent / "declarations"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- schema ----------------------------------------------------------------------


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_round_trip_exported_fixtures(name):
    exported = dumps(export_declaration(Declaration.from_fixture(builtin(name))))
    again = dumps(export_declaration(load_declaration(json.loads(exported))))
    assert again == exported


def test_loaded_fixture_matches_builtin():
    for name in BUILTIN_NAMES:
        fx = builtin(name)
        decl = load_declaration(json.loads(dumps(export_declaration(Declaration.from_fixture(fx)))))
        assert decl.algebroid.same_data(fx.algebroid), name
        assert set(decl.forms) == set(fx.forms)
        for k, w in fx.forms.items():
            assert decl.forms[k].coeffs == w.coeffs


@pytest.mark.parametrize("fname", ["plane.json", "heis.json", "bad_antisymmetry.json"])
def test_hand_written_files_are_export_fixed_points(fname):
    once = dumps(export_declaration(read_declaration(str(DECL / fname))))
    twice = dumps(export_declaration(load_declaration(json.loads(once))))
    assert once == twice
    assert json.loads(once)["rank"] == json.loads((DECL / fname).read_text())["rank"]


def test_heis_file_is_canonical_modulo_whitespace():
    text = (DECL / "heis.json").read_text()
    assert json.loads(dumps(export_declaration(read_declaration(str(DECL / "heis.json"))))) == json.loads(text)


def test_antisymmetric_completion():
    decl = load_declaration({
        "coordinates": [], "rank": 2,
        "structure": [{"gamma": 1, "alpha": 1, "beta": 2, "expr": "3"}],
    })
    assert decl.algebroid.L(0, 1, 0) == -3


@pytest.mark.parametrize(
    "data, fragment",
    [
        ({"rank": 1}, "coordinates"),
        ({"coordinates": ["x1"], "rank": 1, "anchor": [{"i": 2, "alpha": 1, "expr": "1"}]}, "anchor"),
        ({"coordinates": ["x1"], "rank": 1, "anchor": [{"i": 1, "alpha": 1, "expr": "x1 +"}]}, "position 4"),
        ({"coordinates": ["x1"], "rank": 1, "anchor": [{"i": 1, "alpha": 1, "expr": "y"}]}, "y"),
        ({"coordinates": ["x1", "x1"], "rank": 1}, "coordinates"),
        ({"coordinates": ["x1"], "rank": 1, "bogus": 1}, "bogus"),
        ({"coordinates": ["x1"], "rank": 2, "ids": {"d": {"generators": [["1", "0"], ["x1", "0"]]}}}, "ids"),
    ],
)
def test_declaration_errors(data, fragment):
    with pytest.raises(DeclarationError) as info:
        load_declaration(data)
    assert fragment in str(info.value)


# -- CLI examples --------------------------------------------------------------------


def test_heis_ids_check_exit_1(capsys):
    code, out, _ = run(capsys, "ids-check", "--fixture", "HEIS", "--ids", "main", "--method", "all")
    assert code == 1
    assert "[S1,S2] = T3" in out
    assert "agreement: yes" in out
    assert "A^3_12 = -1" in out


def test_so3_mc_check_exit_0(capsys):
    code, out, _ = run(capsys, "mc-check", "--fixture", "SO3")
    assert code == 0 and "PASS" in out


def test_validate_antisymmetry_failure_exit_1(capsys):
    code, out, _ = run(capsys, "validate", str(DECL / "bad_antisymmetry.json"))
    assert code == 1
    assert "antisymmetry: FAIL" in out


def test_validate_file_and_fixture_pass(capsys):
    assert run(capsys, "validate", str(DECL / "plane.json"))[0] == 0
    for name in BUILTIN_NAMES:
        assert run(capsys, "validate", "--fixture", name)[0] == 0


def test_operation_outputs(capsys):
    f = str(DECL / "plane.json")
    assert run(capsys, "d", f, "--form", "w")[1] == "d w = (-1*x1^2 - 1)*T^1/\\T^2\n"
    assert run(capsys, "wedge", f, "--a", "a", "--b", "b")[1] == "a /\\ b = x1*T^1/\\T^2\n"
    assert run(capsys, "ip", f, "--section", "u", "--form", "w")[1] == "i_u w = x2^2\n"
    assert run(capsys, "lie", f, "--section", "u", "--form", "f")[1] == "L_u f = x2^2\n"
    code, out, _ = run(capsys, "bracket", "--fixture", "SO3", "--u", "u", "--v", "v")
    assert code == 0 and out.startswith("[u,v] = ")


def test_d_json_reports_oracle(capsys):
    code, out, _ = run(capsys, "d", "--fixture", "SO3", "--form", "t1", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["result"] == "-T^2/\\T^3"
    assert data["oracle_agrees"] is True and data["closed"] is False


def test_ids_check_methods_and_omega(capsys):
    code, out, _ = run(capsys, "ids-check", "--fixture", "TB3", "--ids", "xy", "--json")
    data = json.loads(out)
    assert code == 0 and data["involutive"] and data["agree"]
    assert data["methods"]["cartan"]["omega"] == {"Omega^3_3": "0"}
    for m in ("bracket", "cartan", "eds"):
        assert run(capsys, "ids-check", "--fixture", "SO3", "--ids", "t12", "--method", m)[0] == 1


def test_conn_check(capsys):
    assert run(capsys, "conn-check", "--fixture", "SO3", "--connection", "torsion_free")[0] == 0
    code, out, _ = run(capsys, "conn-check", "--fixture", "SO3", "--connection", "torsion_free",
                       "--identities", "bianchi")
    assert code == 0 and "B1~" in out and "C1" not in out
    assert run(capsys, "conn-check", str(DECL / "plane.json"), "--connection", "line_bundle")[0] == 0


def test_pullback_subcommand(capsys):
    code, out, _ = run(capsys, "pullback", str(DECL / "plane.json"), "--map", str(DECL / "plane_map.json"),
                       "--json")
    data = json.loads(out)
    assert code == 0 and data["validation"]["passed"]
    decl = data["declaration"]
    assert decl["presentation"] == "pullback" and decl["coordinates"] == ["y1", "y2", "y3"]
    # the pulled-back declaration feeds straight back in; mc-check runs the primed variant
    loaded = load_declaration(decl)
    from glacalc.forms import maurer_cartan_check

    rep = maurer_cartan_check(loaded.algebroid)
    assert rep.passed and any(e.name.startswith("C2'") for e in rep.entries)


def test_json_and_text_verdicts_agree(capsys):
    cases = [["validate"], ["mc-check"]]
    for name in BUILTIN_NAMES:
        fx = builtin(name)
        for args in cases:
            t = run(capsys, *args, "--fixture", name)[0]
            j_code, j_out, _ = run(capsys, *args, "--fixture", name, "--json")
            assert t == j_code and json.loads(j_out)["passed"] == (t == 0)
        for key in fx.ids:
            t = run(capsys, "ids-check", "--fixture", name, "--ids", key)[0]
            j_code, j_out, _ = run(capsys, "ids-check", "--fixture", name, "--ids", key, "--json")
            assert t == j_code and json.loads(j_out)["involutive"] == (t == 0)
        for key in fx.connections:
            t = run(capsys, "conn-check", "--fixture", name, "--connection", key)[0]
            j_code, j_out, _ = run(capsys, "conn-check", "--fixture", name, "--connection", key, "--json")
            assert t == j_code and json.loads(j_out)["passed"] == (t == 0)


# -- input errors --------------------------------------------------------------------


def test_input_errors_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    schema = tmp_path / "schema.json"
    schema.write_text(json.dumps({"coordinates": ["x1"]}))
    cases = [
        ["validate", str(tmp_path / "missing.json")],
        ["validate", str(bad)],
        ["validate", str(schema)],
        ["validate"],
        ["bracket", "--fixture", "SO3", "--u", "nope", "--v", "v"],
        ["d", "--fixture", "SO3", "--form", "nope"],
        ["conn-check", "--fixture", "SO3", "--connection", "zero", "--identities", "ricci"],
        ["validate", str(DECL / "plane.json"), "--fixture", "SO3"],
        ["pullback", "--fixture", "TB2", "--map", str(tmp_path / "missing.json")],
    ]
    for argv in cases:
        code, out, err = run(capsys, *argv)
        assert code == 2, argv
        assert err.startswith("glacalc: error:"), argv
        assert out == ""


def test_unknown_fixture_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["validate", "--fixture", "TB9"])
    assert info.value.code == 2


def test_byte_identical_reruns():
    argv = [sys.executable, "-m", "glacalc", "ids-check", "--fixture", "HEIS", "--ids", "main", "--json"]
    a = subprocess.run(argv, capture_output=True)
    b = subprocess.run(argv, capture_output=True)
    assert a.returncode == b.returncode == 1
    assert a.stdout == b.stdout and a.stdout

import json
import math
import subprocess
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from pbaextend.boolean_core import Element, generator_element
from pbaextend.cli import parse_expression, parse_ppt, run
from pbaextend.errors import ParseError
from pbaextend.ppt import validate_ppt

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def invoke(tmp_path, *argv):
    out = tmp_path / "out.json"
    code = run([*argv, "-o", str(out)])
    return code, json.loads(out.read_text())


def fixture(name):
    return str(FIXTURES / name)


def write(tmp_path, doc, name="doc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


# --- exit codes on the fixture suite -------------------------------------------------


@pytest.mark.parametrize(
    "argv, code, verdict",
    [
        (["check", "tree_chain.json"], 0, "representable"),
        (["check", "triangle.json"], 1, "not representable"),
        (["check", "chsh_singlet.json"], 1, "not representable"),
        (["check", "malformed.json"], 2, "error"),
        (["extend", "tree_chain.json", "--method", "tree"], 0, "representable"),
        (["extend", "chsh_singlet.json", "--method", "tree"], 3, "error"),
        (["extend", "three_spec.json", "--method", "three"], 0, "representable"),
        (["extend", "tree_chain.json", "--method", "lp"], 0, "representable"),
        (["extend", "tree_chain.json", "--method", "ht"], 0, "representable"),
        (["bell", "chsh_singlet.json"], 1, "not representable"),
        (["bell", "tree_chain.json"], 3, "error"),
        (["ht", "ht_pass.json"], 0, "pass-bounded"),
        (["ht", "ht_fail.json"], 1, "fail"),
        (["quotient", "chsh_quantum.json"], 0, "ok"),
        (["quotient", "triangle.json"], 1, "rejected"),
        (["quotient", "property_g_fail.json"], 1, "rejected"),
        (["quotient", "ks18_quantum.json"], 1, "rejected"),
        (["graph", "chsh_singlet.json"], 0, "ok"),
        (["check", "chsh_quantum.json"], 2, "error"),
    ],
)
def test_exit_codes(tmp_path, argv, code, verdict):
    got, doc = invoke(tmp_path, argv[0], fixture(argv[1]), *argv[2:])
    assert got == code
    assert doc["schema"] == "pba-extend/1"
    assert doc["verdict"] == verdict


def test_missing_file_is_input_error(tmp_path, capsys):
    code, doc = invoke(tmp_path, "check", str(tmp_path / "nope.json"))
    assert code == 2 and doc["error"]["kind"] == "input error"
    assert "pba-extend: input error" in capsys.readouterr().err


def test_inconsistent_state_is_input_error(tmp_path):
    doc = json.loads(Path(fixture("three_spec.json")).read_text())
    doc["measures"][1]["intersections"]["A3"] = "1/3"
    code, out = invoke(tmp_path, "check", write(tmp_path, doc))
    assert code == 2 and out["error"]["type"] == "InvalidState"


# --- command outputs ---------------------------------------------------------------------


def test_check_emits_tree_extension(tmp_path):
    code, doc = invoke(tmp_path, "check", fixture("tree_chain.json"))
    assert doc["method"] == "tree"
    atoms = doc["extension"]["atoms"]
    assert sum(Fraction(v) for v in atoms.values()) == 1
    # the extension, read back as a one-context document, reproduces the input marginals
    ext = {
        "schema": "pba-extend/1",
        "generators": doc["extension"]["generators"],
        "contexts": [doc["extension"]["generators"]],
        "measures": [{"context": doc["extension"]["generators"], "atoms": atoms}],
    }
    full = parse_ppt(ext, "exact")
    given = parse_ppt(json.loads(Path(fixture("tree_chain.json")).read_text()), "exact")
    for c in given.pba.contexts:
        assert full.marginal(c) == given.state[c]


def test_check_emits_verified_separator(tmp_path):
    code, doc = invoke(tmp_path, "check", fixture("triangle.json"))
    cert = doc["certificate"]
    assert cert["type"] == "separator"
    assert Fraction(cert["violation"]) > 0


def test_three_method_outputs_lambda_table(tmp_path):
    _, doc = invoke(tmp_path, "extend", fixture("three_spec.json"), "--method", "three", "--chi", "1/12", "--eta", "1/12")
    lam = {k: Fraction(v) for k, v in doc["lambda"].items()}
    assert sum(lam.values()) == 1 and min(lam.values()) >= 0
    assert lam["111"] == Fraction(1, 12) and lam["110"] == Fraction(1, 12)
    code, doc = invoke(tmp_path, "extend", fixture("three_spec.json"), "--method", "three", "--chi", "1/2")
    assert code == 2 and doc["error"]["type"] == "ChiEtaOutOfBox"


def test_bell_reports_ch_value(tmp_path):
    _, doc = invoke(tmp_path, "bell", fixture("chsh_singlet.json"))
    assert doc["chsh_condition"] is False
    assert doc["ch_value"] == pytest.approx((math.sqrt(2) - 1) / 2, abs=1e-9)
    assert doc["separator_checked_vertices"] == 16


def test_facets_on_example32(tmp_path):
    code, doc = invoke(tmp_path, "facets", fixture("example32_spec.json"), "--classify")
    assert code == 0 and len(doc["facets"]) == 48
    groups = doc["groups"]
    assert sum(groups.values()) == 48 and groups["other"] == 0
    assert doc["relevant"] == 32


def test_graph_dot(tmp_path):
    dot = tmp_path / "g.dot"
    code, doc = invoke(tmp_path, "graph", fixture("chsh_singlet.json"), "--dot", str(dot))
    text = dot.read_text()
    assert code == 0 and text.startswith("graph {")
    assert text.count("[label=") == 4 and text.count(" -- ") == 4


def test_quantum_document_round_trip(tmp_path):
    code, doc = invoke(tmp_path, "quantum", fixture("chsh_quantum.json"))
    assert code == 0
    ppt = parse_ppt(doc, doc["arithmetic"])
    assert validate_ppt(ppt).ok
    angles = {0: 0, 1: 90, 2: 45, 3: 135}
    for i, j in ppt.pba.contexts:
        want = (1 - math.cos(math.radians(angles[j] - angles[i]))) / 4
        assert float(ppt.value((i, j))) == pytest.approx(want, abs=1e-9)
    # the emitted document is accepted by the other commands
    path = write(tmp_path, doc, "ppt.json")
    assert run(["bell", path, "-o", str(tmp_path / "b.json")]) == 1


def test_quantum_snap_gives_exact_document(tmp_path):
    code, doc = invoke(tmp_path, "quantum", fixture("chsh_quantum.json"), "--snap", "1000")
    assert doc["arithmetic"] == "exact"
    assert validate_ppt(parse_ppt(doc, "exact")).ok


def test_complex_matrix_format(tmp_path):
    # spin-y "up" projector (1/2)[[1, -i], [i, 1]] and the state |0>
    doc = {
        "schema": "pba-extend/1",
        "projections": [{"name": "Y", "matrix": {"dim": 2, "re": [[0.5, 0], [0, 0.5]], "im": [[0, -0.5], [0.5, 0]]}}],
        "states": [{"vector": [1, 0]}],
    }
    code, out = invoke(tmp_path, "quantum", write(tmp_path, doc))
    assert code == 0
    ppt = parse_ppt(out, "float")
    assert float(ppt.value((0,))) == pytest.approx(0.5)
    doc["projections"][0]["matrix"]["im"] = [[0, 0.5], [0.5, 0]]  # not hermitian
    code, _ = invoke(tmp_path, "quantum", write(tmp_path, doc))
    assert code == 2


def test_arithmetic_override(tmp_path):
    _, doc = invoke(tmp_path, "check", fixture("tree_chain.json"), "--arithmetic", "float")
    assert all(isinstance(v, float) for v in doc["extension"]["atoms"].values())


def test_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        run(["check", fixture("triangle.json"), "-o", str(path)])
    assert a.read_bytes() == b.read_bytes()


def test_all_ppt_fixtures_round_trip():
    for name in ("tree_chain.json", "three_spec.json", "triangle.json", "chsh_singlet.json"):
        doc = json.loads((FIXTURES / name).read_text())
        ppt = parse_ppt(doc, doc.get("arithmetic", "exact"))
        assert validate_ppt(ppt).ok


def test_timings_flag(tmp_path):
    _, doc = invoke(tmp_path, "check", fixture("tree_chain.json"), "--timings")
    assert doc["timings"]["total_seconds"] >= 0


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "pbaextend.cli", "ht", fixture("ht_fail.json")], capture_output=True, text=True)
    assert res.returncode == 1
    assert json.loads(res.stdout)["verdict"] == "fail"


# --- expression parser -----------------------------------------------------------------------


def test_expression_parser():
    names = ["A", "B", "C"]
    a, b, c = (generator_element(i, 3) for i in range(3))
    assert parse_expression("A&B|~C", names) == (a & b) | ~c
    assert parse_expression("~(A | B) & 1", names) == ~(a | b)
    assert parse_expression("A|B&C", names) == a | (b & c)
    assert parse_expression("0", names) == Element.zero(3)
    assert parse_expression("~~A", names) == a


@pytest.mark.parametrize("text", ["", "A &", "(A", "A)", "D", "2", "A + B", "A B"])
def test_expression_parser_errors(text):
    with pytest.raises(ParseError):
        parse_expression(text, ["A", "B"])

import io
import json

import pytest

from sheaf_forcer.cli import main
from sheaf_forcer.document import DocumentError, parse_document, parse_element
from sheaf_forcer.fixture_docs import render_fixture

SIERPINSKI_DOC = """\
# R holds only over {a}
signature S {
  function f 1
  relation R 1
}
structure MX {
  signature S
  universe 0
  function f: 0 -> 0
}
structure Ma {
  signature S
  universe 0
  function f: 0 -> 0
  relation R: 0
}
topology T {
  points a b
  open {a}
}
presheaf P {
  topology T
  fiber {a} = Ma
  fiber {a,b} = MX
  restrict {a,b} -> {a}: 0 -> 0
}
formula rx = R(x)
filter top = {a,b}
"""


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def doc_path(tmp_path):
    def write(text, name="doc.sfd"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_parse_elements():
    assert parse_element("3") == 3
    assert parse_element("(1,2)") == (1, 2)
    assert parse_element("{a,b}") == frozenset("ab")
    assert parse_element("{}") == frozenset()
    assert parse_element("x") == "x"


def test_parse_document_blocks():
    doc = parse_document(SIERPINSKI_DOC)
    _, P = doc.main_presheaf(None)
    assert len(P.fibers) == 2
    assert doc.formulas == {"rx": "R(x)"}
    assert set(doc.filters["top"]) == {frozenset("ab")}


def test_one_line_blocks():
    doc = parse_document("topology T { points a b  open {a} }\n")
    assert len(doc.topologies["T"].opens) == 3


@pytest.mark.parametrize("text, fragment", [
    ("structure M {\n  signature Nope\n  universe 0\n}\n", "Nope"),
    ("topology T {\n  points a\n  open {b}\n}\n", "b"),
    ("topology T {\n  points a\n", "never closed"),
    ("bogus X {\n}\n", "bogus"),
])
def test_document_errors(text, fragment):
    with pytest.raises(DocumentError) as e:
        parse_document(text)
    assert fragment in str(e.value)


def test_validate_ok(doc_path):
    code, out, _ = run("validate", doc_path(SIERPINSKI_DOC))
    assert code == 0, out


def test_force_and_locus(doc_path):
    path = doc_path(SIERPINSKI_DOC)
    code, out, _ = run("force", path, "--point", "a", "--formula", "rx", "--section", "0")
    assert code == 0 and "locus: {a}" in out
    code, out, _ = run("--json", "force", path, "--point", "b", "--formula", "~~R(x)",
                       "--section", "0")
    data = json.loads(out)
    assert code == 0 and data["forces"] is True and data["locus"] == ["a", "b"]


def test_force_unknown_point_is_input_error(doc_path):
    code, out, _ = run("force", doc_path(SIERPINSKI_DOC), "--point", "z", "--formula", "x = x",
                       "--section", "0")
    assert code == 2 and "error" in out


def test_force_bad_formula_is_input_error(doc_path):
    code, _, _ = run("force", doc_path(SIERPINSKI_DOC), "--point", "a", "--formula", "Q(x)",
                     "--section", "0")
    assert code == 2


def test_missing_file_is_input_error(tmp_path):
    code, _, _ = run("validate", str(tmp_path / "none.sfd"))
    assert code == 2


def test_filters_report_and_bound(doc_path):
    path = doc_path(SIERPINSKI_DOC)
    code, out, _ = run("--json", "filters", path, "--depth", "1")
    data = json.loads(out)
    assert code == 0 and [f["generic"] for f in data["filters"]] == [True]
    assert data["bounds"]["depth"] == 1
    code, out, _ = run("filters", path, "--depth", "2", "--max-formulas", "10")
    assert code == 3 and "bound exceeded" in out


def test_generic_model_top_filter_is_not_generic_but_builds(doc_path):
    path = doc_path(SIERPINSKI_DOC)
    code, out, _ = run("--json", "generic-model", path, "--filter", "top")
    assert code == 0 and json.loads(out)["relations"] == {"R": []}
    code, out, _ = run("--json", "generic-model", path)
    assert json.loads(out)["relations"]["R"] != []


def test_cohomology_example(doc_path):
    text = render_fixture("sequence-sheaf", ["modulus=12", "points=0", "eigenvalues=6"])
    code, out, _ = run("cohomology", doc_path(text))
    assert code == 0 and "H: Z_3" in out.splitlines()
    # over two coordinates the global group doubles; the generic one does not
    text = render_fixture("sequence-sheaf", ["modulus=12", "points=0,1", "eigenvalues=6,6"])
    path = doc_path(text, "two.sfd")
    assert "H: Z_3^2" in run("cohomology", path)[1].splitlines()
    assert "H: Z_3" in run("cohomology", path, "--filter", "{1}")[1].splitlines()


def test_gmt_example(doc_path):
    text = render_fixture("sequence-sheaf", ["modulus=2", "points=0,1"])
    code, out, _ = run("gmt", doc_path(text), "--filter", "{0}", "--sweep", "1")
    assert code == 0, out


def test_gmt_literal_counterexample_exits_one(doc_path):
    path = doc_path(render_fixture("sierpinski", []))
    code, out, _ = run("gmt", path, "--sweep", "1", "--mode", "literal")
    assert code == 1, out
    code, out, _ = run("gmt", path, "--sweep", "1", "--mode", "variant")
    assert code == 0, out


@pytest.mark.parametrize("cmd", [
    ["validate"], ["filters", "--depth", "1"], ["generic-model"], ["gmt", "--sweep", "1"],
    ["force", "--point", "a", "--formula", "x = x", "--section", "0"],
])
def test_json_and_text_carry_the_same_data(doc_path, cmd):
    path = doc_path(SIERPINSKI_DOC)
    code_t, text, _ = run(cmd[0], path, *cmd[1:])
    code_j, js, _ = run("--json", cmd[0], path, *cmd[1:])
    data = json.loads(js)
    assert code_t == code_j == data["exit"]
    # every scalar and string value in the JSON shows up in the text
    def leaves(v):
        if isinstance(v, dict):
            for x in v.values():
                yield from leaves(x)
        elif isinstance(v, list):
            for x in v:
                yield from leaves(x)
        else:
            yield v
    for key, v in data.items():
        if key in ("command", "exit"):
            continue
        for leaf in leaves(v):
            if isinstance(leaf, str) and leaf:
                assert leaf in text, (key, leaf)


def test_output_is_deterministic(doc_path):
    path = doc_path(render_fixture("sierpinski", []))
    first = run("--json", "gmt", path, "--sweep", "2", "--mode", "variant")
    assert run("--json", "gmt", path, "--sweep", "2", "--mode", "variant") == first


@pytest.mark.parametrize("name, params", [
    ("simplex", ["n=3"]), ("boundary", ["n=3"]), ("graph-presheaf", ["n=3"]),
    ("sequence-sheaf", ["modulus=12", "points=0,1", "eigenvalues=6,6"]), ("sierpinski", []),
])
def test_fixture_documents_round_trip(name, params, doc_path):
    code, out, _ = run("fixtures", name, *params)
    assert code == 0
    parse_document(out)
    code, rep, _ = run("validate", doc_path(out))
    assert code in (0, 1) and rep


def test_graph_presheaf_validate_reports_incoherence(doc_path):
    code, out, _ = run("--json", "validate", doc_path(render_fixture("graph-presheaf", ["n=3"])))
    data = json.loads(out)
    assert json.dumps(data).count("coherent") >= 1


def test_fixture_bad_params():
    code, _, err = run("fixtures", "simplex", "strict=maybe")
    assert code == 2 and "strict" in err

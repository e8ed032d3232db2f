import io
import json

import pytest

from ostrohj.builtins import BUILTINS
from ostrohj.cli import EXIT_CHECK_FAIL, EXIT_CLOSURE, EXIT_INPUT, EXIT_OK, main
from ostrohj.report import SCHEMA, AnalysisReport, dumps, run_analysis, to_latex


@pytest.fixture(scope="module")
def analyses():
    return {name: run_analysis(b.model()) for name, b in BUILTINS.items()}


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), out=buf)
    return code, buf.getvalue()


# ---------------------------------------------------------------------- report


def test_json_round_trip(analyses):
    for a in analyses.values():
        rep = AnalysisReport.from_analysis(a)
        again = AnalysisReport.from_json(rep.to_json())
        assert again == AnalysisReport.from_dict(json.loads(rep.to_json()))
        assert again.to_json() == rep.to_json()


def test_json_is_deterministic():
    m = BUILTINS["t3"].model()
    one = AnalysisReport.from_analysis(run_analysis(m)).to_json()
    two = AnalysisReport.from_analysis(run_analysis(m)).to_json()
    assert one == two


def test_reader_ignores_unknown_fields_and_checks_schema(analyses):
    data = AnalysisReport.from_analysis(analyses["t2"]).to_dict()
    data["from_the_future"] = [1, 2]
    assert AnalysisReport.from_dict(data).summary["second_class"] == 2
    data["schema"] = SCHEMA + 1
    with pytest.raises(ValueError):
        AnalysisReport.from_dict(data)


def test_floats_written_with_17_digits():
    assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}\n'
    assert dumps({"x": float("nan"), "f": True}) == '{\n  "x": null,\n  "f": true\n}\n'


def test_text_report_mentions_structure(analyses):
    text = AnalysisReport.from_analysis(analyses["t3"]).to_text()
    assert "secondary: p_q1 = 0" in text
    assert "free gauge parameters: q2, q2'" in text
    assert "equivalence: yes" in text


def test_latex_document(analyses):
    tex = to_latex(analyses["podolsky-mode"])
    assert tex.startswith(r"\documentclass{article}") and tex.rstrip().endswith(r"\end{document}")
    assert "(4 primary, 2 secondary)" in tex
    assert tex.count(r"\begin{align*}") == tex.count(r"\end{align*}") == 3
    assert "dZ &=" in tex


# ------------------------------------------------------------------------- CLI


def test_analyze_json_counts():
    code, out = run("analyze", "builtin:t3", "--format", "json")
    assert code == EXIT_OK
    s = json.loads(out)["summary"]
    assert (s["primaries"], s["secondaries"], s["free_parameters"]) == (2, 1, 2)


def test_analyze_regular_model_has_no_constraints():
    code, out = run("analyze", "builtin:t1", "--format", "json")
    d = json.loads(out)
    assert code == EXIT_OK
    assert d["primary_constraints"] == {"pi_type": [], "p_type": []}
    assert d["closure"]["secondaries"] == []


def test_analyze_all_builtins_keyed_by_name():
    code, out = run("analyze", "--all-builtins", "--format", "json")
    assert code == EXIT_OK
    assert set(json.loads(out)) == set(BUILTINS)


def test_analyze_latex_and_text():
    assert run("analyze", "builtin:t2", "--format", "latex")[1].startswith(r"\documentclass")
    assert "closure:" in run("analyze", "builtin:t2")[1]


def test_param_override():
    code, out = run("analyze", "builtin:podolsky-mode", "--param", "a2=1/4", "--param", "k=2",
                    "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["model"]["params"] == {"a2": "1/4", "k": "2"}


def test_bad_inputs_exit_1(tmp_path):
    assert run("analyze", str(tmp_path / "missing.ohj"))[0] == EXIT_INPUT
    bad = tmp_path / "bad.ohj"
    bad.write_text("coords q\nL = q'' +\n")
    assert run("analyze", str(bad))[0] == EXIT_INPUT
    assert run("analyze")[0] == EXIT_INPUT
    assert run("builtin", "show", "nope")[0] == EXIT_INPUT
    with pytest.raises(SystemExit) as info:
        run("analyze", "builtin:t1", "--param", "k=x")
    assert info.value.code == EXIT_INPUT


def test_inconsistent_model_exit_2(tmp_path):
    f = tmp_path / "lin.ohj"
    f.write_text("name lin\ncoords q\nL = q\n")
    assert run("analyze", str(f))[0] == EXIT_CLOSURE
    assert run("integrate", str(f), "--init", str(f))[0] == EXIT_CLOSURE


def test_integrate_writes_csv(tmp_path):
    out = tmp_path / "traj.csv"
    code, summary = run("integrate", "builtin:t1", "--steps", "200", "--out", str(out))
    assert code == EXIT_OK
    rows = out.read_text().splitlines()
    assert rows[0].split(",")[:2] == ["s", "t0"]
    assert len(rows) == 1 + 201
    assert "max constraint drift" in summary


def test_integrate_degenerate_path(tmp_path):
    p = tmp_path / "still.path"
    p.write_text("path t : 0 0 ; 1 0\n")
    code, csv = run("integrate", "builtin:t1", "--path", str(p), "--steps", "10")
    assert code == EXIT_OK
    assert len(csv.splitlines()) == 2


def test_check_pass_and_sabotage():
    code, out = run("check", "builtin:t3", "--steps", "2000")
    assert code == EXIT_OK and out.startswith("PASS")
    code, out = run("check", "builtin:t3", "--steps", "2000", "--omit-secondaries")
    assert code == EXIT_CHECK_FAIL and out.startswith("FAIL")


def test_builtin_list_and_show():
    code, out = run("builtin", "list")
    assert code == EXIT_OK and [ln.split()[0] for ln in out.splitlines()] == list(BUILTINS)
    code, out = run("builtin", "show", "t2")
    assert code == EXIT_OK and "# default init" in out and "# expected: 1 primary" in out

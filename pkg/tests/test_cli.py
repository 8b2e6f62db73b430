import json

import pytest

from helpunits import cli
from helpunits.tables import DATA_DIR, table_to_document

M12 = DATA_DIR / "M12"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_bundled(capsys):
    files = sorted(M12.glob("*.json"))
    code, out, _ = run(capsys, "validate", *files)
    assert code == 0
    assert out.count(": ok") == 5


def test_validate_wrong_value_count(capsys, tmp_path, ordinary):
    doc = table_to_document(ordinary)
    doc["characters"][6]["values"].append("0")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(capsys, "validate", bad)
    assert code == 1 and "character X.7" in err


def test_validate_missing_power_map(capsys, tmp_path, ordinary):
    doc = table_to_document(ordinary)
    del doc["power_maps"]["11"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, _, err = run(capsys, "validate", M12 / "M12_ordinary.json", bad)
    assert code == 1 and "prime 11" in err


def test_solve_11(capsys):
    code, out, _ = run(capsys, "solve", "--tables", M12, "--order", 11)
    assert code == 0
    doc = json.loads(out)
    order = doc["report"]["orders"][0]
    assert order["status"] == "has-nontrivial-solutions"
    assert order["merged"] == [[-1, 2], [0, 1], [1, 0], [2, -1]]


def test_solve_33_eliminated(capsys):
    code, out, _ = run(capsys, "solve", "--tables", M12, "--order", 33)
    order = json.loads(out)["report"]["orders"][0]
    assert code == 0
    assert order["status"] == "eliminated" and len(order["cases"]) == 20
    assert all(c["solutions"] == [] and c["witness"] for c in order["cases"])


def test_solve_3_restricted_markdown(capsys):
    code, out, _ = run(capsys, "solve", "--tables", M12, "--order", 3,
                       "--chars", "X.2,X.4", "--charcs", "0", "--format", "md")
    assert code == 0
    assert "## Order 3: has-nontrivial-solutions" in out
    assert "Merged: 5 tuples" in out


def test_solve_aborted_exit_code(capsys):
    code, out, _ = run(capsys, "solve", "--tables", M12, "--order", 10, "--max-cases", 2)
    assert code == 2
    assert json.loads(out)["report"]["orders"][0]["status"] == "aborted"


def test_solve_bad_arguments(capsys):
    assert run(capsys, "solve", "--tables", M12, "--order", 3, "--chars", "X.99")[0] == 1
    assert run(capsys, "solve", "--tables", M12, "--order", 3, "--charcs", "7")[0] == 1
    assert run(capsys, "solve", "--tables", M12, "--order", 1)[0] == 1


def test_report_body_deterministic(capsys, tmp_path):
    bodies = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert run(capsys, "solve", "--tables", M12, "--order", 10, "-o", path)[0] == 0
        bodies.append(json.dumps(json.loads(path.read_text())["report"], sort_keys=True))
    assert bodies[0] == bodies[1]


def test_report_round_trip(verdicts, ordinary):
    doc = cli.build_report("run-all", ordinary, verdicts, {}, with_graph=True)
    parsed = cli.parse_report(cli.render_json(doc))
    assert parsed["verdicts"].keys() == verdicts.keys()
    for k, v in verdicts.items():
        w = parsed["verdicts"][k]
        assert (w.status, w.variables, w.note) == (v.status, v.variables, v.note)
        assert [c.profile for c in w.cases] == [c.profile for c in v.cases]
        assert [c.solutions.solutions for c in w.cases] == [c.solutions.solutions for c in v.cases]
        assert w.merged() == v.merged() and w.trivial_solutions() == v.trivial_solutions()
    assert parsed["prime_graph"].equal


def test_run_all(capsys, monkeypatch, verdicts):
    monkeypatch.setattr(cli, "run_all", lambda tables, **kw: verdicts)
    code, out, _ = run(capsys, "run-all", "--tables", M12, "--format", "md")
    assert code == 2  # order 12 hits the case limit, order 24 is open
    assert "(KC) holds: π(G) = π(V(ZG))" in out
    assert "Unit edges: 2-3, 2-5" in out


def test_run_all_empty_directory(capsys, tmp_path):
    code, _, err = run(capsys, "run-all", "--tables", tmp_path)
    assert code == 1 and "no table files" in err


def test_missing_command():
    with pytest.raises(SystemExit):
        cli.main([])

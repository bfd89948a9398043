import json

import pytest

from corealm.cli import run

from conftest import DATA, TESTS, WALK



def cli(capsys, *argv):
    code = run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_project(capsys):
    code, out, _ = cli(capsys, "project", WALK / "wrestler.alm", "--history",
                       WALK / "wrestler.hist", "--horizon", 1, "--step", 1,
                       "--fluent", "is_restrained")
    assert code == 0
    assert out.splitlines() == ["is_restrained(opponent) = true @ 1",
                                "is_restrained(wrestler) = false @ 1"]


def test_project_uncertain_values_listed(capsys):
    code, out, _ = cli(capsys, "project", WALK / "wrestler.alm", "--horizon", 0,
                       "--fluent", "is_restrained(opponent)")
    assert out.strip() == "is_restrained(opponent) in {false, true} @ 0"


def test_plan(capsys):
    code, out, _ = cli(capsys, "plan", WALK / "wrestler_ext.alm", "--history",
                       WALK / "wrestler.hist", "--goal", "is_restrained(opponent)=false",
                       "--max-horizon", 2)
    assert code == 0
    assert out.splitlines() == ["plan 1: u(opponent,opponent)@1",
                                "plan 2: u(wrestler,opponent)@1"]


def test_plan_failure_json(capsys):
    code, out, _ = cli(capsys, "--format", "json", "plan", WALK / "wrestler.alm", "--history",
                       WALK / "wrestler.hist", "--goal", "is_restrained(opponent)=false",
                       "--max-horizon", 1)
    assert code == 1
    data = json.loads(out)
    assert data["ok"] is False and data["error"]["type"] == "NoPlanWithinHorizon"


def test_postdict(capsys):
    code, out, _ = cli(capsys, "postdict", WALK / "wrestler.alm", "--history",
                       WALK / "wrestler_late.hist", "--horizon", 1)
    assert code == 0
    assert out.splitlines() == ["completion 1: is_restrained(opponent) = false",
                                "completion 2: is_restrained(opponent) = true"]


def test_search_json(capsys):
    code, out, _ = cli(capsys, "--format", "json", "search", "restrain")
    assert code == 0
    assert [e["word"] for e in json.loads(out)["entries"]] == ["restrain", "restrained"]


def test_search_table(capsys):
    _, out, _ = cli(capsys, "search", "restrain", "--pos", "v")
    lines = out.splitlines()
    assert lines[0].split()[:2] == ["word", "pos"] and len(lines) == 2


def test_deps(capsys):
    _, out, _ = cli(capsys, "deps", "motion")
    assert out.split() == ["entity_event_and_action", "unobstructing_and_obstructing",
                           "unrestraining_and_restraining", "motion"]


def test_assemble_then_check(capsys, tmp_path):
    target = tmp_path / "t.alm"
    assert cli(capsys, "assemble", "motion", "--with-optional", "-o", target)[0] == 0
    assert target.read_text().startswith("theory assembled")
    code, out, _ = cli(capsys, "check", target)
    assert code == 0 and out.strip().endswith("ok")


def test_check_reports_errors(capsys, tmp_path):
    bad = tmp_path / "bad.alm"
    bad.write_text((WALK / "travel.alm").read_text().replace("dest(X) = D.", "nowhere(X) = D."))
    code, out, _ = cli(capsys, "check", bad)
    assert code == 1 and "unknown function" in out


def test_compile_to_directory_and_solve(capsys, tmp_path):
    assert cli(capsys, "compile", WALK / "travel.alm", "--horizon", 1, "-o", tmp_path)[0] == 0
    lp = tmp_path / "travel.h1.lp"
    assert lp.read_text() == (TESTS / "golden" / "travel.h1.lp").read_text()
    code, out, _ = cli(capsys, "solve", lp, "--max-models", 2)
    assert code == 0 and out.count("Answer:") == 2


def test_solve_unsat(capsys):
    code, out, _ = cli(capsys, "solve", TESTS / "fixtures" / "ground" / "04_odd_loop.lp")
    assert code == 1 and "UNSATISFIABLE" in out


def test_solve_all_models(capsys):
    code, out, _ = cli(capsys, "solve", TESTS / "fixtures" / "ground" / "03_even_loop.lp")
    assert out.splitlines() == ["Answer: 1", "a", "Answer: 2", "b", "SATISFIABLE"]


def test_km2alm(capsys, tmp_path):
    km = DATA / "km"
    code, out, err = cli(capsys, "km2alm", km / "core.km", km / "figure1.km",
                         km / "obstruction.km", "--preps", DATA / "preps.json",
                         "--opposites", DATA / "opposites.json", "--name", "obst")
    assert code == 0
    assert out.startswith("module obst")
    assert "module obst_optional" in out
    assert "fluent basic is_obstructed : spatial_entity -> booleans" in out


def test_lib_dir_flag(capsys, tmp_path):
    code, out, _ = cli(capsys, "--lib-dir", tmp_path, "deps", "motion")
    assert code == 1


@pytest.mark.parametrize("argv", [[], ["bogus"], ["project", "x.alm"]])
def test_usage_errors(capsys, argv):
    assert run(argv) == 2


def test_missing_file(capsys):
    code, _, err = cli(capsys, "check", "/nonexistent.alm")
    assert code == 1 and err

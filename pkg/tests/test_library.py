import json
import shutil

import pytest

from corealm import library
from corealm.alm.model import SystemDescription, UnknownModule, validate
from corealm.alm.parser import parse_system_description, parse_theory
from corealm.asp.ground import ground
from corealm.asp.solve import solve
from corealm.compile import compile_sd
from corealm.library import LibraryError, assemble, closure, deps, resolve_imports, search

from conftest import DATA, WALK

ROOT = "entity_event_and_action"


def copy_lib(tmp_path):
    dst = tmp_path / "lib"
    shutil.copytree(DATA, dst)
    return dst


def test_manifest_lists_every_module(lib):
    assert sorted(lib.names()) == sorted(p.stem for p in (DATA / "modules").glob("*.alm"))


# an empty structure leaves every sort without instances, which is the point here
@pytest.mark.filterwarnings("ignore::corealm.compile.UnboundedSort")
@pytest.mark.parametrize("name", library.load(DATA).names())
def test_module_closure_validates_and_solves(lib, name):
    mods = tuple(closure(lib, [name]))
    sd = SystemDescription("t", name, modules=mods)
    assert validate(sd).ok
    assert len(solve(ground(compile_sd(sd, 1)))) == 1


def test_dependency_depth(lib):
    regular = [n for n in lib.names() if not lib.info[n].optional]
    assert max(len(deps(lib, n)) - 1 for n in regular) <= 3


def test_deps_root_first(lib):
    assert deps(lib, "unrestraining_and_restraining") == [
        ROOT, "unobstructing_and_obstructing", "unrestraining_and_restraining"]
    assert deps(lib, ROOT) == [ROOT]
    with pytest.raises(UnknownModule):
        deps(lib, "nope")


def test_search_restrain(lib):
    hits = search(lib, "restrain")
    assert [(e.word, e.pos, e.target, e.module) for e in hits] == [
        ("restrain", "v", "restrain", "unrestraining_and_restraining"),
        ("restrained", "a", "is_restrained", "unrestraining_and_restraining")]
    assert [e.word for e in search(lib, "RESTRAIN", pos="a")] == ["restrained"]


def test_search_ranks_gloss_matches_last(lib):
    hits = search(lib, "block")
    assert hits[0].word == "block"
    ranks = [0 if e.word == "block" else 1 if "block" in e.word else 2 for e in hits]
    assert ranks == sorted(ranks)


def test_search_miss(lib):
    assert search(lib, "zzzz") == []


def test_assemble_optional_adds_axioms(lib):
    _, plain = parse_theory(assemble(lib, ["unrestraining_and_restraining"]))
    _, full = parse_theory(assemble(lib, ["unrestraining_and_restraining"], True))
    assert [m.name for m in plain] == deps(lib, "unrestraining_and_restraining")
    extra = [m for m in full if m.optional]
    assert {m.name for m in extra} == {"unobstructing_and_obstructing_optional",
                                       "unrestraining_and_restraining_optional"}
    assert sum(len(m.axioms) for m in full) > sum(len(m.axioms) for m in plain)


def test_assemble_nothing(lib):
    name, mods = parse_theory(assemble(lib, [], name="empty"))
    assert (name, mods) == ("empty", ())


def test_resolve_imports(lib):
    sd = parse_system_description((WALK / "wrestler.alm").read_text())
    full = resolve_imports(sd, lib)
    assert [m.name for m in full.modules][:3] == deps(lib, "unrestraining_and_restraining")
    bad = parse_system_description((WALK / "wrestler.alm").read_text().replace(
        "coreALMlib", "otherlib"))
    with pytest.raises(LibraryError):
        resolve_imports(bad, lib)


def test_load_empty_dir(tmp_path):
    with pytest.raises(LibraryError):
        library.load(tmp_path)


def test_load_missing_file(tmp_path):
    root = copy_lib(tmp_path)
    (root / "modules" / "motion.alm").unlink()
    with pytest.raises(LibraryError, match="missing file"):
        library.load(root)


def test_load_dangling_dependency(tmp_path):
    root = copy_lib(tmp_path)
    data = json.loads((root / "manifest.json").read_text())
    data["modules"][-1]["depends_on"] = ["ghost"]
    (root / "manifest.json").write_text(json.dumps(data))
    with pytest.raises(LibraryError, match="dangling"):
        library.load(root)


def test_load_corrupt_manifest(tmp_path):
    root = copy_lib(tmp_path)
    (root / "manifest.json").write_text("{")
    with pytest.raises(LibraryError, match="corrupt"):
        library.load(root)


def test_lookup_target_must_exist(tmp_path):
    root = copy_lib(tmp_path)
    with (root / "lookup.jsonl").open("a") as f:
        f.write(json.dumps({"word": "zap", "pos": "v", "sense": 1, "gloss": "",
                            "target_kind": "action-class", "target": "zap",
                            "module": ROOT}) + "\n")
    with pytest.raises(LibraryError, match="not declared"):
        library.load(root)


def test_lib_dir_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("COREALM_LIB_DIR", str(tmp_path))
    assert library.default_path() == tmp_path


def test_build_reproduces_shipped_files(tmp_path):
    root = copy_lib(tmp_path)
    shutil.rmtree(root / "modules")
    (root / "manifest.json").unlink()
    (root / "lookup.jsonl").unlink()
    library.build(root)
    for rel in ["manifest.json", "lookup.jsonl"] + [
            f"modules/{p.name}" for p in (DATA / "modules").glob("*.alm")]:
        assert (root / rel).read_bytes() == (DATA / rel).read_bytes(), rel
    assert sorted(p.name for p in (root / "modules").iterdir()) == sorted(
        p.name for p in (DATA / "modules").iterdir())

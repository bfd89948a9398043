import warnings
from itertools import product

import pytest

from corealm.alm.parser import parse_system_description
from corealm.asp.ground import format_atom, ground
from corealm.asp.solve import solve
from corealm.asp.syntax import emit_text, parse_program, parse_rule
from corealm.compile import (CompileError, InvalidSystemDescription, UnboundedSort, compile_sd,
                             output_name)

from conftest import GOLDEN, TESTS, WALK
from oracles import PEOPLE, wrestler_initial_states, wrestler_state_ok

ALM = TESTS / "fixtures" / "alm"


def sd_of(path):
    return parse_system_description(path.read_text(), path.name)


def models(prog, extra: str = "") -> list[set[str]]:
    for line in filter(None, extra.split("\n")):
        prog.rules.append(parse_rule(line))
    return [{format_atom(a) for a in m} for m in solve(ground(prog))]


@pytest.fixture()
def travel():
    return sd_of(WALK / "travel.alm")


def test_travel_golden(travel):
    assert emit_text(compile_sd(travel, 1)) == (GOLDEN / "travel.h1.lp").read_text()
    assert output_name(travel, 1) == "travel.h1.lp"


def test_causal_law_ground_instances(travel):
    prog = compile_sd(travel, 1)
    prog.rules.append(parse_rule("{ occurs(A,0) : action(A) }."))
    gp = ground(prog)
    laws = [r for r in gp.rules if r.head is not None
            and gp.atoms[r.head][0] == "val"
            and any(gp.atoms[p][0] == "occurs" for p in r.pos)]
    assert len(laws) == 4


def test_emit_parse_grounds_identically(travel):
    prog = compile_sd(travel, 2)
    assert str(ground(parse_program(emit_text(prog)))) == str(ground(prog))


def test_functional_fluent_is_single_valued(travel):
    for m in models(compile_sd(travel, 1)):
        for who, i in product(("john", "bob"), (0, 1)):
            assert len([a for a in m if a.startswith(f"val(loc_in({who}),")
                        and a.endswith(f",{i})")]) == 1
    # two values for one fluent at one step must be rejected
    assert models(compile_sd(travel, 1),
                  "val(loc_in(john),a,0).\nval(loc_in(john),b,0).") == []


def test_inertia_and_effect(travel):
    ms = models(compile_sd(travel, 1), "occurs(go(john,a),0).")
    assert len(ms) == 4
    for m in ms:
        assert "val(loc_in(john),a,1)" in m
        bob0 = [a for a in m if a.startswith("val(loc_in(bob),") and a.endswith(",0)")][0]
        assert bob0.replace(",0)", ",1)") in m


def mini_expected(horizon: int, occurs: dict) -> int:
    """Trajectories of the mini domain, counted by direct simulation."""
    count = 0
    for at_a, at_b, held_a, held_b in product("ab", "ab", (0, 1), (0, 1)):
        s = {"at_a": at_a, "at_b": at_b, "held_a": held_a, "held_b": held_b}
        ok = True
        for i in range(horizon):
            if occurs.get(i) == "m1":
                if s["held_a"]:
                    ok = False
                    break
                s = dict(s, at_a="b")
        count += ok
    return count


@pytest.mark.parametrize("horizon,occurs", [
    (0, {}), (1, {}), (1, {0: "m1"}), (2, {1: "m1"}), (2, {0: "m1", 1: "m1"})])
def test_mini_counts_match_simulation(horizon, occurs):
    extra = "\n".join(f"occurs({a},{i})." for i, a in occurs.items())
    got = models(compile_sd(sd_of(ALM / "mini.alm"), horizon), extra)
    assert len(got) == mini_expected(horizon, occurs)


def test_defined_fluent_closed_world():
    for m in models(compile_sd(sd_of(ALM / "mini.alm"), 1)):
        for x, i in product("ab", (0, 1)):
            assert (f"holds(free({x}),{i})" in m) == (f"-holds(held({x}),{i})" in m)
            assert f"-holds(free({x}),{i})" not in m


def wrestler_state(m: set, i: int) -> dict:
    s = {}
    for x in PEOPLE:
        for f in ("is_accessible", "is_obstructed", "is_restrained"):
            s[(f, x)] = f"holds({f}({x}),{i})" in m
        for y in PEOPLE:
            for f in ("is_at", "obstructed_by", "restrained_by"):
                s[(f, x, y)] = f"holds({f}({x},{y}),{i})" in m
    return s


def test_state_constraints_hold_in_every_model(wrestler):
    ms = models(compile_sd(wrestler, 0))
    assert len(ms) == len(list(wrestler_initial_states()))
    assert all(wrestler_state_ok(wrestler_state(m, 0)) for m in ms)
    for m in models(compile_sd(wrestler, 1), "occurs(r,0)."):
        assert wrestler_state_ok(wrestler_state(m, 1))


def test_inertia_only_domain():
    sd = parse_system_description("""\
system description still
  theory t
    module m
      sort declarations
        things :: universe
      function declarations
        fluent basic lit : things -> booleans
  structure s
    instances
      a, b in things
""")
    ms = models(compile_sd(sd, 2))
    assert len(ms) == 4
    for m in ms:
        for x in "ab":
            vals = {f"holds(lit({x}),{i})" in m for i in range(3)}
            assert len(vals) == 1


def test_unbounded_sort_warning():
    text = (ALM / "mini.alm").read_text().replace(
        "things :: universe", "things, ghosts :: universe").replace(
        "fluent defined free : things -> booleans",
        "fluent defined free : things -> booleans\n      fluent defined spooky : ghosts -> booleans"
    ).replace("free(O) if -held(O).", "free(O) if -held(O).\n      false if -spooky(G).")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        compile_sd(parse_system_description(text), 1)
    assert any(issubclass(w.category, UnboundedSort) for w in caught)


def test_invalid_description_rejected():
    text = (ALM / "mini.alm").read_text().replace("free(O) if -held(O).", "free(O) if -gone(O).")
    with pytest.raises(InvalidSystemDescription):
        compile_sd(parse_system_description(text), 1)


def test_unresolved_import_and_bad_horizon(travel):
    sd = parse_system_description((WALK / "wrestler.alm").read_text())
    with pytest.raises(CompileError):
        compile_sd(sd, 1)
    with pytest.raises(CompileError):
        compile_sd(travel, -1)


from pathlib import Path

import pytest

from corealm.asp.bruteforce import TooLarge, brute_force
from corealm.asp.ground import UnsafeRule, format_atom, ground, ground_text
from corealm.asp.solve import ResourceLimit, consequences, projected, satisfiable, solve
from corealm.asp.syntax import AspProgram, AspSyntaxError, emit_text, parse_program

from oracles import enumerate_stable, is_stable

FIXTURES = sorted((Path(__file__).parent / "fixtures" / "ground").glob("*.lp"))


def models(text: str) -> list[set]:
    return [{format_atom(a) for a in m} for m in solve(ground_text(text))]


def test_even_loop_has_two_models():
    assert models("a :- not b. b :- not a.") == [{"a"}, {"b"}]


def test_empty_program_has_one_empty_model():
    assert models("") == [set()]
    assert [set(m) for m in brute_force(ground_text(""))] == [set()]


def test_unsupported_constraint_kills_everything():
    assert models(":- not a.") == []
    assert brute_force(ground_text(":- not a.")) == []


def test_classical_negation_is_consistency_constraint():
    assert models("a. -a.") == []
    assert models("-a :- not a.") == [{"-a"}]


def test_choice_rule_bounds():
    assert len(models("1 { a; b; c } 2.")) == 6
    assert models("{ a } 0.") == [set()]


def test_variables_and_arithmetic():
    got = models("n(1). n(2). m(X+1) :- n(X), X < 2.")
    assert got == [{"n(1)", "n(2)", "m(2)"}]


def test_unsafe_rule_rejected():
    with pytest.raises(UnsafeRule):
        ground(parse_program("p(X) :- not q(X)."))


def test_syntax_error_has_position():
    with pytest.raises(AspSyntaxError) as e:
        parse_program("a :- b\nc.")
    assert e.value.line >= 1


def test_atom_limit():
    prog = parse_program("n(1). n(2). n(3). p(X) :- n(X).")
    with pytest.raises(ResourceLimit):
        ground(prog, atom_limit=3)


def test_bruteforce_too_large():
    text = " ".join(f"{{ a{k} }}." for k in range(21))
    with pytest.raises(TooLarge):
        brute_force(ground_text(text))


def test_satisfiable_and_consequences():
    gp = ground_text("a :- not b. b :- not a. c :- a. c :- b.")
    assert satisfiable(gp) is not None
    ids = range(len(gp.atoms))
    cautious, brave = consequences(gp, ids)
    assert {format_atom(gp.atoms[i]) for i in cautious} == {"c"}
    assert {format_atom(gp.atoms[i]) for i in brave} == {"a", "b", "c"}
    assert consequences(ground_text("a :- not a."), []) is None


def test_projected_enumeration_is_distinct():
    gp = ground_text("{ a; b }. c :- a.")
    a = gp.index[("a",)]
    assert sorted(len(p) for p in projected(gp, [a])) == [0, 1]


def test_solve_is_deterministic():
    gp = ground_text("{ a; b; c }.")
    assert [str(m) for m in solve(gp)] == [str(m) for m in solve(gp)]


def test_emit_then_parse_gives_same_grounding():
    text = ("n(1). n(2). { p(X) : n(X) } 1. q(X+1) :- p(X), not r. "
            ":- q(3). -s :- not r. r :- not -s.")
    prog = parse_program(text)
    again = parse_program(emit_text(prog))
    assert str(ground(again)) == str(ground(prog))


def test_emit_empty_program():
    assert emit_text(AspProgram()) == ""


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
def test_fixture_models_are_stable(path):
    gp = ground_text(path.read_text())
    for m in solve(gp):
        assert is_stable(gp, m)


@pytest.mark.parametrize("path", FIXTURES, ids=lambda p: p.stem)
def test_fixture_oracles_agree(path):
    gp = ground_text(path.read_text())
    assert set(brute_force(gp)) == enumerate_stable(gp)


# model counts frozen from the independent oracle in tests/oracles.py
EXPECTED_COUNTS = {
    "01_empty": 1, "02_fact": 1, "03_even_loop": 2, "04_odd_loop": 0,
    "05_odd_loop_escape": 1, "06_constraint_only": 0, "07_constraint_kills": 0,
    "08_chain": 1, "09_positive_loop": 1, "10_positive_loop_support": 2,
    "11_choice_free": 8, "12_choice_exact": 3, "13_choice_bounds": 4, "14_choice_body": 4,
    "15_classical": 2, "16_classical_conflict": 0, "17_classical_inertia": 4,
    "18_three_cycle": 0, "19_four_cycle": 2, "20_constraint_pair": 2, "21_unfounded": 0,
    "22_guess_check": 3, "23_vars": 6, "24_arith": 0, "25_compare": 4,
    "26_default_chain": 1, "27_constraint_neg": 2, "28_choice_lower_fail": 0,
}


def test_fixture_counts():
    got = {p.stem: len(solve(ground_text(p.read_text()))) for p in FIXTURES}
    assert got == EXPECTED_COUNTS

import warnings

import pytest

from corealm.alm.model import (DependencyCycle, Definition, DynamicCausalLaw, EmptySort,
                               Executability, ModuleDecl, SortHierarchy, StateConstraint,
                               SystemDescription, UnknownModule, expand_schemas, flatten_theory,
                               module_closure, validate)
from corealm.alm.parser import (AlmSyntaxError, UnknownKeyword, format_axiom, parse_axiom,
                                parse_module, parse_system_description, parse_theory, print_alm,
                                print_theory)

from conftest import WALK

MODULE = """\
module moving
  depends on things_module
  sort declarations
    points, things :: universe
    move :: actions
      attributes
        actor : things
        dest : points
  function declarations
    fluent basic loc_in : things -> points
    fluent defined somewhere : things -> booleans
  axioms
    occurs(X) causes loc_in(A) = D if instance(X, move), actor(X) = A, dest(X) = D.
    somewhere(T) if loc_in(T) = P.
    impossible occurs(X) if instance(X, move), actor(X) = A, dest(X) = D, loc_in(A) = D.
    false if loc_in(T) = P, -somewhere(T).
"""


def test_parse_module_axiom_kinds():
    m = parse_module(MODULE)
    assert m.name == "moving" and m.depends_on == ("things_module",)
    kinds = [type(a) for a in m.axioms]
    assert kinds == [DynamicCausalLaw, Definition, Executability, StateConstraint]


def test_print_parse_round_trip():
    m = parse_module(MODULE)
    assert parse_module(print_alm(m)) == m
    assert print_alm(parse_module(print_alm(m))) == print_alm(m)


@pytest.mark.parametrize("name", ["wrestler.alm", "wrestler_ext.alm", "travel.alm"])
def test_walkthrough_round_trip(name):
    sd = parse_system_description((WALK / name).read_text())
    assert parse_system_description(print_alm(sd)) == sd


def test_theory_round_trip():
    m = parse_module(MODULE)
    name, mods = parse_theory(print_theory("t", [m]))
    assert name == "t" and mods == (m,)


def test_unicode_negation_and_comments():
    ax = parse_axiom("¬is_accessible(O) if is_obstructed(O).  % subclass")
    assert format_axiom(ax) == "-is_accessible(O) if is_obstructed(O)."


def test_empty_input_is_syntax_error():
    with pytest.raises(AlmSyntaxError) as e:
        parse_system_description("")
    assert e.value.span.line == 1


def test_unknown_keyword_reports_span():
    with pytest.raises(UnknownKeyword) as e:
        parse_module("modul x\n")
    assert (e.value.span.line, e.value.span.column) == (1, 1)


def test_bad_axiom_position():
    text = MODULE.replace("somewhere(T) if loc_in(T) = P.", "somewhere(T) if loc_in(T = P.")
    with pytest.raises(AlmSyntaxError) as e:
        parse_module(text)
    assert e.value.span.line == 14


def test_validate_reports_unknown_symbol():
    m = parse_module(MODULE.replace("  depends on things_module\n", "").replace(
        "-somewhere(T)", "-elsewhere(T)"))
    report = validate(m)
    assert report.codes() == ["unknown function"]


def test_validate_unknown_module():
    report = validate(parse_module(MODULE))
    assert "unknown module" in report.codes()


def test_validate_sort_cycle():
    m = parse_module("module m\n  sort declarations\n    a :: b\n    b :: a\n")
    assert "sort cycle" in validate(m).codes()


def test_dependency_cycle():
    mods = {"a": ModuleDecl("a", ("b",)), "b": ModuleDecl("b", ("a",))}
    with pytest.raises(DependencyCycle):
        module_closure(mods, "a")
    with pytest.raises(UnknownModule):
        module_closure(mods, "c")


def test_flatten_respects_optional():
    base = ModuleDecl("base")
    opt = ModuleDecl("base_optional", ("base",), optional=True)
    assert flatten_theory([base, opt], "base").axioms == ()
    merged = flatten_theory([base, opt], "base", include_optional=True)
    assert merged.name == "base"


def test_schema_expansion(lib):
    sd = parse_system_description((WALK / "travel.alm").read_text())
    hierarchy = SortHierarchy(sd.modules[0].sorts)
    st = expand_schemas(sd.structure, hierarchy)
    names = [str(n) for i in st.instances if i.sort == "move" for n in i.names]
    assert names == ["go(john, a)", "go(john, b)", "go(bob, a)", "go(bob, b)"]


def test_schema_over_empty_sort_warns():
    sd = parse_system_description((WALK / "travel.alm").read_text().replace(
        "      a, b in points\n", ""))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        st = expand_schemas(sd.structure, SortHierarchy(sd.modules[0].sorts))
    assert any(issubclass(w.category, EmptySort) for w in caught)
    assert not [i for i in st.instances if i.sort == "move"]


def test_validate_structure_sort_mismatch():
    text = (WALK / "travel.alm").read_text() + "      g in move\n        actor = a\n"
    codes = validate(parse_system_description(text)).codes()
    assert "sort mismatch" in codes


def test_system_description_defaults():
    sd = SystemDescription("x")
    assert validate(sd).ok

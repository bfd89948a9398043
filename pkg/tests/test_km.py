import pytest

from corealm.km.kb import (A, AddList, AtLeast, AtMost, AttrSpec, ExcludedValues, Exactly,
                           MustBeA, MustntBeA, PreparatoryEvent, ResultingState, TheAttrOfSelf,
                           UnifyConstraint, UnsupportedConstruct, lift_km, lift_spec)
from corealm.km.sexpr import Str, Sym, UnbalancedParen, parse_sexprs, print_sexprs

from conftest import DATA

FIGURE1 = (DATA / "km" / "figure1.km").read_text()
IS_AT = """(is-at has
  (instance-of (Spatial-Relation))
  (domain (Spatial-Entity))
  (range (Spatial-Entity))
  (cardinality (N-to-N))
  (fluent-status (*Inertial-Fluent)))"""


def test_nested_list_with_string():
    assert parse_sexprs('(a (b "c"))') == [[Sym("a"), [Sym("b"), Str("c")]]]


def test_figure1c_shape():
    forms = parse_sexprs(IS_AT)
    assert len(forms) == 1
    # head, 'has', then the five slot entries
    assert len(forms[0]) == 7
    assert [e[0].name for e in forms[0][2:]] == [
        "instance-of", "domain", "range", "cardinality", "fluent-status"]


def test_unbalanced_reports_position():
    with pytest.raises(UnbalancedParen) as e:
        parse_sexprs("(a (b)")
    assert (e.value.line, e.value.column) == (1, 1)
    with pytest.raises(UnbalancedParen):
        parse_sexprs("a)")


def test_comments_keywords_and_ints():
    forms = parse_sexprs('; note\n(:triple "x" 2 "v")')
    assert forms[0][0].is_keyword and forms[0][2] == 2


def test_print_parse_identity():
    forms = parse_sexprs(FIGURE1)
    assert parse_sexprs(print_sexprs(forms)) == forms


def test_lift_is_at_slot():
    s = lift_km(parse_sexprs(IS_AT)).slots["is-at"]
    assert (s.cardinality, s.fluent_status, s.domain, s.range) == (
        "N-to-N", "*Inertial-Fluent", "Spatial-Entity", "Spatial-Entity")


def test_lift_be_obstructed():
    c = lift_km(parse_sexprs(FIGURE1)).classes["Be-Obstructed"]
    assert c.kind == "state" and c.superclasses == ["Be-Inaccessible"]
    assert [x for x in c.every_clauses if isinstance(x, AttrSpec)] == [
        AttrSpec("object", A("Entity"))]


def test_lift_obstruct():
    c = lift_km(parse_sexprs(FIGURE1)).classes["Obstruct"]
    assert c.kind == "action"
    assert AttrSpec("object", A("Tangible-Entity")) in c.every_clauses
    assert ResultingState("Be-Obstructed") in c.every_clauses
    adds = [x for x in c.every_clauses if isinstance(x, AddList)]
    assert len(adds) == 1 and len(adds[0].items) == 2
    assert adds[0].items[1][0] == Sym("if")
    assert any(isinstance(x, PreparatoryEvent) for x in c.every_clauses)
    assert ("obstruct", 2, "v") in c.wn20_synset


def test_no_clause_silently_dropped():
    text = FIGURE1 + "(every Obstruct has (subevent ((a Move))) (text-gen (\"x\")))"
    kb = lift_km(parse_sexprs(text))
    assert kb.lifted_count() + len(kb.unsupported) == kb.clause_count
    assert {u.name for u in kb.unsupported} >= {"subevent"}
    with pytest.raises(UnsupportedConstruct):
        lift_km(parse_sexprs(text), strict=True)


@pytest.mark.parametrize("text,spec", [
    ("(a Rock)", A("Rock")),
    ("(must-be-a Rock)", MustBeA("Rock")),
    ("(mustnt-be-a Rock)", MustntBeA("Rock")),
    ("(at-most 1 Rock)", AtMost(1, "Rock")),
    ("(at-least 2 Rock)", AtLeast(2, "Rock")),
    ("(exactly 0 Rock)", Exactly(0, "Rock")),
    ("(the instrument of Self)", TheAttrOfSelf("instrument")),
    ("(excluded-values (the instrument of Self))", ExcludedValues("instrument")),
    ("(constraint (TheValue & (the instrument of Self)))", UnifyConstraint("instrument")),
    ("(at-most 3 Rock)", None),
])
def test_lift_spec_variants(text, spec):
    assert lift_spec(parse_sexprs(text)[0]) == spec

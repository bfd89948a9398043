from pathlib import Path

import pytest

from corealm.alm.model import SystemDescription, validate
from corealm.alm.parser import format_axiom, print_alm
from corealm.km.kb import lift_km
from corealm.km.sexpr import parse_sexprs
from corealm.km_to_alm import (MissingObjectRelation, PrepositionMap, TranslationErrors,
                               UnknownPreposition, UnknownState, UnrecognizedTriplePattern,
                               UnsupportedCardinality, apply_patch, format_output,
                               opposites_report, to_modules, translate_kb)

from conftest import DATA, GOLDEN, TESTS

BLOCKING = (TESTS / "fixtures" / "km" / "blocking.km").read_text()
BLOCK_PREPS = PrepositionMap({"Be-Blocked": {"instrument": "with"}})


def kb_of(*texts):
    kb = None
    for t in texts:
        part = lift_km(parse_sexprs(t))
        kb = part if kb is None else kb.merge(part)
    return kb


def shipped_kb(*names):
    return kb_of(*[(DATA / "km" / f"{n}.km").read_text() for n in names])


def by_source(outputs):
    return {o.source: o for o in outputs}


def axioms(out) -> list[str]:
    return [format_axiom(a) for a in out.axioms]


def translate_errors(text, preps=None) -> list:
    with pytest.raises(TranslationErrors) as e:
        translate_kb(kb_of(text), preps or PrepositionMap())
    return e.value.errors


@pytest.fixture(scope="module")
def figure1():
    kb = shipped_kb("core", "figure1", "obstruction")
    return by_source(translate_kb(kb, PrepositionMap.load(DATA / "preps.json")))


@pytest.fixture(scope="module")
def blocking():
    return by_source(translate_kb(kb_of(BLOCKING), BLOCK_PREPS))


@pytest.mark.parametrize("source,golden", [
    ("is-at", "figure1_is_at.txt"), ("object", "figure1_object.txt"),
    ("Be-Obstructed", "figure1_be_obstructed.txt"), ("Obstruct", "figure1_obstruct.txt")])
def test_figure1_goldens(figure1, source, golden):
    assert format_output(figure1[source]) == (GOLDEN / golden).read_text()


def test_state_with_secondary_relation(blocking):
    out = blocking["Be-Blocked"]
    names = [d.name for d in out.declarations]
    assert names == ["is_blocked", "blocked_with"]
    assert axioms(out)[:2] == [
        "is_blocked(O) if blocked_with(O, I).",
        "-blocked_with(O, I) if -is_blocked(O)."]


def test_state_subclass_axiom(blocking):
    assert "is_shut(O) if is_blocked(O)." in axioms(blocking["Be-Blocked"])


def test_single_relation_state(blocking):
    out = blocking["Be-Wet"]
    assert len(out.declarations) == 1 and out.axioms == []


def test_preconditions(blocking):
    ax = axioms(blocking["Block"])
    assert ("impossible occurs(X) if instance(X, block), object(X, A1), instrument(X, A2), "
            "-blocked_with(A1, A2).") in ax
    assert "impossible occurs(X) if instance(X, block), object(X, A), is_wet(A)." in ax


def test_conditional_add_list(blocking):
    ax = axioms(blocking["Block"])
    assert ("occurs(X) causes blocked_with(A1, A2) if instance(X, block), object(X, A1), "
            "instrument(X, A2).") in ax
    assert ("occurs(X) causes is_blocked(A) if instance(X, block), object(X, A), "
            "-defined_instrument(X).") in ax
    assert "defined_instrument(X) if instrument(X, A)." in ax


def test_del_list(blocking):
    assert ("occurs(X) causes -is_blocked(A) if instance(X, unblock), object(X, A), "
            "is_blocked(A).") in axioms(blocking["Unblock"])


def test_empty_kb():
    assert translate_kb(kb_of(""), PrepositionMap()) == []


def test_one_to_many_cardinality_rejected():
    text = ("(holder has (instance-of (Participant-Relation)) (domain (Event))"
            " (range (Entity)) (cardinality (1-to-N)) (fluent-status (*Inertial-Fluent)))")
    errs = translate_errors(text)
    assert [type(e) for e in errs] == [UnsupportedCardinality]


def test_state_without_object_relation():
    errs = translate_errors("(Be-Odd has (superclasses (State)))")
    assert [type(e) for e in errs] == [MissingObjectRelation]


def test_missing_preposition():
    errs = translate_errors(BLOCKING)
    assert UnknownPreposition in {type(e) for e in errs}


def test_unknown_resulting_state():
    text = BLOCKING.replace("(resulting-state ((a Be-Blocked)))", "(resulting-state ((a Be-Gone)))")
    errs = translate_errors(text, BLOCK_PREPS)
    assert UnknownState in {type(e) for e in errs}


def test_unrecognized_triple():
    text = BLOCKING.replace("(:triple (It) object (the object of Self))",
                            "(:triple (It) color (the object of Self))")
    errs = translate_errors(text, BLOCK_PREPS)
    assert UnrecognizedTriplePattern in {type(e) for e in errs}


def test_opposites_report(figure1):
    outs = list(figure1.values())
    report = opposites_report(outs, [["Obstruct", "Unobstruct"]])
    assert report and all("executability" in r for r in report)
    assert opposites_report(outs, [["Obstruct", "Nope"]]) == []


def test_patch_adds_and_renames(blocking):
    patch = {"axioms": {"Block": ["false if is_wet(A), is_blocked(A)"]},
             "rename": {"is_wet": "is_damp"}}
    out = by_source(apply_patch(list(blocking.values()), patch))
    assert "false if is_damp(A), is_blocked(A)." in axioms(out["Block"])
    assert [d.name for d in out["Be-Wet"].declarations] == ["is_damp"]
    assert any("patched" in n for n in out["Block"].notes)


def test_optional_axioms_go_to_leaf_module(figure1):
    main, opt = to_modules(list(figure1.values()), "obstruction")
    assert opt is not None and opt.optional and opt.depends_on == ("obstruction",)
    assert opt.axioms and not set(opt.axioms) & set(main.axioms)


def test_translation_is_deterministic():
    kb = shipped_kb("core", "figure1", "obstruction", "restraint")
    preps = PrepositionMap.load(DATA / "preps.json")
    first = [format_output(o) for o in translate_kb(kb, preps)]
    assert first == [format_output(o) for o in translate_kb(kb, preps)]


@pytest.mark.parametrize("optional", [False, True])
def test_translated_module_validates(blocking, optional):
    main, opt = to_modules(list(blocking.values()), "blocking")
    mods = (main, opt) if optional and opt else (main,)
    assert validate(SystemDescription("b", "blocking", modules=mods)).ok, print_alm(main)

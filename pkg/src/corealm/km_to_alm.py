"""Translation of KM slots, states and action classes into ALM.

Each ``translate_*`` function returns a :class:`TranslationOutput`; a whole
knowledge base is handled by :func:`translate_kb` and packaged into modules
by :func:`to_modules`.  Naming follows ALM conventions: ``Tangible-Entity``
becomes ``tangible_entity``, the state ``Be-Obstructed`` becomes the fluent
``is_obstructed`` and, with a second participant, ``obstructed_<prep>``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path

from .alm.model import (AttributeDecl, Compare, Const, Definition, DynamicCausalLaw,
                        Executability, FunctionDecl, Literal, ModuleDecl, SortDecl,
                        StateConstraint, Var)
from .alm.parser import format_attribute, format_axiom, format_function, format_sort_decl, parse_axiom
from .km.kb import (A, AddList, AtLeast, AtMost, AttrSpec, ClassDecl, Defeats, DelList,
                    Exactly, ExcludedValues, KmKb, MustBeA, MustntBeA, NcsList, PcsList,
                    PreparatoryEvent, ResultingState, SlotDef, SoftPcsList, TheAttrOfSelf,
                    UnifyConstraint, the_attr_of_self)
from .km.sexpr import Sym, format_sexpr


class TranslationError(ValueError):
    pass


class UnsupportedCardinality(TranslationError):
    pass


class MissingObjectRelation(TranslationError):
    pass


class UnknownPreposition(TranslationError):
    pass


class UnknownState(TranslationError):
    pass


class UnsupportedSpec(TranslationError):
    pass


class UnrecognizedTriplePattern(TranslationError):
    def __init__(self, where: str, form):
        super().__init__(f"{where}: unrecognized pattern {format_sexpr(form)}")
        self.form = form


class TranslationErrors(TranslationError):
    def __init__(self, errors: list):
        super().__init__("; ".join(map(str, errors)))
        self.errors = errors


@dataclass
class TranslationOutput:
    source: str = ""
    declarations: list = field(default_factory=list)
    axioms: list = field(default_factory=list)
    optional_axioms: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def extend(self, other: "TranslationOutput") -> "TranslationOutput":
        for mine, theirs in ((self.declarations, other.declarations),
                             (self.axioms, other.axioms),
                             (self.optional_axioms, other.optional_axioms),
                             (self.notes, other.notes)):
            mine.extend(x for x in theirs if x not in mine)
        return self


@dataclass
class PrepositionMap:
    """Prepositions per (state class, participant relation).

    The relations listed for a state are its associated relations.
    ``negations`` maps a state class to the class it negates, so that
    ``Be-Inaccessible`` is expressed through ``-is_accessible``.
    """

    prepositions: dict = field(default_factory=dict)
    negations: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "PrepositionMap":
        data = json.loads(Path(path).read_text())
        return cls(data.get("prepositions", {}), data.get("negations", {}))

    def prep(self, state: str, relation: str) -> str:
        try:
            return self.prepositions[state][relation]
        except KeyError:
            raise UnknownPreposition(f"no preposition for {relation} in {state}") from None

    def associated(self, state: str) -> list[str]:
        return list(self.prepositions.get(state, {}))


# -- naming ------------------------------------------------------------------

_RENAMED = {"Action": "actions", "Event": "actions", "Thing": "universe"}


def alm_name(km: str) -> str:
    if km in _RENAMED:
        return _RENAMED[km]
    return km.lower().replace("-", "_")


def state_base(state: str) -> str:
    if not state.startswith("Be-"):
        raise TranslationError(f"state class {state} does not follow the Be-<f> convention")
    return alm_name(state[3:])


def _t(x):
    if isinstance(x, (Var, Const)):
        return x
    return Var(x) if x[:1].isupper() else Const(x)


def lit(fn: str, *args, neg: bool = False) -> Literal:
    return Literal(fn, tuple(_t(a) for a in args), None, neg)


def instance(x: str, sort: str, neg: bool = False) -> Literal:
    return lit("instance", x, Const(sort), neg=neg)


def state_literal(state: str, args: tuple, holds: bool, preps: PrepositionMap,
                  relation: str | None = None) -> Literal:
    """Literal saying that ``args`` are (or are not) in ``state``."""
    if state in preps.negations:
        if relation is not None:
            raise TranslationError(f"binary use of negated state {state}")
        return lit("is_" + state_base(preps.negations[state]), *args, neg=holds)
    if relation is None:
        return lit("is_" + state_base(state), *args, neg=not holds)
    name = f"{state_base(state)}_{preps.prep(state, relation)}"
    return lit(name, *args, neg=not holds)


# -- slots -------------------------------------------------------------------


def is_attribute_slot(slot: SlotDef) -> bool:
    return slot.instance_of == "Participant-Relation" or (
        slot.instance_of == "Spatial-Relation" and slot.domain == "Event")


def translate_slot(slot: SlotDef) -> TranslationOutput:
    out = TranslationOutput(slot.name)
    if slot.cardinality not in ("N-to-N", "N-to-1"):
        raise UnsupportedCardinality(f"slot {slot.name}: cardinality {slot.cardinality}")
    name = alm_name(slot.name)
    c1, c2 = alm_name(slot.domain), alm_name(slot.range)
    if is_attribute_slot(slot):
        out.declarations.append(AttributeDecl(name, (c2,), "booleans"))
        out.notes.append(f"{slot.name}: attribute of actions")
        return out
    kind = "basic-static" if slot.fluent_status == "*Non-Fluent" else "basic-fluent"
    if slot.cardinality == "N-to-N":
        out.declarations.append(FunctionDecl(name, kind, (c1, c2), "booleans"))
    else:
        out.declarations.append(FunctionDecl(name, kind, (c1,), c2))
    return out


# -- states ------------------------------------------------------------------


def _state_ancestors(state: ClassDecl, kb: KmKb) -> list[ClassDecl]:
    return [kb.classes[n] for n in kb.ancestors(state.name)
            if n in kb.classes and kb.classes[n].kind == "state"]


def _most_specific(classes: list[str], kb: KmKb, where: str) -> str:
    best = classes[0]
    for c in classes[1:]:
        if kb.is_subclass(c, best):
            best = c
        elif not kb.is_subclass(best, c):
            raise TranslationError(f"{where}: incomparable classes {best} and {c}")
    return best


def object_class(state: ClassDecl, kb: KmKb) -> str:
    found = []
    for s in _state_ancestors(state, kb):
        for cl in s.every_clauses:
            if isinstance(cl, AttrSpec) and cl.attr == "object" \
                    and isinstance(cl.spec, (A, MustBeA)):
                found.append(cl.spec.cls)
    if not found:
        raise MissingObjectRelation(f"state {state.name} has no object relation")
    return _most_specific(found, kb, state.name)


def secondary_relations(state: ClassDecl, kb: KmKb, preps: PrepositionMap) -> list:
    """(relation, range class) pairs beyond ``object``: required ones, then associated ones."""
    out: list = []
    for cl in state.every_clauses:
        if isinstance(cl, AttrSpec) and cl.attr != "object" and isinstance(cl.spec, A):
            if cl.attr not in [r for r, _ in out]:
                out.append((cl.attr, cl.spec.cls))
    for r in preps.associated(state.name):
        if r not in [x for x, _ in out]:
            slot = kb.slots.get(r)
            out.append((r, slot.range if slot else "Entity"))
    return out


def translate_state(state: ClassDecl, kb: KmKb, preps: PrepositionMap) -> TranslationOutput:
    out = TranslationOutput(state.name)
    if state.kind != "state":
        raise TranslationError(f"{state.name} is not a state class")
    if state.name in preps.negations:
        out.notes.append(f"{state.name}: expressed as the negation of "
                         f"{preps.negations[state.name]}")
        return out
    f = state_base(state.name)
    c1 = alm_name(object_class(state, kb))
    unary = "is_" + f
    out.declarations.append(FunctionDecl(unary, "basic-fluent", (c1,), "booleans"))
    for r, c2 in secondary_relations(state, kb, preps):
        binary = f"{f}_{preps.prep(state.name, r)}"
        out.declarations.append(FunctionDecl(binary, "basic-fluent", (c1, alm_name(c2)),
                                             "booleans"))
        out.axioms.append(StateConstraint(lit(unary, "O"), (lit(binary, "O", "I"),)))
        out.axioms.append(StateConstraint(lit(binary, "O", "I", neg=True),
                                          (lit(unary, "O", neg=True),)))
    for sup in state.superclasses:
        s = kb.classes.get(sup)
        if s is None or s.kind != "state" or sup == "State":
            continue
        out.axioms.append(StateConstraint(state_literal(sup, ("O",), True, preps),
                                          (lit(unary, "O"),)))
    return out


# -- actions -----------------------------------------------------------------


def narrowing(c: str, attr: str, c1: str, positive: bool = True) -> StateConstraint:
    return StateConstraint(None, (instance("X", c), lit(attr, "X", "A"),
                                  instance("A", c1, neg=positive)))


def _defined(attr: str) -> list:
    name = "defined_" + attr
    return [FunctionDecl(name, "defined-static", ("actions",), "booleans"),
            Definition(lit(name, "X"), (lit(attr, "X", "A"),))]


def _at_most(c: str, attr: str, c1: str, n: int) -> StateConstraint:
    if n == 1:
        return StateConstraint(lit(attr, "X", "A1", neg=True),
                               (lit(attr, "X", "A2"), Compare("!=", Var("A1"), Var("A2")),
                                instance("X", c), instance("A1", c1), instance("A2", c1)))
    return StateConstraint(lit(attr, "X", "A1", neg=True),
                           (lit(attr, "X", "A2"), lit(attr, "X", "A3"),
                            Compare("!=", Var("A1"), Var("A2")),
                            Compare("!=", Var("A1"), Var("A3")),
                            Compare("!=", Var("A2"), Var("A3")),
                            instance("X", c), instance("A1", c1), instance("A2", c1),
                            instance("A3", c1)))


def _split(items: list, out: TranslationOutput) -> None:
    for x in items:
        if isinstance(x, (SortDecl, FunctionDecl, AttributeDecl)):
            if x not in out.declarations:
                out.declarations.append(x)
        elif x not in out.axioms:
            out.axioms.append(x)


def translate_attr_spec(c: str, attr: str, spec, inherited: str | None = None) -> TranslationOutput:
    """Attribute declaration and constraints for ``(every c has (attr (spec)))``.

    ``c`` and the classes inside ``spec`` are KM names; ``inherited`` is the
    (ALM) range of ``attr`` when a superclass already declares it.
    """
    out = TranslationOutput(c)
    cc = alm_name(c)
    attr = alm_name(attr)
    items: list = []

    def at_least_1(c1: str) -> None:
        if inherited is None:
            items.append(AttributeDecl(attr, (c1,), "booleans"))
        elif inherited != c1:
            items.append(narrowing(cc, attr, c1))
        items.extend(_defined(attr))
        items.append(StateConstraint(None, (instance("X", cc),
                                            lit("defined_" + attr, "X", neg=True))))

    def at_least_2(c1: str) -> None:
        if inherited is None:
            items.append(AttributeDecl(attr, (c1,), "booleans"))
        name = "at_least_2_" + attr
        items.append(FunctionDecl(name, "defined-static", ("actions",), "booleans"))
        items.append(Definition(lit(name, "X"),
                                (lit(attr, "X", "A1"), lit(attr, "X", "A2"),
                                 Compare("!=", Var("A1"), Var("A2")),
                                 instance("A1", c1), instance("A2", c1))))
        items.append(StateConstraint(None, (instance("X", cc), lit(name, "X", neg=True))))

    if isinstance(spec, A):
        at_least_1(alm_name(spec.cls))
    elif isinstance(spec, MustBeA):
        items.append(narrowing(cc, attr, alm_name(spec.cls)))
    elif isinstance(spec, MustntBeA):
        items.append(narrowing(cc, attr, alm_name(spec.cls), positive=False))
    elif isinstance(spec, AtMost):
        if spec.n == 0:
            items.append(StateConstraint(None, (instance("X", cc), lit(attr, "X", "A"),
                                                instance("A", alm_name(spec.cls)))))
        else:
            items.append(_at_most(cc, attr, alm_name(spec.cls), spec.n))
    elif isinstance(spec, AtLeast):
        if spec.n == 1:
            at_least_1(alm_name(spec.cls))
        elif spec.n == 2:
            at_least_2(alm_name(spec.cls))
    elif isinstance(spec, Exactly):
        c1 = alm_name(spec.cls)
        if spec.n == 0:
            items.append(StateConstraint(None, (instance("X", cc), lit(attr, "X", "A"),
                                                instance("A", c1))))
        else:
            (at_least_1 if spec.n == 1 else at_least_2)(c1)
            items.append(_at_most(cc, attr, c1, spec.n))
    elif isinstance(spec, TheAttrOfSelf):
        items.append(StateConstraint(lit(attr, "X", "V"),
                                     (lit(alm_name(spec.attr), "X", "V"), instance("X", cc))))
    elif isinstance(spec, ExcludedValues):
        items.append(StateConstraint(None, (instance("X", cc), lit(attr, "X", "A"),
                                            lit(alm_name(spec.attr), "X", "A"))))
    elif isinstance(spec, UnifyConstraint):
        a2 = alm_name(spec.attr)
        items += _defined(attr) + _defined(a2)
        items.append(StateConstraint(None, (instance("X", cc), lit(attr, "X", "A"),
                                            lit(a2, "X", "A", neg=True),
                                            lit("defined_" + a2, "X"))))
        items.append(StateConstraint(None, (instance("X", cc), lit(a2, "X", "A"),
                                            lit(attr, "X", "A", neg=True),
                                            lit("defined_" + attr, "X"))))
    else:
        raise UnsupportedSpec(f"{c}: {spec!r}")
    _split(items, out)
    return out


def _is(e, name: str) -> bool:
    return isinstance(e, Sym) and e.name == name


def _state_of(e, kb: KmKb, where: str) -> tuple[str, list]:
    """``(a Be-f)`` or ``(a Be-f with (r ((the r of Self))) ...)`` -> (state, [r, ...])."""
    if not (isinstance(e, list) and len(e) >= 2 and _is(e[0], "a") and isinstance(e[1], Sym)):
        raise UnrecognizedTriplePattern(where, e)
    state = e[1].name
    rels = []
    if len(e) > 2:
        if not _is(e[2], "with"):
            raise UnrecognizedTriplePattern(where, e)
        for w in e[3:]:
            if not (isinstance(w, list) and len(w) == 2 and isinstance(w[0], Sym)
                    and isinstance(w[1], list) and len(w[1]) == 1
                    and the_attr_of_self(w[1][0]) == w[0].name):
                raise UnrecognizedTriplePattern(where, e)
            rels.append(w[0].name)
    _check_state(state, kb, where)
    return state, rels


def _check_state(state: str, kb: KmKb, where: str) -> None:
    c = kb.classes.get(state)
    if c is None or c.kind != "state":
        raise UnknownState(f"{where}: undeclared state {state}")


def _condition_item(item, where: str) -> tuple[str, object]:
    """``(forall (the attr of Self) (:triple It object-of S))`` or
    ``(:triple (the attr of Self) object-of S)`` -> (attr, S)."""
    if isinstance(item, list) and len(item) == 3 and _is(item[0], "forall"):
        attr = the_attr_of_self(item[1])
        t = item[2]
        if attr and isinstance(t, list) and len(t) == 4 and _is(t[0], ":triple") \
                and _is(t[1], "It") and _is(t[2], "object-of"):
            return attr, t[3]
    if isinstance(item, list) and len(item) == 4 and _is(item[0], ":triple") \
            and _is(item[2], "object-of"):
        attr = the_attr_of_self(item[1])
        if attr:
            return attr, item[3]
    raise UnrecognizedTriplePattern(where, item)


def _precondition_axioms(c: str, items, required: bool, kb: KmKb,
                         preps: PrepositionMap) -> list:
    cc = alm_name(c)
    axioms = []
    for item in items:
        attr, st = _condition_item(item, c)
        state, rels = _state_of(st, kb, c)
        attr = alm_name(attr)
        if not rels:
            body = (instance("X", cc), lit(attr, "X", "A"),
                    state_literal(state, ("A",), not required, preps))
        elif len(rels) == 1:
            a2 = alm_name(rels[0])
            body = (instance("X", cc), lit(attr, "X", "A1"), lit(a2, "X", "A2"),
                    state_literal(state, ("A1", "A2"), not required, preps, rels[0]))
        else:
            raise UnrecognizedTriplePattern(c, item)
        axioms.append(Executability("X", body))
    return axioms


def translate_precondition(c: str, clause, kb: KmKb, preps: PrepositionMap) -> TranslationOutput:
    out = TranslationOutput(c)
    if not isinstance(clause, (PcsList, NcsList)):
        raise TranslationError(f"{c}: not a precondition list")
    out.axioms = _precondition_axioms(c, clause.items, isinstance(clause, PcsList), kb, preps)
    return out


def _rs_triple(e, where: str) -> tuple[str, str] | None:
    """``(:triple (the resulting-state of Self) rel (the attr of Self))`` -> (rel, attr)."""
    if isinstance(e, list) and len(e) == 4 and _is(e[0], ":triple") \
            and the_attr_of_self(e[1]) == "resulting-state" and isinstance(e[2], Sym):
        attr = the_attr_of_self(e[3])
        if attr:
            return e[2].name, attr
    return None


def _has_value(e) -> str | None:
    if isinstance(e, list) and len(e) == 2 and _is(e[0], "has-value"):
        return the_attr_of_self(e[1])
    return None


def _binary_then(e, attr2: str) -> bool:
    """Then-branch relating the resulting state to ``attr2``."""
    if _rs_triple(e, "") == (attr2, attr2):
        return True
    # (forall (the attr2 of Self) (:triple It attr2-of (the resulting-state of Self)))
    return (isinstance(e, list) and len(e) == 3 and _is(e[0], "forall")
            and the_attr_of_self(e[1]) == attr2 and isinstance(e[2], list)
            and len(e[2]) == 4 and _is(e[2][0], ":triple") and _is(e[2][1], "It")
            and _is(e[2][2], attr2 + "-of")
            and the_attr_of_self(e[2][3]) == "resulting-state")


def _defeated_states(defeats, kb: KmKb, where: str) -> list[tuple[str, str | None]]:
    out = []
    for e in defeats:
        # (allof (the object-of of (the attr of Self)) where ((the classes of It) = Be-f))
        if isinstance(e, list) and len(e) == 4 and _is(e[0], "allof") and _is(e[2], "where"):
            src, cond = e[1], e[3]
            attr = None
            if isinstance(src, list) and len(src) == 4 and _is(src[0], "the") \
                    and _is(src[1], "object-of") and _is(src[2], "of"):
                attr = the_attr_of_self(src[3])
            if attr and isinstance(cond, list) and len(cond) == 3 and _is(cond[1], "=") \
                    and isinstance(cond[2], Sym) and isinstance(cond[0], list) \
                    and [x.name for x in cond[0] if isinstance(x, Sym)] == \
                    ["the", "classes", "of", "It"]:
                _check_state(cond[2].name, kb, where)
                out.append((cond[2].name, attr))
                continue
        if isinstance(e, list) and len(e) == 2 and _is(e[0], "a") and isinstance(e[1], Sym):
            _check_state(e[1].name, kb, where)
            out.append((e[1].name, None))
            continue
        raise UnrecognizedTriplePattern(where, e)
    return out


def _del_attr(item, where: str) -> str:
    # (forall (the defeats of Self) (:triple (It) object (the attr of Self)))
    if isinstance(item, list) and len(item) == 3 and _is(item[0], "forall") \
            and the_attr_of_self(item[1]) == "defeats":
        t = item[2]
        if isinstance(t, list) and len(t) == 4 and _is(t[0], ":triple") \
                and (_is(t[1], "It") or t[1] == [Sym("It")]) and _is(t[2], "object"):
            attr = the_attr_of_self(t[3])
            if attr:
                return attr
    raise UnrecognizedTriplePattern(where, item)


def translate_effects(c: str, resulting_state: str | None, add_list, defeats, del_list,
                      kb: KmKb, preps: PrepositionMap) -> TranslationOutput:
    out = TranslationOutput(c)
    cc = alm_name(c)
    items: list = []
    if add_list:
        if resulting_state is None:
            raise TranslationError(f"{c}: add-list without resulting-state")
        _check_state(resulting_state, kb, c)
        rs = resulting_state
        object_attr = None
        for e in add_list:
            t = _rs_triple(e, c)
            if t and t[0] == "object":
                object_attr = t[1]
        for e in add_list:
            t = _rs_triple(e, c)
            if t and t[0] == "object":
                items.append(DynamicCausalLaw("X", state_literal(rs, ("A",), True, preps),
                                              (instance("X", cc), lit(alm_name(t[1]), "X", "A"))))
                continue
            attr2 = _has_value(e[1]) if isinstance(e, list) and len(e) in (4, 6) \
                and _is(e[0], "if") and _is(e[2], "then") else None
            if attr2 is None or not _binary_then(e[3], attr2):
                raise UnrecognizedTriplePattern(c, e)
            attr1 = object_attr
            if len(e) == 6:
                if not _is(e[4], "else"):
                    raise UnrecognizedTriplePattern(c, e)
                t = _rs_triple(e[5], c)
                if not t or t[0] != "object":
                    raise UnrecognizedTriplePattern(c, e)
                attr1 = t[1]
            if attr1 is None:
                raise UnrecognizedTriplePattern(c, e)
            a1, a2 = alm_name(attr1), alm_name(attr2)
            items.append(DynamicCausalLaw("X", state_literal(rs, ("A1", "A2"), True, preps, attr2),
                                          (instance("X", cc), lit(a1, "X", "A1"),
                                           lit(a2, "X", "A2"))))
            if len(e) == 6:
                items += _defined(a2)
                items.append(DynamicCausalLaw("X", state_literal(rs, ("A",), True, preps),
                                              (instance("X", cc), lit(a1, "X", "A"),
                                               lit("defined_" + a2, "X", neg=True))))
    if del_list:
        states = _defeated_states(defeats or (), kb, c)
        if not states:
            raise TranslationError(f"{c}: del-list without defeats")
        for item in del_list:
            attr = alm_name(_del_attr(item, c))
            for state, _ in states:
                items.append(DynamicCausalLaw("X", state_literal(state, ("A",), False, preps),
                                              (instance("X", cc), lit(attr, "X", "A"),
                                               state_literal(state, ("A",), True, preps))))
    _split(items, out)
    return out


def _strip_default(e):
    if isinstance(e, list) and len(e) == 1 and isinstance(e[0], list):
        e = e[0]
    if isinstance(e, list) and len(e) == 2 and _is(e[0], ":default"):
        return e[1]
    return e


def _preparatory_axiom(c: str, e, kb: KmKb) -> Executability:
    """``(if (has-value (the p of Self)) then (a E with (object ((the p of Self)))
    (destination ((a C with (rel ((the q of Self))))))))``: the mover ``p`` must
    already stand in ``rel`` to ``q``."""
    cc = alm_name(c)
    ev = e
    if isinstance(e, list) and len(e) == 4 and _is(e[0], "if") and _is(e[2], "then") \
            and _has_value(e[1]):
        ev = e[3]
    if not (isinstance(ev, list) and len(ev) == 5 and _is(ev[0], "a") and _is(ev[2], "with")):
        raise UnrecognizedTriplePattern(c, e)
    slots = {}
    for w in ev[3:]:
        if not (isinstance(w, list) and len(w) == 2 and isinstance(w[0], Sym)
                and isinstance(w[1], list) and len(w[1]) == 1):
            raise UnrecognizedTriplePattern(c, e)
        slots[w[0].name] = w[1][0]
    mover = the_attr_of_self(slots.get("object"))
    dest = slots.get("destination")
    if not mover or not (isinstance(dest, list) and len(dest) == 4 and _is(dest[0], "a")
                         and _is(dest[2], "with") and isinstance(dest[3], list)
                         and len(dest[3]) == 2 and isinstance(dest[3][0], Sym)
                         and isinstance(dest[3][1], list) and len(dest[3][1]) == 1):
        raise UnrecognizedTriplePattern(c, e)
    rel = dest[3][0].name
    target = the_attr_of_self(dest[3][1][0])
    slot = kb.slots.get(rel)
    if not target or slot is None or is_attribute_slot(slot):
        raise UnrecognizedTriplePattern(c, e)
    return Executability("X", (instance("X", cc), lit(alm_name(mover), "X", "A1"),
                               lit(alm_name(target), "X", "A2"),
                               lit(alm_name(rel), "A1", "A2", neg=True)))


def translate_defeasible(c: str, clause, kb: KmKb, preps: PrepositionMap) -> TranslationOutput:
    out = TranslationOutput(c)
    if isinstance(clause, SoftPcsList):
        out.optional_axioms = _precondition_axioms(c, clause.items, True, kb, preps)
    elif isinstance(clause, PreparatoryEvent):
        for e in clause.expr:
            ax = _preparatory_axiom(c, _strip_default(e), kb)
            if ax not in out.optional_axioms:
                out.optional_axioms.append(ax)
    else:
        raise TranslationError(f"{c}: not a defeasible clause")
    return out


def inherited_attribute(action: ClassDecl, attr: str, kb: KmKb) -> str | None:
    """ALM range of ``attr`` when declared above ``action`` (as a slot or by a superclass)."""
    slot = kb.slots.get(attr)
    if slot is not None and is_attribute_slot(slot):
        return alm_name(slot.range)
    for anc in kb.ancestors(action.name)[1:]:
        c = kb.classes.get(anc)
        if c is None:
            continue
        for cl in c.every_clauses:
            if isinstance(cl, AttrSpec) and cl.attr == attr and isinstance(cl.spec, A):
                return alm_name(cl.spec.cls)
    return None


def translate_action(action: ClassDecl, kb: KmKb, preps: PrepositionMap) -> TranslationOutput:
    out = TranslationOutput(action.name)
    c = action.name
    parents = tuple(alm_name(s) for s in action.superclasses) or ("actions",)
    attrs: list = []
    own: dict[str, str] = {}
    resulting = None
    add_list: list = []
    del_list: list = []
    defeats: list = []
    for cl in action.every_clauses:
        if isinstance(cl, AttrSpec):
            inherited = inherited_attribute(action, cl.attr, kb) or own.get(cl.attr)
            part = translate_attr_spec(c, cl.attr, cl.spec, inherited)
            for d in part.declarations:
                if isinstance(d, AttributeDecl):
                    own[cl.attr] = d.arg_sorts[0]
                    if d not in attrs:
                        attrs.append(d)
            part.declarations = [d for d in part.declarations if not isinstance(d, AttributeDecl)]
            out.extend(part)
        elif isinstance(cl, (PcsList, NcsList)):
            out.extend(translate_precondition(c, cl, kb, preps))
        elif isinstance(cl, (SoftPcsList, PreparatoryEvent)):
            out.extend(translate_defeasible(c, cl, kb, preps))
        elif isinstance(cl, ResultingState):
            resulting = cl.state
        elif isinstance(cl, AddList):
            add_list += cl.items
        elif isinstance(cl, DelList):
            del_list += cl.items
        elif isinstance(cl, Defeats):
            defeats += cl.expr
    out.extend(translate_effects(c, resulting, add_list, defeats, del_list, kb, preps))
    out.declarations.insert(0, SortDecl((alm_name(c),), parents, tuple(attrs)))
    if action.wn20_synset:
        words = ", ".join(f"{w}#{n}{p}" for w, n, p in action.wn20_synset)
        out.notes.append(f"{c}: wn20 {words}")
    return out


def translate_entity(cls: ClassDecl) -> TranslationOutput:
    parents = tuple(alm_name(s) for s in cls.superclasses) or ("universe",)
    return TranslationOutput(cls.name, [SortDecl((alm_name(cls.name),), parents)])


def _topological(classes: list[ClassDecl], kb: KmKb) -> list[ClassDecl]:
    names = {c.name for c in classes}
    done: list[str] = []

    def visit(n: str, path: tuple) -> None:
        if n in done or n not in names or n in path:
            return
        for s in kb.classes[n].superclasses:
            visit(s, path + (n,))
        done.append(n)

    for c in classes:
        visit(c.name, ())
    return [kb.classes[n] for n in done]


_ROOTS = ("Thing", "Entity-Root", "Event", "Action", "State")


def translate_kb(kb: KmKb, preps: PrepositionMap) -> list[TranslationOutput]:
    """Entities, slots, states, then actions, each group in superclass order."""
    outputs: list[TranslationOutput] = []
    errors: list = []

    def run(fn, *args) -> None:
        try:
            outputs.append(fn(*args))
        except TranslationError as e:
            errors.append(e)

    by_kind = {"entity": [], "state": [], "action": []}
    for c in kb.classes.values():
        if c.name not in _ROOTS:
            by_kind[c.kind].append(c)
    for c in _topological(by_kind["entity"], kb):
        run(translate_entity, c)
    for s in kb.slots.values():
        run(translate_slot, s)
    for c in _topological(by_kind["state"], kb):
        run(translate_state, c, kb, preps)
    for c in _topological(by_kind["action"], kb):
        run(translate_action, c, kb, preps)
    if errors:
        raise TranslationErrors(errors)
    return outputs


# -- packaging ---------------------------------------------------------------


def to_modules(outputs: list[TranslationOutput], name: str,
               depends_on: tuple = ()) -> tuple[ModuleDecl, ModuleDecl | None]:
    """Pack translation outputs into a module and, if needed, its optional leaf."""
    sorts: list = []
    loose_attrs: list = []
    functions: list = []
    axioms: list = []
    optional: list = []
    for out in outputs:
        for d in out.declarations:
            if isinstance(d, SortDecl):
                if d not in sorts:
                    sorts.append(d)
            elif isinstance(d, AttributeDecl):
                if d not in loose_attrs:
                    loose_attrs.append(d)
            elif d not in functions:
                functions.append(d)
        axioms += [a for a in out.axioms if a not in axioms]
        optional += [a for a in out.optional_axioms if a not in optional]
    if loose_attrs:
        sorts.insert(0, SortDecl(("actions",), (), tuple(loose_attrs)))
    main = ModuleDecl(name, tuple(depends_on), tuple(sorts), tuple(functions), tuple(axioms))
    opt = None
    if optional:
        opt = ModuleDecl(name + "_optional", (name,), (), (), tuple(optional), optional=True)
    return main, opt


# -- curated patches ---------------------------------------------------------


def rename_symbols(node, mapping: dict):
    """Rename sort, function and constant symbols throughout an ALM node."""
    if isinstance(node, str):
        return mapping.get(node, node)
    if isinstance(node, tuple):
        return tuple(rename_symbols(x, mapping) for x in node)
    if isinstance(node, list):
        return [rename_symbols(x, mapping) for x in node]
    if isinstance(node, Var):
        return node
    if is_dataclass(node):
        changes = {}
        for f in fields(node):
            if f.name in ("span", "kind", "action"):
                continue
            v = getattr(node, f.name)
            nv = rename_symbols(v, mapping)
            if nv != v:
                changes[f.name] = nv
        return replace(node, **changes) if changes else node
    return node


def apply_patch(outputs: list[TranslationOutput], patch: dict) -> list[TranslationOutput]:
    """Apply curated additions and renames.

    ``patch`` holds ``axioms`` / ``optional_axioms`` (KM class name -> list
    of ALM axiom texts) and ``rename`` (ALM symbol -> new symbol).
    """
    out = []
    known = {o.source for o in outputs}
    for key in ("axioms", "optional_axioms"):
        for cls in patch.get(key, {}):
            if cls not in known:
                raise TranslationError(f"patch refers to unknown class {cls}")
    for o in outputs:
        o = TranslationOutput(o.source, list(o.declarations), list(o.axioms),
                              list(o.optional_axioms), list(o.notes))
        for text in patch.get("axioms", {}).get(o.source, []):
            o.axioms.append(parse_axiom(text))
            o.notes.append(f"{o.source}: patched axiom {text}")
        for text in patch.get("optional_axioms", {}).get(o.source, []):
            o.optional_axioms.append(parse_axiom(text))
        out.append(o)
    mapping = patch.get("rename", {})
    if mapping:
        out = [TranslationOutput(o.source, rename_symbols(o.declarations, mapping),
                                 rename_symbols(o.axioms, mapping),
                                 rename_symbols(o.optional_axioms, mapping), o.notes)
               for o in out]
    return out


def load_patch(path) -> dict:
    return json.loads(Path(path).read_text())


def _fluents_in(ax, functions: set) -> set:
    return {x.fn for x in ax.body if isinstance(x, Literal) and x.fn in functions}


def opposites_report(outputs: list[TranslationOutput], pairs) -> list[str]:
    """Advisory: opposite action classes whose executability conditions do not match up."""
    functions = {d.name for o in outputs for d in o.declarations
                 if isinstance(d, FunctionDecl) and d.fluent}
    by_class: dict[str, set] = {}
    for o in outputs:
        fl = set()
        for ax in o.axioms:
            if isinstance(ax, Executability):
                fl |= _fluents_in(ax, functions)
        by_class[o.source] = fl
    report = []
    for a, b in pairs:
        if a not in by_class or b not in by_class:
            continue
        for x, y in ((a, b), (b, a)):
            for f in sorted(by_class[x] - by_class[y]):
                report.append(f"{y} has no executability condition over {f} (present in {x})")
    return report


def format_output(out: TranslationOutput) -> str:
    """Canonical text of one translation unit: declarations, axioms, optional axioms."""
    lines = [f"% {out.source}"]
    for d in out.declarations:
        if isinstance(d, SortDecl):
            lines.append(format_sort_decl(d))
        elif isinstance(d, AttributeDecl):
            lines.append("actions attribute " + format_attribute(d))
        else:
            lines.append(format_function(d))
    lines += [format_axiom(a) for a in out.axioms]
    lines += ["optional " + format_axiom(a) for a in out.optional_axioms]
    return "\n".join(lines) + "\n"

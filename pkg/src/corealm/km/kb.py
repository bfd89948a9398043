"""Typed view of the KM fragment: slot definitions and class declarations.

``lift_km`` turns the raw forms of a `.km` file into a :class:`KmKb`.
Class-level frames (``(C has ...)``) and instance-level frames
(``(every C has ...)``) for the same class are merged.  Content outside the
supported fragment is collected as :class:`UnsupportedConstruct` records;
nothing is dropped silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .sexpr import SExpr, Str, Sym, format_sexpr

CARDINALITIES = ("N-to-N", "N-to-1", "1-to-N", "1-to-1")
FLUENT_STATUSES = ("*Inertial-Fluent", "*Non-Fluent", "*Fluent")

LIST_SLOTS = ("pcs-list", "ncs-list", "add-list", "del-list", "soft-pcs-list")
# instance-level slots that are ignored by the fragment (actions with subevents,
# durations, text generation, test cases)
EXCLUDED_SLOTS = ("subevent", "subevents", "first-subevent", "next-event", "duration",
                  "text-gen", "text-definition", "test-case", "cmap-correspondence")


class KmError(ValueError):
    pass


class UnsupportedConstruct(KmError):
    def __init__(self, name: str, where: str, form: SExpr | None = None):
        super().__init__(f"{where}: unsupported construct {name}")
        self.name = name
        self.where = where
        self.form = form


# -- attribute specifications ------------------------------------------------


@dataclass(frozen=True)
class A:
    cls: str


@dataclass(frozen=True)
class MustBeA:
    cls: str


@dataclass(frozen=True)
class MustntBeA:
    cls: str


@dataclass(frozen=True)
class AtMost:
    n: int
    cls: str


@dataclass(frozen=True)
class AtLeast:
    n: int
    cls: str


@dataclass(frozen=True)
class Exactly:
    n: int
    cls: str


@dataclass(frozen=True)
class TheAttrOfSelf:
    attr: str


@dataclass(frozen=True)
class ExcludedValues:
    attr: str


@dataclass(frozen=True)
class UnifyConstraint:
    attr: str


Spec = Union[A, MustBeA, MustntBeA, AtMost, AtLeast, Exactly, TheAttrOfSelf, ExcludedValues,
             UnifyConstraint]


# -- every-clauses -----------------------------------------------------------


@dataclass(frozen=True)
class AttrSpec:
    attr: str
    spec: Spec


@dataclass(frozen=True)
class PcsList:
    items: tuple


@dataclass(frozen=True)
class NcsList:
    items: tuple


@dataclass(frozen=True)
class AddList:
    items: tuple


@dataclass(frozen=True)
class DelList:
    items: tuple


@dataclass(frozen=True)
class SoftPcsList:
    items: tuple


@dataclass(frozen=True)
class ResultingState:
    state: str


@dataclass(frozen=True)
class Defeats:
    expr: tuple


@dataclass(frozen=True)
class PreparatoryEvent:
    expr: tuple


EveryClause = Union[AttrSpec, PcsList, NcsList, AddList, DelList, SoftPcsList, ResultingState,
                    Defeats, PreparatoryEvent]

_LIST_CLAUSE = {"pcs-list": PcsList, "ncs-list": NcsList, "add-list": AddList,
                "del-list": DelList, "soft-pcs-list": SoftPcsList}


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class SlotDef:
    name: str
    instance_of: str
    domain: str
    range: str
    cardinality: str
    fluent_status: str


@dataclass
class ClassDecl:
    name: str
    superclasses: list = field(default_factory=list)
    wn20_synset: list = field(default_factory=list)  # (word, sense, pos)
    kind: str = "entity"
    every_clauses: list = field(default_factory=list)


@dataclass
class KmKb:
    slots: dict = field(default_factory=dict)  # name -> SlotDef
    classes: dict = field(default_factory=dict)  # name -> ClassDecl, in file order
    unsupported: list = field(default_factory=list)
    clause_count: int = 0  # instance-level clauses seen in the input

    def merge(self, other: "KmKb") -> "KmKb":
        out = KmKb(dict(self.slots), {}, self.unsupported + other.unsupported,
                   self.clause_count + other.clause_count)
        for name, c in list(self.classes.items()) + list(other.classes.items()):
            if name in out.classes:
                prev = out.classes[name]
                prev.superclasses += [s for s in c.superclasses if s not in prev.superclasses]
                prev.wn20_synset += [w for w in c.wn20_synset if w not in prev.wn20_synset]
                prev.every_clauses += c.every_clauses
            else:
                out.classes[name] = ClassDecl(c.name, list(c.superclasses), list(c.wn20_synset),
                                              c.kind, list(c.every_clauses))
        out.slots.update(other.slots)
        _assign_kinds(out)
        return out

    def ancestors(self, name: str) -> list[str]:
        seen = [name]
        i = 0
        while i < len(seen):
            c = self.classes.get(seen[i])
            if c is not None:
                seen += [s for s in c.superclasses if s not in seen]
            i += 1
        return seen

    def is_subclass(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors(sub)

    def lifted_count(self) -> int:
        return sum(len(c.every_clauses) for c in self.classes.values())


# -- lifting -----------------------------------------------------------------


def _sym(e: SExpr) -> str | None:
    return e.name if isinstance(e, Sym) else None


def _single_sym(values: SExpr) -> str | None:
    if isinstance(values, list) and len(values) == 1:
        return _sym(values[0])
    return None


def lift_spec(value: SExpr) -> Spec | None:
    """One value of an attribute slot, e.g. ``(a Tangible-Entity)``."""
    if not isinstance(value, list) or not value:
        return None
    head = _sym(value[0])
    if head == "a" and len(value) == 2 and _sym(value[1]):
        return A(value[1].name)
    if head == "must-be-a" and len(value) == 2 and _sym(value[1]):
        return MustBeA(value[1].name)
    if head == "mustnt-be-a" and len(value) == 2 and _sym(value[1]):
        return MustntBeA(value[1].name)
    if head in ("at-most", "at-least", "exactly") and len(value) == 3 \
            and isinstance(value[1], int) and _sym(value[2]):
        n = value[1]
        if n not in (0, 1, 2):
            return None
        cls = {"at-most": AtMost, "at-least": AtLeast, "exactly": Exactly}[head]
        return cls(n, value[2].name)
    attr2 = the_attr_of_self(value)
    if attr2:
        return TheAttrOfSelf(attr2)
    if head == "excluded-values" and len(value) == 2:
        attr2 = the_attr_of_self(value[1])
        if attr2:
            return ExcludedValues(attr2)
    if head == "constraint" and len(value) == 2 and isinstance(value[1], list):
        inner = value[1]
        if len(inner) == 3 and _sym(inner[0]) == "TheValue" and _sym(inner[1]) == "&":
            attr2 = the_attr_of_self(inner[2])
            if attr2:
                return UnifyConstraint(attr2)
    return None


def the_attr_of_self(e: SExpr) -> str | None:
    """``(the attr of Self)`` -> ``attr``."""
    if isinstance(e, list) and len(e) == 4 and _sym(e[0]) == "the" and _sym(e[2]) == "of" \
            and _sym(e[3]) == "Self" and _sym(e[1]):
        return e[1].name
    return None


def _synset(values: SExpr, where: str) -> list:
    out = []
    for v in values if isinstance(values, list) else []:
        if isinstance(v, list) and v and _sym(v[0]) == ":set":
            triples = v[1:]
        else:
            triples = [v]
        for t in triples:
            if (isinstance(t, list) and len(t) == 4 and _sym(t[0]) == ":triple"
                    and isinstance(t[1], Str) and isinstance(t[2], int) and isinstance(t[3], Str)):
                out.append((t[1].value, t[2], t[3].value))
            else:
                raise KmError(f"{where}: malformed wn20-synset entry {format_sexpr(t)}")
    return out


def _slot_def(name: str, slots: dict) -> SlotDef:
    fields = {}
    for key in ("instance-of", "domain", "range", "cardinality", "fluent-status"):
        v = slots.get(key)
        s = _single_sym(v) if v is not None else None
        if s is None:
            raise KmError(f"slot {name}: missing or malformed {key}")
        fields[key] = s
    if fields["fluent-status"] not in FLUENT_STATUSES:
        raise KmError(f"slot {name}: unknown fluent-status {fields['fluent-status']}")
    return SlotDef(name, fields["instance-of"], fields["domain"], fields["range"],
                   fields["cardinality"], fields["fluent-status"])


def lift_km(forms: list, strict: bool = False) -> KmKb:
    """Lift parsed KM forms into a :class:`KmKb`.

    With ``strict`` the first unsupported construct is raised instead of
    being recorded in ``kb.unsupported``.
    """
    kb = KmKb()

    def unsupported(name: str, where: str, form) -> None:
        err = UnsupportedConstruct(name, where, form)
        if strict:
            raise err
        kb.unsupported.append(err)

    def cls(name: str) -> ClassDecl:
        if name not in kb.classes:
            kb.classes[name] = ClassDecl(name)
        return kb.classes[name]

    for form in forms:
        if not isinstance(form, list) or not form:
            raise KmError(f"top-level form is not a frame: {format_sexpr(form)}")
        if _sym(form[0]) == "every":
            if len(form) < 3 or not _sym(form[1]) or _sym(form[2]) != "has":
                raise KmError(f"malformed every-frame: {format_sexpr(form)[:60]}")
            c = cls(form[1].name)
            for entry in form[3:]:
                _lift_every_entry(c, entry, kb, unsupported)
            continue
        if len(form) < 2 or not _sym(form[0]) or _sym(form[1]) != "has":
            raise KmError(f"malformed frame: {format_sexpr(form)[:60]}")
        name = form[0].name
        entries = {}
        for entry in form[2:]:
            if not isinstance(entry, list) or len(entry) != 2 or not _sym(entry[0]):
                raise KmError(f"{name}: malformed slot entry {format_sexpr(entry)}")
            entries[entry[0].name] = entry[1]
        if "cardinality" in entries or "fluent-status" in entries:
            kb.slots[name] = _slot_def(name, entries)
            continue
        c = cls(name)
        for key, values in entries.items():
            if key == "superclasses":
                for v in values if isinstance(values, list) else []:
                    if not _sym(v):
                        raise KmError(f"{name}: superclass {format_sexpr(v)} is not a name")
                    if v.name not in c.superclasses:
                        c.superclasses.append(v.name)
            elif key == "wn20-synset":
                c.wn20_synset += _synset(values, name)
            else:
                unsupported(key, name, [Sym(key), values])
    _assign_kinds(kb)
    return kb


def _lift_every_entry(c: ClassDecl, entry: SExpr, kb: KmKb, unsupported) -> None:
    if not isinstance(entry, list) or len(entry) != 2 or not _sym(entry[0]) \
            or not isinstance(entry[1], list):
        kb.clause_count += 1
        unsupported("malformed clause", c.name, entry)
        return
    key, values = entry[0].name, entry[1]
    if key in LIST_SLOTS or key in ("resulting-state", "defeats", "preparatory-event") \
            or key in EXCLUDED_SLOTS:
        kb.clause_count += 1
        if key in EXCLUDED_SLOTS:
            unsupported(key, c.name, entry)
        elif key in LIST_SLOTS:
            c.every_clauses.append(_LIST_CLAUSE[key](tuple(values)))
        elif key == "resulting-state":
            spec = lift_spec(values[0]) if len(values) == 1 else None
            if isinstance(spec, A):
                c.every_clauses.append(ResultingState(spec.cls))
            else:
                unsupported("resulting-state", c.name, entry)
        elif key == "defeats":
            c.every_clauses.append(Defeats(tuple(values)))
        else:
            c.every_clauses.append(PreparatoryEvent(tuple(values)))
        return
    # attribute slot: one clause per value
    for v in values:
        kb.clause_count += 1
        spec = lift_spec(v)
        if spec is None:
            unsupported(f"{key} value {format_sexpr(v)}", c.name, v)
        else:
            c.every_clauses.append(AttrSpec(key, spec))


_ACTION_CLAUSES = (ResultingState, AddList, DelList, PcsList, NcsList, Defeats, SoftPcsList,
                   PreparatoryEvent)


def _assign_kinds(kb: KmKb) -> None:
    """Classify classes as action, state or entity.

    Ancestry decides when the hierarchy reaches ``Action``/``State``;
    otherwise the ``Be-`` naming convention marks states and the presence of
    effect or precondition clauses marks actions.
    """
    changed = True
    while changed:
        changed = False
        for c in kb.classes.values():
            kind = _kind_of(kb, c)
            if kind != c.kind:
                c.kind = kind
                changed = True


def _kind_of(kb: KmKb, c: ClassDecl) -> str:
    anc = kb.ancestors(c.name)
    if "State" in anc or c.name.startswith("Be-"):
        return "state"
    if "Action" in anc or any(isinstance(x, _ACTION_CLAUSES) for x in c.every_clauses):
        return "action"
    if any(kb.classes[a].kind == "action" for a in anc[1:] if a in kb.classes):
        return "action"
    return "entity"

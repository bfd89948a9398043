"""Bottom-up grounder.

Rule instances are generated by joining positive body literals against the
set of possibly-derivable atoms, computed semi-naively.  The result is
simplified against the atoms that are certainly true (the least model of the
definite part), which removes domain predicates such as ``instance/2`` and
``step/1`` from the ground rules.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .syntax import (AspProgram, Atom, BinOp, Choice, Cmp, Fn, Lit, Num, Rule, Value,
                     Var, format_value, term_vars, value_key)


class GroundingError(ValueError):
    pass


class UnsafeRule(GroundingError):
    pass


GroundAtom = tuple  # (pred_name, arg values...)


def format_atom(a: GroundAtom) -> str:
    if len(a) == 1:
        return a[0]
    return f"{a[0]}({','.join(format_value(v) for v in a[1:])})"


def atom_key(a: GroundAtom):
    return (a[0].lstrip("-"), a[0].startswith("-"), tuple(value_key(v) for v in a[1:]))


@dataclass(frozen=True)
class GroundRule:
    """``head`` is an atom id, ``None`` for constraints; choice rules carry bounds."""

    head: int | None
    pos: tuple[int, ...]
    neg: tuple[int, ...]
    choice: tuple[int, ...] | None = None
    lower: int | None = None
    upper: int | None = None


@dataclass
class GroundProgram:
    atoms: list[GroundAtom] = field(default_factory=list)
    index: dict[GroundAtom, int] = field(default_factory=dict)
    rules: list[GroundRule] = field(default_factory=list)
    facts: set[int] = field(default_factory=set)

    def intern(self, a: GroundAtom) -> int:
        i = self.index.get(a)
        if i is None:
            i = len(self.atoms)
            self.atoms.append(a)
            self.index[a] = i
        return i

    def lookup(self, text_or_atom) -> int | None:
        if isinstance(text_or_atom, str):
            from .syntax import parse_rule
            head = parse_rule(text_or_atom.rstrip(".") + ".").head
            text_or_atom = ground_atom(head, {})
        return self.index.get(text_or_atom)

    def __str__(self) -> str:
        return "".join(format_ground_rule(self, r) + "\n" for r in self.rules) + "".join(
            f"{format_atom(self.atoms[i])}.\n" for i in sorted(self.facts))


def format_ground_rule(gp: GroundProgram, r: GroundRule) -> str:
    body = [format_atom(gp.atoms[i]) for i in r.pos] + [
        "not " + format_atom(gp.atoms[i]) for i in r.neg]
    if r.choice is not None:
        head = "{ " + "; ".join(format_atom(gp.atoms[i]) for i in r.choice) + " }"
        if r.lower is not None:
            head = f"{r.lower} {head}"
        if r.upper is not None:
            head = f"{head} {r.upper}"
    elif r.head is None:
        head = ""
    else:
        head = format_atom(gp.atoms[r.head])
    if not body:
        return head + "."
    return (head + " :- " if head else ":- ") + ", ".join(body) + "."


# -- evaluation --------------------------------------------------------------


def eval_term(t, binding: dict) -> Value:
    if isinstance(t, Var):
        return binding[t.name]
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Fn):
        if not t.args:
            return t.name
        return (t.name,) + tuple(eval_term(a, binding) for a in t.args)
    if isinstance(t, BinOp):
        lv, rv = eval_term(t.left, binding), eval_term(t.right, binding)
        if not isinstance(lv, int) or not isinstance(rv, int):
            raise GroundingError(f"arithmetic on non-integer in {t}")
        return lv + rv if t.op == "+" else lv - rv
    raise TypeError(t)


def ground_atom(a: Atom, binding: dict) -> GroundAtom:
    return (a.name,) + tuple(eval_term(t, binding) for t in a.args)


def _evaluable(t, binding) -> bool:
    return all(v in binding for v in term_vars(t))


def match(t, v: Value, binding: dict) -> dict | None:
    """Extend ``binding`` so that term ``t`` evaluates to ``v``; None on failure."""
    if isinstance(t, Var):
        if t.name == "_":
            return binding
        if t.name in binding:
            return binding if binding[t.name] == v else None
        b = dict(binding)
        b[t.name] = v
        return b
    if isinstance(t, Num):
        return binding if v == t.value else None
    if isinstance(t, Fn):
        if not t.args:
            return binding if v == t.name else None
        if not isinstance(v, tuple) or len(v) != len(t.args) + 1 or v[0] != t.name:
            return None
        for sub, sv in zip(t.args, v[1:]):
            binding = match(sub, sv, binding)
            if binding is None:
                return None
        return binding
    if isinstance(t, BinOp):
        if not _evaluable(t, binding):
            return None
        return binding if eval_term(t, binding) == v else None
    raise TypeError(t)


def compare(op: str, a: Value, b: Value) -> bool:
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    ka, kb = value_key(a), value_key(b)
    return {"<": ka < kb, "<=": ka <= kb, ">": ka > kb, ">=": ka >= kb}[op]


# -- atom store --------------------------------------------------------------


class _Store:
    def __init__(self):
        self.all: set[GroundAtom] = set()
        self.by_sig: dict[tuple, list] = defaultdict(list)
        self.by_first: dict[tuple, list] = defaultdict(list)

    def add(self, a: GroundAtom) -> bool:
        if a in self.all:
            return False
        self.all.add(a)
        self.by_sig[(a[0], len(a) - 1)].append(a)
        if len(a) > 1:
            self.by_first[(a[0], len(a) - 1, a[1])].append(a)
        return True

    def candidates(self, atom: Atom, binding: dict):
        sig = (atom.name, len(atom.args))
        if atom.args and _evaluable(atom.args[0], binding):
            try:
                first = eval_term(atom.args[0], binding)
            except GroundingError:
                return []
            return self.by_first.get(sig + (first,), [])
        return self.by_sig.get(sig, [])


def _check_safety(rule: Rule) -> None:
    bound: set[str] = set()
    for item in rule.body:
        if isinstance(item, Lit) and not item.naf:
            for t in item.atom.args:
                bound |= _bindable_vars(t)
    needed: set[str] = set()
    for item in rule.body:
        if isinstance(item, Lit):
            for t in item.atom.args:
                needed |= term_vars(t)
        else:
            needed |= term_vars(item.left) | term_vars(item.right)
    if isinstance(rule.head, Atom):
        for t in rule.head.args:
            needed |= term_vars(t)
    elif isinstance(rule.head, Choice):
        for atom, cond in rule.head.elements:
            local = set(bound)
            for c in cond:
                if not c.naf:
                    for t in c.atom.args:
                        local |= _bindable_vars(t)
            for t in atom.args:
                if term_vars(t) - local:
                    raise UnsafeRule(f"unsafe variables {sorted(term_vars(t) - local)} in {rule}")
    # '=' comparisons with one side fully bound also bind
    changed = True
    while changed:
        changed = False
        for item in rule.body:
            if isinstance(item, Cmp) and item.op == "=":
                for a, b in ((item.left, item.right), (item.right, item.left)):
                    if isinstance(a, Var) and a.name not in bound and term_vars(b) <= bound:
                        bound.add(a.name)
                        changed = True
    needed.discard("_")
    missing = needed - bound
    if missing:
        raise UnsafeRule(f"unsafe variables {sorted(missing)} in {rule}")


def _bindable_vars(t) -> set[str]:
    # variables under arithmetic cannot be bound by matching
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Fn):
        out: set[str] = set()
        for a in t.args:
            out |= _bindable_vars(a)
        return out
    return set()


def _join(items: list, store: _Store, binding: dict, delta_item=None, delta_atoms=()):
    """Yield bindings satisfying all positive literals and comparisons in ``items``."""
    if delta_item is not None:
        for a in delta_atoms:
            b = _match_atom(delta_item.atom, a, binding)
            if b is not None:
                yield from _join(items, store, b)
        return
    if not items:
        yield binding
        return
    # pick the first item that can be processed with the current binding
    for k, item in enumerate(items):
        if isinstance(item, Cmp):
            if item.op == "=" and isinstance(item.left, Var) and item.left.name not in binding \
                    and _evaluable(item.right, binding):
                rest = items[:k] + items[k + 1:]
                b = dict(binding)
                b[item.left.name] = eval_term(item.right, binding)
                yield from _join(rest, store, b)
                return
            if item.op == "=" and isinstance(item.right, Var) and item.right.name not in binding \
                    and _evaluable(item.left, binding):
                rest = items[:k] + items[k + 1:]
                b = dict(binding)
                b[item.right.name] = eval_term(item.left, binding)
                yield from _join(rest, store, b)
                return
            if _evaluable(item.left, binding) and _evaluable(item.right, binding):
                rest = items[:k] + items[k + 1:]
                if compare(item.op, eval_term(item.left, binding), eval_term(item.right, binding)):
                    yield from _join(rest, store, binding)
                return
            continue
        if all(_evaluable(t, binding) or not isinstance(t, BinOp) for t in item.atom.args) and \
                all(term_vars(t) <= binding.keys() for t in item.atom.args if isinstance(t, BinOp)):
            rest = items[:k] + items[k + 1:]
            for a in list(store.candidates(item.atom, binding)):
                b = _match_atom(item.atom, a, binding)
                if b is not None:
                    yield from _join(rest, store, b)
            return
    raise GroundingError(f"cannot order body literals: {', '.join(map(str, items))}")


def _match_atom(pattern: Atom, a: GroundAtom, binding: dict) -> dict | None:
    if a[0] != pattern.name or len(a) - 1 != len(pattern.args):
        return None
    for t, v in zip(pattern.args, a[1:]):
        binding = match(t, v, binding)
        if binding is None:
            return None
    return binding


def ground(program: AspProgram, atom_limit: int | None = None) -> GroundProgram:
    """Instantiate ``program``; see module docstring."""
    rules = program.all_rules()
    for r in rules:
        _check_safety(r)
    store = _Store()
    instances: dict[tuple, tuple] = {}  # key -> (rule, binding)
    by_rule: dict[int, list] = defaultdict(list)

    def positives(r: Rule):
        return [i for i in r.body if isinstance(i, Lit) and not i.naf]

    def others(r: Rule):
        return [i for i in r.body if isinstance(i, Cmp)]

    def record(ri: int, r: Rule, binding: dict, new: list):
        key = (ri, tuple(sorted(binding.items())))
        if key in instances:
            return
        instances[key] = (r, binding)
        by_rule[ri].append(binding)
        if isinstance(r.head, Atom):
            a = ground_atom(r.head, binding)
            if store.add(a):
                new.append(a)

    def ground_choice_heads(r: Rule, binding: dict, new: list):
        for atom, cond in r.head.elements:
            pos = [c for c in cond if not c.naf]
            for b in _join(pos, store, binding):
                a = ground_atom(atom, b)
                if store.add(a):
                    new.append(a)

    # round 0: rules with no positive body literal
    delta: list = []
    for ri, r in enumerate(rules):
        if not positives(r):
            for b in _join(others(r), store, {}):
                record(ri, r, b, delta)
    choice_rules = [(ri, r) for ri, r in enumerate(rules) if isinstance(r.head, Choice)]
    while True:
        new: list = []
        by_sig: dict[tuple, list] = defaultdict(list)
        for a in delta:
            by_sig[(a[0], len(a) - 1)].append(a)
        for ri, r in enumerate(rules):
            pos = positives(r)
            body = pos + others(r)
            for k, lit in enumerate(pos):
                cand = by_sig.get((lit.atom.name, len(lit.atom.args)))
                if not cand:
                    continue
                rest = body[:k] + body[k + 1:]
                for b in _join(rest, store, {}, lit, cand):
                    record(ri, r, b, new)
        for ri, r in choice_rules:
            for b in list(by_rule[ri]):
                ground_choice_heads(r, b, new)
        if atom_limit is not None and len(store.all) > atom_limit:
            from .solve import ResourceLimit
            raise ResourceLimit(f"more than {atom_limit} ground atoms")
        if not new:
            break
        delta = new

    return _simplify(instances, store)


def _simplify(instances: dict, store: _Store) -> GroundProgram:
    possible = store.all
    raw = []  # (head_atom | None | ('choice', ...), pos atoms, neg atoms)
    for (ri, _), (r, b) in sorted(instances.items(), key=lambda kv: (kv[0][0], repr(kv[0][1]))):
        pos = [ground_atom(i.atom, b) for i in r.body if isinstance(i, Lit) and not i.naf]
        neg = [ground_atom(i.atom, b) for i in r.body if isinstance(i, Lit) and i.naf]
        if isinstance(r.head, Choice):
            elems = []
            for atom, cond in r.head.elements:
                cpos = [c for c in cond if not c.naf]
                for cb in _join(cpos, store, b):
                    cneg = [ground_atom(c.atom, cb) for c in cond if c.naf]
                    elems.append((ground_atom(atom, cb),
                                  tuple(ground_atom(c.atom, cb) for c in cpos), tuple(cneg)))
            head = ("choice", r.head.lower, r.head.upper, elems)
        elif isinstance(r.head, Atom):
            head = ground_atom(r.head, b)
        else:
            head = None
        raw.append((head, pos, neg))

    # certain atoms: least model of the definite part
    certain: set = set()
    definite = [(h, pos) for h, pos, neg in raw if isinstance(h, tuple) and h[0] != "choice"
                and not neg]
    watch = defaultdict(list)
    count = []
    queue = []
    for k, (h, pos) in enumerate(definite):
        count.append(len(set(pos)))
        for a in set(pos):
            watch[a].append(k)
        if not pos:
            queue.append(h)
    while queue:
        a = queue.pop()
        if a in certain:
            continue
        certain.add(a)
        for k in watch.get(a, ()):
            count[k] -= 1
            if count[k] == 0:
                queue.append(definite[k][0])

    gp = GroundProgram()
    for a in sorted(certain, key=atom_key):
        gp.facts.add(gp.intern(a))
    seen = set()
    for head, pos, neg in raw:
        if any(a in certain for a in neg):
            continue
        neg = [a for a in neg if a in possible]
        pos = [a for a in pos if a not in certain]
        if head is None:
            hid = None
            choice = None
            lower = upper = None
        elif head[0] == "choice":
            _, lower, upper, elems = head
            kept = []
            for a, cpos, cneg in elems:
                if any(c not in certain for c in cpos) or cneg and any(c in possible for c in cneg):
                    raise GroundingError(
                        f"choice condition on non-domain atom for {format_atom(a)}")
                kept.append(a)
            hid = None
            choice = tuple(sorted({gp.intern(a) for a in kept}))
        else:
            if head in certain:
                continue
            hid = gp.intern(head)
            choice = None
            lower = upper = None
        pids = tuple(sorted({gp.intern(a) for a in pos}))
        nids = tuple(sorted({gp.intern(a) for a in neg}))
        gr = GroundRule(hid, pids, nids, choice, lower, upper)
        if gr in seen:
            continue
        seen.add(gr)
        gp.rules.append(gr)
    # classical negation: complementary atoms may not both hold
    for a in list(gp.atoms):
        if a[0].startswith("-"):
            comp = (a[0][1:],) + a[1:]
            if comp in gp.index:
                gp.rules.append(GroundRule(None, tuple(sorted((gp.index[a], gp.index[comp]))), ()))
    return gp


def ground_text(text: str) -> GroundProgram:
    from .syntax import parse_program
    return ground(parse_program(text))

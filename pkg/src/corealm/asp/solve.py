"""Stable-model search over ground programs.

The search assigns truth values to atoms and propagates with two rules:

* every ground rule is read as a clause (body implies head) and unit
  propagated, which covers forward chaining and backward pruning;
* atoms outside the upper closure (the least model of the program where
  ``not a`` is assumed to hold unless ``a`` is already true) are unfounded
  and made false.

A total assignment reached without conflict is a stable model.  Choice rules
``l { a1; ...; an } u :- body`` are handled natively, with the bounds acting as
cardinality constraints once the body holds.
"""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Iterator

from .ground import GroundProgram, GroundRule, atom_key, format_atom


class ResourceLimit(RuntimeError):
    pass


class AnswerSet(frozenset):
    """A stable model: a frozen set of ground atoms (tuples)."""

    def sorted(self) -> list:
        return sorted(self, key=atom_key)

    def __str__(self) -> str:
        return " ".join(format_atom(a) for a in self.sorted())

    def __repr__(self) -> str:
        return f"AnswerSet({{{str(self)}}})"

    def with_pred(self, pred: str) -> list:
        return sorted((a for a in self if a[0] == pred), key=atom_key)


def canonical(models: Iterable[frozenset]) -> list[AnswerSet]:
    out = {AnswerSet(m) for m in models}
    return sorted(out, key=lambda m: [atom_key(a) for a in m.sorted()])


class Solver:
    """Enumerates stable models of one ground program.

    Extra constraints can be added between enumerations; they are ground
    rules without head over the program's atom ids.
    """

    def __init__(self, gp: GroundProgram, atom_limit: int | None = None):
        if atom_limit is not None and len(gp.atoms) > atom_limit:
            raise ResourceLimit(f"{len(gp.atoms)} ground atoms exceed the limit of {atom_limit}")
        self.gp = gp
        self.n = len(gp.atoms)
        self.rules: list[GroundRule] = []
        self.occ: list[list[int]] = [[] for _ in range(self.n)]
        self.pos_watch: list[list[int]] = [[] for _ in range(self.n)]
        for r in gp.rules:
            self._add(r)
        guess = set()
        for r in gp.rules:
            guess.update(r.neg)
            if r.choice:
                guess.update(r.choice)
        guess -= gp.facts
        self.order = sorted(guess) + [a for a in range(self.n) if a not in guess]

    def _add(self, r: GroundRule) -> None:
        k = len(self.rules)
        self.rules.append(r)
        atoms = set(r.pos) | set(r.neg) | set(r.choice or ())
        if r.head is not None:
            atoms.add(r.head)
        for a in atoms:
            self.occ[a].append(k)
        for a in r.pos:
            self.pos_watch[a].append(k)

    def add_constraint(self, pos: Iterable[int] = (), neg: Iterable[int] = ()) -> None:
        self._add(GroundRule(None, tuple(sorted(set(pos))), tuple(sorted(set(neg)))))

    # -- assignment ----------------------------------------------------------

    def _reset(self) -> None:
        self.val = [0] * self.n
        self.trail: list[int] = []
        self.queue: list[int] = []
        for a in self.gp.facts:
            self._assign(a, 1)

    def _assign(self, a: int, v: int) -> bool:
        cur = self.val[a]
        if cur == v:
            return True
        if cur != 0:
            return False
        self.val[a] = v
        self.trail.append(a)
        self.queue.append(a)
        return True

    def _undo(self, mark: int) -> None:
        val = self.val
        for a in self.trail[mark:]:
            val[a] = 0
        del self.trail[mark:]
        self.queue.clear()

    # -- propagation ---------------------------------------------------------

    def _check(self, r: GroundRule) -> bool:
        val = self.val
        # clause literals: (atom, value that satisfies the clause)
        unknown = None
        n_unknown = 0
        body_true = True
        for a in r.pos:
            v = val[a]
            if v == -1:
                return True
            if v == 0:
                body_true = False
                n_unknown += 1
                unknown = (a, -1)
        for a in r.neg:
            v = val[a]
            if v == 1:
                return True
            if v == 0:
                body_true = False
                n_unknown += 1
                unknown = (a, 1)
        if r.choice is not None:
            return self._check_choice(r, body_true, n_unknown, unknown)
        if r.head is not None:
            v = val[r.head]
            if v == 1:
                return True
            if v == 0:
                n_unknown += 1
                unknown = (r.head, 1)
        if n_unknown == 0:
            return False
        if n_unknown == 1:
            return self._assign(*unknown)
        return True

    def _check_choice(self, r: GroundRule, body_true: bool, n_unknown: int, unknown) -> bool:
        val = self.val
        t = u = 0
        for a in r.choice:
            v = val[a]
            if v == 1:
                t += 1
            elif v == 0:
                u += 1
        lo = r.lower if r.lower is not None else 0
        hi = r.upper if r.upper is not None else len(r.choice)
        impossible = t > hi or t + u < lo
        if body_true:
            if impossible:
                return False
            if u:
                if t == hi:
                    for a in r.choice:
                        if val[a] == 0:
                            self._assign(a, -1)
                elif t + u == lo:
                    for a in r.choice:
                        if val[a] == 0:
                            self._assign(a, 1)
            return True
        if impossible and n_unknown == 1:
            return self._assign(*unknown)
        return True

    def _upper(self) -> bytearray:
        """Upper closure: atoms derivable unless blocked by a true ``not`` atom."""
        val = self.val
        rules = self.rules
        count = [len(r.pos) for r in rules]
        inu = bytearray(self.n)
        stack = list(self.gp.facts)
        for a in stack:
            inu[a] = 1

        def fire(k: int) -> None:
            r = rules[k]
            for a in r.neg:
                if val[a] == 1:
                    return
            if r.choice is not None:
                for a in r.choice:
                    if val[a] != -1 and not inu[a]:
                        inu[a] = 1
                        stack.append(a)
            elif r.head is not None and not inu[r.head]:
                inu[r.head] = 1
                stack.append(r.head)

        for k, r in enumerate(rules):
            if not r.pos and (r.head is not None or r.choice is not None):
                fire(k)
        pos_watch = self.pos_watch
        while stack:
            a = stack.pop()
            for k in pos_watch[a]:
                count[k] -= 1
                if count[k] == 0 and (rules[k].head is not None or rules[k].choice is not None):
                    fire(k)
        return inu

    def _propagate(self) -> bool:
        while True:
            while self.queue:
                a = self.queue.pop()
                for k in self.occ[a]:
                    if not self._check(self.rules[k]):
                        return False
            inu = self._upper()
            val = self.val
            for a in range(self.n):
                if not inu[a]:
                    if val[a] == 1:
                        return False
                    if val[a] == 0:
                        self._assign(a, -1)
            if not self.queue:
                return True

    def _initial(self) -> bool:
        self._reset()
        # rules with an empty clause body need a first look
        for r in self.rules:
            if not self._check(r):
                return False
        return self._propagate()

    # -- search --------------------------------------------------------------

    def models(self, max_models: int | None = None) -> Iterator[frozenset]:
        found = 0
        ok = self._initial()
        decisions: list[list] = []  # [atom, trail mark, flipped]
        while True:
            if ok:
                a = next((x for x in self.order if self.val[x] == 0), None)
                if a is None:
                    yield frozenset(self.gp.atoms[i] for i in range(self.n) if self.val[i] == 1)
                    found += 1
                    if max_models is not None and found >= max_models:
                        return
                    ok = False
                    continue
                decisions.append([a, len(self.trail), False])
                self._assign(a, -1)
                ok = self._propagate()
                continue
            while decisions and decisions[-1][2]:
                decisions.pop()
            if not decisions:
                return
            d = decisions[-1]
            self._undo(d[1])
            d[2] = True
            self._assign(d[0], 1)
            ok = self._propagate()


def solve(gp: GroundProgram, max_models: int | None = None,
          atom_limit: int | None = None) -> list[AnswerSet]:
    """All (or the first ``max_models``) stable models of ``gp``, canonically ordered."""
    return canonical(Solver(gp, atom_limit).models(max_models))


def satisfiable(gp: GroundProgram, constraints: Iterable[tuple] = ()) -> AnswerSet | None:
    s = Solver(gp)
    for pos, neg in constraints:
        s.add_constraint(pos, neg)
    for m in s.models(1):
        return AnswerSet(m)
    return None


def projected(gp: GroundProgram, atoms: Iterable[int],
              limit: int | None = None) -> list[frozenset]:
    """Distinct restrictions of the stable models to ``atoms``.

    Each restriction found is excluded by a blocking constraint before the
    next search, so the number of searches is one more than the number of
    distinct projections.
    """
    atoms = sorted(set(atoms))
    s = Solver(gp)
    out = []
    while limit is None or len(out) < limit:
        m = next(iter(s.models(1)), None)
        if m is None:
            break
        true_ids = [a for a in atoms if gp.atoms[a] in m]
        false_ids = [a for a in atoms if gp.atoms[a] not in m]
        out.append(frozenset(gp.atoms[a] for a in true_ids))
        s.add_constraint(true_ids, false_ids)
    return out


def consequences(gp: GroundProgram, atoms: Iterable[int]) -> tuple[set, set] | None:
    """(cautious, brave) consequences restricted to ``atoms``; None if unsatisfiable."""
    atoms = set(atoms)
    first = satisfiable(gp)
    if first is None:
        return None
    ids = atoms
    brave = {a for a in ids if gp.atoms[a] in first}
    cautious = set(brave)
    # brave: look for models adding something new
    s = Solver(gp)
    while True:
        rest = sorted(ids - brave)
        if not rest:
            break
        # a model containing at least one atom of `rest`: forbid all of them false
        s.add_constraint((), rest)
        m = next(iter(s.models(1)), None)
        if m is None:
            break
        got = {a for a in ids if gp.atoms[a] in m}
        brave |= got
        cautious &= got
    s = Solver(gp)
    while cautious:
        # a model missing at least one cautious atom
        s.add_constraint(sorted(cautious), ())
        m = next(iter(s.models(1)), None)
        if m is None:
            break
        got = {a for a in ids if gp.atoms[a] in m}
        cautious &= got
        brave |= got
    return cautious, brave

"""Exhaustive stable-model enumeration, used as a test oracle.

Kept deliberately naive and independent of :mod:`corealm.asp.solve`: every
interpretation over the non-fact atoms is generated and checked against the
definition of a stable model via the reduct.
"""

from __future__ import annotations

from itertools import product

from .ground import GroundProgram
from .solve import AnswerSet, canonical


class TooLarge(ValueError):
    pass


def _satisfies(gp: GroundProgram, m: set[int]) -> bool:
    for r in gp.rules:
        body = all(a in m for a in r.pos) and not any(a in m for a in r.neg)
        if not body:
            continue
        if r.choice is not None:
            k = sum(1 for a in set(r.choice) if a in m)
            if r.lower is not None and k < r.lower:
                return False
            if r.upper is not None and k > r.upper:
                return False
        elif r.head is None or r.head not in m:
            return False
    return True


def _reduct_least_model(gp: GroundProgram, m: set[int]) -> set[int]:
    definite = []
    for r in gp.rules:
        if any(a in m for a in r.neg):
            continue
        if r.choice is not None:
            definite.extend((a, r.pos) for a in r.choice if a in m)
        elif r.head is not None:
            definite.append((r.head, r.pos))
    lm = set(gp.facts)
    changed = True
    while changed:
        changed = False
        for h, body in definite:
            if h not in lm and all(a in lm for a in body):
                lm.add(h)
                changed = True
    return lm


def brute_force(gp: GroundProgram, atom_limit: int = 20) -> list[AnswerSet]:
    free = [a for a in range(len(gp.atoms)) if a not in gp.facts]
    if len(free) > atom_limit:
        raise TooLarge(f"{len(free)} non-fact atoms exceed the limit of {atom_limit}")
    out = []
    for bits in product((False, True), repeat=len(free)):
        m = set(gp.facts) | {a for a, b in zip(free, bits) if b}
        if _satisfies(gp, m) and _reduct_least_model(gp, m) == m:
            out.append(frozenset(gp.atoms[a] for a in m))
    return canonical(out)

"""Compilation of ALM system descriptions into answer-set programs.

Functions are flattened into a handful of predicates:

==========================  ==========================================
``holds(f(x), I)``          boolean fluent (``-holds`` for basic ones)
``val(f(x), v, I)``         non-boolean basic fluent
``static(f(x))``            boolean static or relational attribute
``stat(f(x), v)``           non-boolean static or functional attribute
``instance(x, s)``          sort membership, from ``is_a``/``subsort``
``occurs(a, I)``            action occurrence
==========================  ==========================================

Defined functions are closed-world: only their positive atoms exist.
"""

from __future__ import annotations

import warnings

from .alm.model import (FALSE, TRUE, AlmError, Compare, Const, Definition, DynamicCausalLaw,
                        Executability, FunctionDecl, Literal, SortHierarchy, StateConstraint,
                        SystemDescription, ValidationReport, Var, expand_schemas_quiet,
                        flatten_all, sort_members, validate)
from .asp.syntax import AspProgram, Atom, BinOp, Choice, Cmp, Fn, Lit, Num, Rule
from .asp.syntax import Var as AVar


class CompileError(AlmError):
    pass


class InvalidSystemDescription(CompileError):
    def __init__(self, report: ValidationReport):
        super().__init__("; ".join(map(str, report)))
        self.report = report


class UnboundedSort(UserWarning):
    pass


def output_name(sd: SystemDescription, horizon: int) -> str:
    return f"{sd.name}.h{horizon}.lp"


def to_term(t):
    if isinstance(t, Var):
        return AVar(t.name)
    return Fn(t.name, tuple(to_term(a) for a in t.args))


def _atom(pred: str, *args, neg: bool = False) -> Atom:
    return Atom(pred, tuple(args), neg)


class _Signature:
    """Kinds and argument sorts of every symbol of a flattened theory."""

    def __init__(self, theory):
        self.hierarchy = SortHierarchy(theory.sorts)
        self.functions: dict[str, FunctionDecl] = {f.name: f for f in theory.functions}
        self.attributes = {}
        for sd in theory.sorts:
            for a in sd.attributes:
                for owner in sd.names:
                    self.attributes.setdefault(a.name, (owner, a))

    def kind(self, fn: str) -> str:
        if fn == "instance":
            return "instance"
        f = self.functions.get(fn)
        if f is not None:
            if f.defined:
                return "dfluent" if f.fluent else "dstatic"
            if f.fluent:
                return "bfluent" if f.boolean else "ffluent"
            return "bstatic" if f.boolean else "fstatic"
        if fn in self.attributes:
            return "fstatic" if self.attributes[fn][1].functional else "bstatic"
        raise CompileError(f"undeclared symbol {fn}")

    def is_fluent(self, fn: str) -> bool:
        return self.kind(fn) in ("bfluent", "ffluent", "dfluent")

    def position_sorts(self, lit: Literal) -> list[tuple]:
        """(term, sort) for each argument and value of ``lit``."""
        if lit.fn == "instance":
            return [(lit.args[0], "universe")]
        f = self.functions.get(lit.fn)
        if f is not None:
            out = list(zip(lit.args, f.arg_sorts))
            if lit.value is not None:
                out.append((lit.value, f.range_sort))
            return out
        owner, a = self.attributes[lit.fn]
        out = [(lit.args[0], owner)] + list(zip(lit.args[1:], a.arg_sorts))
        if lit.value is not None:
            out.append((lit.value, a.range_sort))
        return out


def _normalize(lit: Literal, boolean: bool) -> Literal:
    if boolean and lit.value in (TRUE, FALSE):
        neg = lit.negated != (lit.value == FALSE)
        return Literal(lit.fn, lit.args, None, neg, span=lit.span)
    return lit


class _AxiomCompiler:
    def __init__(self, sig: _Signature, members: dict):
        self.sig = sig
        self.members = members

    def fresh(self, used: set, base: str) -> str:
        name, k = base, 0
        while name in used:
            k += 1
            name = f"{base}{k}"
        used.add(name)
        return name

    def fn_term(self, lit: Literal) -> Fn:
        return Fn(lit.fn, tuple(to_term(a) for a in lit.args))

    def body_lit(self, lit: Literal, t, used: set) -> list:
        kind = self.sig.kind(lit.fn)
        if kind == "instance":
            x, s = (to_term(a) for a in lit.args)
            return [Lit(_atom("instance", x, s), lit.negated)]
        boolean = kind in ("bfluent", "dfluent", "bstatic", "dstatic")
        lit = _normalize(lit, boolean)
        f = self.fn_term(lit)
        if boolean:
            if lit.value is not None:
                raise CompileError(f"{lit}: boolean function compared with a non-boolean value")
            if kind == "bfluent":
                return [Lit(_atom("holds", f, t, neg=lit.negated))]
            if kind == "dfluent":
                return [Lit(_atom("holds", f, t), lit.negated)]
            return [Lit(_atom("static", f), lit.negated)]
        if lit.value is None:
            raise CompileError(f"{lit}: function {lit.fn} needs a value")
        v = to_term(lit.value)
        if not lit.negated:
            return [Lit(_atom("val", f, v, t) if kind == "ffluent" else _atom("stat", f, v))]
        w = AVar(self.fresh(used, "W"))
        base = _atom("val", f, w, t) if kind == "ffluent" else _atom("stat", f, w)
        return [Lit(base), Cmp("!=", w, v)]

    def head_atom(self, lit: Literal, t) -> Atom:
        kind = self.sig.kind(lit.fn)
        boolean = kind in ("bfluent", "dfluent", "bstatic", "dstatic")
        lit = _normalize(lit, boolean)
        f = self.fn_term(lit)
        if kind == "instance":
            raise CompileError("instance/2 cannot be the head of an axiom")
        if kind in ("dfluent", "dstatic"):
            if lit.negated:
                raise CompileError(f"{lit}: defined functions cannot be negated in heads")
            return _atom("holds", f, t) if kind == "dfluent" else _atom("static", f)
        if boolean:
            return (_atom("holds", f, t, neg=lit.negated) if kind == "bfluent"
                    else _atom("static", f, neg=lit.negated))
        if lit.negated:
            raise CompileError(f"{lit}: '!=' is not allowed in heads")
        v = to_term(lit.value)
        return _atom("val", f, v, t) if kind == "ffluent" else _atom("stat", f, v)

    def guards(self, head, body: list, alm_lits: list) -> list:
        """``instance/2`` guards for variables that only occur unsafely."""
        bound: set = set()
        for item in body:
            if isinstance(item, Lit) and not item.naf:
                bound |= _atom_vars(item.atom)
        needed: list = []
        for item in body:
            if isinstance(item, Lit) and item.naf:
                needed += [v for v in sorted(_atom_vars(item.atom)) if v not in needed]
            elif isinstance(item, Cmp):
                needed += [v for v in sorted(_term_vars(item.left) | _term_vars(item.right))
                           if v not in needed]
        if isinstance(head, Atom):
            needed += [v for v in sorted(_atom_vars(head)) if v not in needed]
        out = []
        for v in needed:
            if v in bound:
                continue
            sort = self.var_sort(v, alm_lits)
            if not self.members.get(sort):
                warnings.warn(f"variable {v} ranges over sort {sort} without instances",
                              UnboundedSort, stacklevel=4)
            out.append(Lit(_atom("instance", AVar(v), Fn(sort))))
            bound.add(v)
        return out

    def var_sort(self, v: str, alm_lits: list) -> str:
        for lit in alm_lits:
            for term, sort in self.sig.position_sorts(lit):
                if isinstance(term, Var) and term.name == v:
                    return sort
        return "universe"

    def compile(self, ax) -> Rule:
        items = list(ax.body)
        alm_lits = [x for x in items if isinstance(x, Literal)]
        head_lit = getattr(ax, "head", None)
        if head_lit is not None:
            alm_lits = [head_lit] + alm_lits
        used = {v for x in alm_lits for v in x.vars()}
        used |= {v for x in items if isinstance(x, Compare) for v in x.vars()}
        if isinstance(ax, (DynamicCausalLaw, Executability)):
            used.add(ax.action)
        timed = isinstance(ax, (DynamicCausalLaw, Executability)) or any(
            self.sig.is_fluent(x.fn) for x in alm_lits if x.fn != "instance")
        t = AVar(self.fresh(used, "I")) if timed else None
        body: list = []
        if isinstance(ax, (DynamicCausalLaw, Executability)):
            body.append(Lit(_atom("occurs", AVar(ax.action), t)))
        for x in items:
            if isinstance(x, Compare):
                body.append(Cmp(x.op, to_term(x.left), to_term(x.right)))
            else:
                body += self.body_lit(x, t, used)
        head = None
        if isinstance(ax, DynamicCausalLaw):
            head = self.head_atom(ax.head, BinOp("+", t, Num(1)))
        elif head_lit is not None:
            head = self.head_atom(head_lit, t)
        body += self.guards(head, body, alm_lits)
        if timed:
            step = "step" if isinstance(ax, (DynamicCausalLaw, Executability)) else "time"
            body.append(Lit(_atom(step, t)))
        return Rule(head, tuple(body))


def _term_vars(t) -> set:
    if isinstance(t, AVar):
        return {t.name}
    if isinstance(t, Fn):
        out: set = set()
        for a in t.args:
            out |= _term_vars(a)
        return out
    if isinstance(t, BinOp):
        return _term_vars(t.left) | _term_vars(t.right)
    return set()


def _atom_vars(a: Atom) -> set:
    out: set = set()
    for x in a.args:
        out |= _term_vars(x)
    return out


def _ground_value(t) -> Fn:
    return to_term(t)


def compile_sd(sd: SystemDescription, horizon: int, check: bool = True) -> AspProgram:
    """Answer-set program for ``sd`` over time steps ``0..horizon``."""
    if horizon < 0:
        raise CompileError("horizon must be non-negative")
    present = {m.name for m in sd.modules}
    missing = [i.module for i in sd.imports if i.module not in present]
    if missing:
        raise CompileError(f"unresolved imports: {', '.join(missing)}")
    if check:
        report = validate(sd)
        if report:
            raise InvalidSystemDescription(report)
    theory = flatten_all(sd.modules, sd.theory_name or sd.name)
    sig = _Signature(theory)
    hierarchy = sig.hierarchy
    structure = expand_schemas_quiet(sd.structure, hierarchy)
    members = sort_members(structure, hierarchy)

    prog = AspProgram(horizon=horizon)
    facts = prog.facts
    rules = prog.rules
    X, S, T, F, V, W, I = (AVar(n) for n in ("X", "S", "T", "F", "V", "W", "I"))

    # sort hierarchy and structure
    for s in hierarchy.parents:
        for p in hierarchy.parents[s]:
            facts.append(_atom("subsort", Fn(s), Fn(p)))
    facts.append(_atom("is_a", Fn("true"), Fn("booleans")))
    facts.append(_atom("is_a", Fn("false"), Fn("booleans")))
    for inst in structure.instances:
        for name in inst.names:
            x = _ground_value(name)
            facts.append(_atom("is_a", x, Fn(inst.sort)))
            for a in inst.assignments:
                decl = hierarchy.attribute(inst.sort, a.attr)
                if decl is None:
                    raise CompileError(f"{a.attr} is not an attribute of {inst.sort}")
                if a.functional:
                    facts.append(_atom("stat", Fn(a.attr, (x,)), _ground_value(a.value)))
                else:
                    f = Fn(a.attr, (x,) + tuple(_ground_value(t) for t in a.args))
                    if a.value not in (TRUE, FALSE):
                        raise CompileError(f"relational attribute {a.attr} needs true/false")
                    facts.append(_atom("static", f, neg=a.value == FALSE))
    for lit in structure.statics:
        f = sig.functions.get(lit.fn)
        if f is None or f.fluent:
            raise CompileError(f"{lit.fn} is not a static")
        ground = _normalize(lit, f.boolean)
        term = Fn(lit.fn, tuple(_ground_value(t) for t in lit.args))
        if f.boolean:
            facts.append(_atom("static", term, neg=ground.negated))
        elif ground.negated:
            raise CompileError(f"{lit}: static values must be given with '='")
        else:
            facts.append(_atom("stat", term, _ground_value(lit.value)))
    for i in range(horizon):
        facts.append(_atom("step", Num(i)))
    for i in range(horizon + 1):
        facts.append(_atom("time", Num(i)))

    rules.append(Rule(_atom("instance", X, S), (Lit(_atom("is_a", X, S)),)))
    rules.append(Rule(_atom("instance", X, T),
                      (Lit(_atom("instance", X, S)), Lit(_atom("subsort", S, T)))))
    rules.append(Rule(_atom("action", X), (Lit(_atom("instance", X, Fn("actions"))),)))

    # fluent domains
    has_bool = has_func = False
    for f in theory.functions:
        if not f.fluent or f.defined:
            continue
        args = tuple(AVar(f"X{k + 1}") for k in range(len(f.arg_sorts)))
        guards = tuple(Lit(_atom("instance", a, Fn(s))) for a, s in zip(args, f.arg_sorts))
        for s in f.arg_sorts + (() if f.boolean else (f.range_sort,)):
            if not members.get(s):
                warnings.warn(f"fluent {f.name} ranges over sort {s} without instances",
                              UnboundedSort, stacklevel=2)
        if f.boolean:
            has_bool = True
            rules.append(Rule(_atom("bfluent", Fn(f.name, args)), guards))
        else:
            has_func = True
            rules.append(Rule(_atom("range", Fn(f.name, args), V),
                              guards + (Lit(_atom("instance", V, Fn(f.range_sort))),)))
    if has_func:
        rules.append(Rule(_atom("ffluent", F), (Lit(_atom("range", F, V)),)))

    # initial state and inertia
    nxt = BinOp("+", I, Num(1))
    if has_bool:
        rules.append(Rule(_atom("holds", F, Num(0)),
                          (Lit(_atom("bfluent", F)),
                           Lit(_atom("holds", F, Num(0), neg=True), True))))
        rules.append(Rule(_atom("holds", F, Num(0), neg=True),
                          (Lit(_atom("bfluent", F)), Lit(_atom("holds", F, Num(0)), True))))
        rules.append(Rule(_atom("holds", F, nxt),
                          (Lit(_atom("bfluent", F)), Lit(_atom("holds", F, I)),
                           Lit(_atom("holds", F, nxt, neg=True), True), Lit(_atom("step", I)))))
        rules.append(Rule(_atom("holds", F, nxt, neg=True),
                          (Lit(_atom("bfluent", F)), Lit(_atom("holds", F, I, neg=True)),
                           Lit(_atom("holds", F, nxt), True), Lit(_atom("step", I)))))
    if has_func:
        rules.append(Rule(Choice(1, 1, ((_atom("val", F, V, Num(0)),
                                         (Lit(_atom("range", F, V)),)),)),
                          (Lit(_atom("ffluent", F)),)))
        rules.append(Rule(_atom("overridden", F, V, I),
                          (Lit(_atom("val", F, W, I)), Lit(_atom("range", F, V)),
                           Cmp("!=", W, V), Lit(_atom("time", I)))))
        rules.append(Rule(_atom("val", F, V, nxt),
                          (Lit(_atom("val", F, V, I)), Lit(_atom("overridden", F, V, nxt), True),
                           Lit(_atom("step", I)))))
        rules.append(Rule(None, (Lit(_atom("val", F, V, I)), Lit(_atom("val", F, W, I)),
                                 Cmp("!=", V, W))))
        rules.append(Rule(None, (Lit(_atom("ffluent", F)), Lit(_atom("time", I)),
                                 Lit(_atom("has_val", F, I), True))))
        rules.append(Rule(_atom("has_val", F, I), (Lit(_atom("val", F, V, I)),)))

    ac = _AxiomCompiler(sig, members)
    for ax in theory.axioms:
        rules.append(ac.compile(ax))

    prog.sorts = {s: tuple(m) for s, m in members.items()}
    return prog


compile = compile_sd

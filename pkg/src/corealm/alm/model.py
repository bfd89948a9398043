"""Abstract syntax of ALM system descriptions and their well-formedness checks.

All nodes are frozen dataclasses over tuples, so they can be shared freely.
Source spans are carried for diagnostics but ignored by equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product
from typing import Iterable, Union

PREDEFINED_SORTS = ("universe", "actions", "booleans")
BUILTIN_PREDICATES = ("instance", "occurs")
FUNCTION_KINDS = ("basic-fluent", "defined-fluent", "basic-static", "defined-static")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    end_line: int = 0
    end_column: int = 0
    file: str = "<text>"

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


def _span():
    return field(default=None, compare=False, repr=False)


# -- terms and literals ------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    """A constant symbol, possibly applied to arguments (``go(john, a)``)."""

    name: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({', '.join(map(str, self.args))})"


Term = Union[Var, Const]
TRUE = Const("true")
FALSE = Const("false")


def term_vars(t: Term) -> list[str]:
    if isinstance(t, Var):
        return [t.name]
    out: list[str] = []
    for a in t.args:
        out += [v for v in term_vars(a) if v not in out]
    return out


def substitute(t: Term, binding: dict) -> Term:
    if isinstance(t, Var):
        return binding.get(t.name, t)
    if not t.args:
        return t
    return Const(t.name, tuple(substitute(a, binding) for a in t.args))


@dataclass(frozen=True)
class Literal:
    """``f(args)``, ``-f(args)``, ``f(args) = v`` or ``f(args) != v``.

    ``value`` is None for the boolean forms; ``negated`` flips the polarity
    (``-`` for boolean literals, ``!=`` for equalities).
    """

    fn: str
    args: tuple = ()
    value: Term | None = None
    negated: bool = False
    span: SourceSpan | None = _span()

    def __str__(self) -> str:
        base = self.fn + (f"({', '.join(map(str, self.args))})" if self.args else "")
        if self.value is None:
            return ("-" if self.negated else "") + base
        return f"{base} {'!=' if self.negated else '='} {self.value}"

    def vars(self) -> list[str]:
        out: list[str] = []
        for t in self.args + ((self.value,) if self.value is not None else ()):
            out += [v for v in term_vars(t) if v not in out]
        return out


@dataclass(frozen=True)
class Compare:
    """Comparison between terms: ``A1 != A2``."""

    op: str
    left: Term
    right: Term
    span: SourceSpan | None = _span()

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"

    def vars(self) -> list[str]:
        return term_vars(self.left) + [v for v in term_vars(self.right)
                                       if v not in term_vars(self.left)]


BodyItem = Union[Literal, Compare]


# -- axioms ------------------------------------------------------------------


@dataclass(frozen=True)
class DynamicCausalLaw:
    action: str  # the variable in ``occurs(X)``
    head: Literal
    body: tuple = ()
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class StateConstraint:
    head: Literal | None  # None stands for ``false``
    body: tuple = ()
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Executability:
    action: str
    body: tuple = ()
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Definition:
    head: Literal
    body: tuple = ()
    span: SourceSpan | None = _span()


Axiom = Union[DynamicCausalLaw, StateConstraint, Executability, Definition]


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class AttributeDecl:
    """Attribute of an action class.

    With ``arg_sorts`` empty the attribute is functional (``actor : agents``);
    otherwise it is relational and ranges over ``booleans``
    (``object : entity -> booleans`` read as ``object(X, A)``).
    """

    name: str
    arg_sorts: tuple = ()
    range_sort: str = "booleans"
    span: SourceSpan | None = _span()

    @property
    def functional(self) -> bool:
        return not self.arg_sorts


@dataclass(frozen=True)
class SortDecl:
    names: tuple
    parents: tuple = ()
    attributes: tuple = ()  # AttributeDecl, owned by every sort in ``names``
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    kind: str
    arg_sorts: tuple = ()
    range_sort: str = "booleans"
    span: SourceSpan | None = _span()

    @property
    def fluent(self) -> bool:
        return self.kind.endswith("fluent")

    @property
    def defined(self) -> bool:
        return self.kind.startswith("defined")

    @property
    def boolean(self) -> bool:
        return self.range_sort == "booleans"

    def signature(self) -> tuple:
        return (self.kind, self.arg_sorts, self.range_sort)


@dataclass(frozen=True)
class ModuleDecl:
    name: str
    depends_on: tuple = ()
    sorts: tuple = ()
    functions: tuple = ()
    axioms: tuple = ()
    optional: bool = False
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class AttrAssign:
    """``actor = X`` (functional) or ``agent(wrestler) = true`` (relational)."""

    attr: str
    args: tuple
    value: Term
    span: SourceSpan | None = _span()

    @property
    def functional(self) -> bool:
        return not self.args


@dataclass(frozen=True)
class InstanceDecl:
    names: tuple  # Const terms; variables in them make this a schema
    sort: str
    assignments: tuple = ()
    span: SourceSpan | None = _span()

    @property
    def is_schema(self) -> bool:
        return any(term_vars(n) for n in self.names)


@dataclass(frozen=True)
class Structure:
    name: str = ""
    instances: tuple = ()
    statics: tuple = ()  # Literal, ground
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class Import:
    library: str
    module: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True)
class SystemDescription:
    name: str
    theory_name: str = ""
    imports: tuple = ()
    modules: tuple = ()  # ModuleDecl; after import resolution this holds the full theory
    structure: Structure = Structure()
    span: SourceSpan | None = _span()


# -- errors and diagnostics --------------------------------------------------


class AlmError(Exception):
    pass


class UnknownModule(AlmError, KeyError):
    def __str__(self) -> str:
        return f"unknown module {self.args[0]!r}"


class DependencyCycle(AlmError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: SourceSpan | None = None

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        return f"{where}{self.code}: {self.message}"


class ValidationReport(list):
    """List of :class:`Diagnostic`; empty means well-formed."""

    @property
    def ok(self) -> bool:
        return not self

    def codes(self) -> list[str]:
        return [d.code for d in self]


# -- sort hierarchy ----------------------------------------------------------


class SortHierarchy:
    """Direct-parent map over declared and predefined sorts."""

    def __init__(self, sorts: Iterable[SortDecl] = ()):
        self.parents: dict[str, list[str]] = {"universe": [], "actions": ["universe"],
                                              "booleans": ["universe"]}
        self.attributes: dict[str, list[AttributeDecl]] = {}
        for sd in sorts:
            for n in sd.names:
                ps = self.parents.setdefault(n, [])
                ps.extend(p for p in sd.parents if p not in ps)
                self.attributes.setdefault(n, []).extend(sd.attributes)

    def __contains__(self, sort: str) -> bool:
        return sort in self.parents

    def ancestors(self, sort: str) -> list[str]:
        """``sort`` and all its supersorts, nearest first."""
        seen = [sort]
        frontier = [sort]
        while frontier:
            nxt = []
            for s in frontier:
                for p in self.parents.get(s, ()):
                    if p not in seen:
                        seen.append(p)
                        nxt.append(p)
            frontier = nxt
        return seen

    def is_subsort(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors(sub)

    def cycles(self) -> list[list[str]]:
        out = []
        state: dict[str, int] = {}

        def visit(s: str, path: list[str]) -> None:
            state[s] = 1
            for p in self.parents.get(s, ()):
                if state.get(p) == 1:
                    out.append(path[path.index(p):] + [p] if p in path else [s, p])
                elif p not in state:
                    visit(p, path + [p])
            state[s] = 2

        for s in sorted(self.parents):
            if s not in state:
                visit(s, [s])
        return out

    def attribute(self, sort: str, name: str) -> AttributeDecl | None:
        for s in self.ancestors(sort):
            for a in self.attributes.get(s, ()):
                if a.name == name:
                    return a
        return None


# -- modules -----------------------------------------------------------------


def module_closure(modules: dict[str, ModuleDecl], root: str) -> list[str]:
    """Ancestors of ``root`` in dependency order (dependencies before dependents)."""
    order: list[str] = []
    state: dict[str, int] = {}

    def visit(name: str, path: tuple) -> None:
        if name not in modules:
            raise UnknownModule(name)
        if state.get(name) == 2:
            return
        if state.get(name) == 1:
            raise DependencyCycle(" -> ".join(path + (name,)))
        state[name] = 1
        for d in modules[name].depends_on:
            visit(d, path + (name,))
        state[name] = 2
        order.append(name)

    visit(root, ())
    return order


def merge_modules(name: str, parts: Iterable[ModuleDecl]) -> ModuleDecl:
    sorts: list = []
    functions: list = []
    axioms: list = []
    for m in parts:
        for s in m.sorts:
            if s not in sorts:
                sorts.append(s)
        for f in m.functions:
            if f not in functions:
                functions.append(f)
        for a in m.axioms:
            if a not in axioms:
                axioms.append(a)
    functions_by_name = {f.name: f for f in functions}
    axioms = [classify_axiom(a, functions_by_name) for a in axioms]
    deduped: list = []
    for a in axioms:
        if a not in deduped:
            deduped.append(a)
    return ModuleDecl(name, (), tuple(sorts), tuple(functions), tuple(deduped))


def classify_axiom(ax: Axiom, functions: dict[str, FunctionDecl]) -> Axiom:
    """State constraints whose head is a defined function are definitions."""
    if isinstance(ax, StateConstraint) and ax.head is not None:
        f = functions.get(ax.head.fn)
        if f is not None and f.defined and not ax.head.negated:
            return Definition(ax.head, ax.body, span=ax.span)
    return ax


def flatten_theory(theory: Iterable[ModuleDecl], root_module: str,
                   include_optional: bool = False) -> ModuleDecl:
    """Merge ``root_module`` with all of its transitive dependencies.

    Optional modules whose dependencies lie inside the closure are merged
    too when ``include_optional`` is set.
    """
    modules = {m.name: m for m in theory}
    if root_module not in modules:
        raise UnknownModule(root_module)
    order = module_closure(modules, root_module)
    if include_optional:
        for m in modules.values():
            if m.optional and m.name not in order and set(m.depends_on) <= set(order):
                order.append(m.name)
    else:
        order = [n for n in order if not modules[n].optional or n == root_module]
    return merge_modules(root_module, (modules[n] for n in order))


def flatten_all(theory: Iterable[ModuleDecl], name: str = "theory",
                include_optional: bool = True) -> ModuleDecl:
    """Merge every module of a theory (in dependency order)."""
    theory = list(theory)
    modules = {m.name: m for m in theory}
    order: list[str] = []
    for m in theory:
        if m.optional and not include_optional:
            continue
        for n in module_closure(modules, m.name):
            if n not in order:
                order.append(n)
    return merge_modules(name, (modules[n] for n in order))


# -- structures --------------------------------------------------------------


class EmptySort(UserWarning):
    pass


def sort_members(structure: Structure, hierarchy: SortHierarchy) -> dict[str, list[Const]]:
    """Ground instances of every sort, including inherited membership."""
    members: dict[str, list[Const]] = {s: [] for s in hierarchy.parents}
    members["booleans"] = [TRUE, FALSE]
    for inst in structure.instances:
        if inst.is_schema:
            continue
        for s in hierarchy.ancestors(inst.sort):
            bucket = members.setdefault(s, [])
            for n in inst.names:
                if n not in bucket:
                    bucket.append(n)
    if TRUE not in members["universe"]:
        members["universe"] += [TRUE, FALSE]
    return members


def schema_var_sorts(inst: InstanceDecl, hierarchy: SortHierarchy) -> dict[str, str | None]:
    """Sort of each schema variable, read off the attribute it is assigned to."""
    out: dict[str, str | None] = {}
    for name in inst.names:
        for v in term_vars(name):
            out.setdefault(v, None)
    for a in inst.assignments:
        decl = hierarchy.attribute(inst.sort, a.attr)
        if decl is None:
            continue
        if a.functional and isinstance(a.value, Var):
            out[a.value.name] = out.get(a.value.name) or decl.range_sort
        for t, s in zip(a.args, decl.arg_sorts):
            if isinstance(t, Var):
                out[t.name] = out.get(t.name) or s
    return out


def expand_schemas(structure: Structure, sorts: SortHierarchy | Iterable[SortDecl]) -> Structure:
    """Replace every instance schema by its ground instances.

    A schema variable ranging over a sort without instances expands to
    nothing; an :class:`EmptySort` warning is issued.
    """
    import warnings

    hierarchy = sorts if isinstance(sorts, SortHierarchy) else SortHierarchy(sorts)
    members = sort_members(structure, hierarchy)
    out = []
    for inst in structure.instances:
        if not inst.is_schema:
            out.append(inst)
            continue
        var_sorts = schema_var_sorts(inst, hierarchy)
        names = list(var_sorts)
        domains = []
        for v in names:
            s = var_sorts[v]
            dom = members.get(s, []) if s else []
            if not dom:
                warnings.warn(f"schema variable {v} of {inst.names[0]} ranges over an empty sort "
                              f"{s!r}", EmptySort, stacklevel=2)
            domains.append(dom)
        for combo in product(*domains):
            b = dict(zip(names, combo))
            ground_names = tuple(substitute(n, b) for n in inst.names)
            assigns = tuple(replace(a, args=tuple(substitute(t, b) for t in a.args),
                                    value=substitute(a.value, b)) for a in inst.assignments)
            out.append(InstanceDecl(ground_names, inst.sort, assigns, span=inst.span))
    return replace(structure, instances=tuple(out))


# -- validation --------------------------------------------------------------


def _body_items(ax) -> tuple:
    return ax.body


def validate(sd: SystemDescription | ModuleDecl) -> ValidationReport:
    """Check well-formedness of a system description (or a lone module)."""
    report = ValidationReport()
    if isinstance(sd, ModuleDecl):
        sd = SystemDescription(sd.name, modules=(sd,))
    modules = {}
    for m in sd.modules:
        if m.name in modules and modules[m.name] != m:
            report.append(Diagnostic("duplicate module", f"module {m.name} defined twice", m.span))
        modules[m.name] = m
    for m in sd.modules:
        for d in m.depends_on:
            if d not in modules:
                report.append(Diagnostic("unknown module",
                                         f"{m.name} depends on undefined module {d}", m.span))
    if any(d.code == "unknown module" for d in report):
        return report
    for m in sd.modules:
        try:
            module_closure(modules, m.name)
        except DependencyCycle as e:
            report.append(Diagnostic("dependency cycle", str(e), m.span))
            return report
    theory = flatten_all(sd.modules, sd.theory_name or sd.name)
    _validate_theory(theory, report)
    if not any(d.code == "sort cycle" for d in report):
        _validate_structure(sd.structure, theory, report)
    return report


def _validate_theory(theory: ModuleDecl, report: ValidationReport) -> None:
    hierarchy = SortHierarchy(theory.sorts)
    for sd in theory.sorts:
        for n in sd.names:
            if n in ("universe", "booleans"):
                report.append(Diagnostic("predefined sort", f"cannot redeclare {n}", sd.span))
            if not sd.parents and n not in PREDEFINED_SORTS:
                report.append(Diagnostic("missing parent", f"sort {n} has no parent", sd.span))
        for p in sd.parents:
            if p not in hierarchy:
                report.append(Diagnostic("unknown sort", f"undeclared parent sort {p}", sd.span))
        for a in sd.attributes:
            for s in a.arg_sorts + (a.range_sort,):
                if s not in hierarchy:
                    report.append(Diagnostic("unknown sort",
                                             f"attribute {a.name} uses undeclared sort {s}",
                                             a.span or sd.span))
    for cyc in hierarchy.cycles():
        report.append(Diagnostic("sort cycle", " :: ".join(cyc), None))
    if any(d.code == "sort cycle" for d in report):
        return
    for n in hierarchy.parents:
        if "universe" not in hierarchy.ancestors(n):
            report.append(Diagnostic("unrooted sort", f"sort {n} is not below universe"))

    functions: dict[str, FunctionDecl] = {}
    for f in theory.functions:
        if f.kind not in FUNCTION_KINDS:
            report.append(Diagnostic("bad function kind", f"{f.name}: {f.kind}", f.span))
        prev = functions.get(f.name)
        if prev is not None and prev.signature() != f.signature():
            report.append(Diagnostic("signature clash",
                                     f"{f.name} declared with different signatures", f.span))
        functions[f.name] = f
        for s in f.arg_sorts + (f.range_sort,):
            if s not in hierarchy:
                report.append(Diagnostic("unknown sort",
                                         f"function {f.name} uses undeclared sort {s}", f.span))
        if f.defined and f.range_sort != "booleans":
            report.append(Diagnostic("defined range", f"defined function {f.name} must be "
                                     "boolean", f.span))
    attributes: dict[str, AttributeDecl] = {}
    for sd in theory.sorts:
        for a in sd.attributes:
            prev = attributes.get(a.name)
            if prev is not None and (prev.arg_sorts, prev.range_sort) != (a.arg_sorts,
                                                                          a.range_sort):
                report.append(Diagnostic("signature clash",
                                         f"attribute {a.name} declared with different signatures",
                                         a.span or sd.span))
            attributes[a.name] = a
            if a.name in functions:
                report.append(Diagnostic("signature clash",
                                         f"{a.name} is both a function and an attribute", a.span))

    def arity(fn: str) -> int | None:
        if fn in functions:
            return len(functions[fn].arg_sorts)
        if fn in attributes:
            return 1 + len(attributes[fn].arg_sorts)
        if fn == "instance":
            return 2
        return None

    def check_lit(lit: Literal, where) -> None:
        n = arity(lit.fn)
        if n is None:
            report.append(Diagnostic("unknown function", f"undeclared symbol {lit.fn}",
                                     lit.span or where))
            return
        if n != len(lit.args):
            report.append(Diagnostic("arity mismatch",
                                     f"{lit.fn} expects {n} arguments, got {len(lit.args)}",
                                     lit.span or where))
        if lit.fn == "instance" and isinstance(lit.args[1], Const) and \
                lit.args[1].name not in hierarchy:
            report.append(Diagnostic("unknown sort", f"instance of undeclared sort {lit.args[1]}",
                                     lit.span or where))
        boolean = (lit.fn == "instance" or (lit.fn in functions and functions[lit.fn].boolean)
                   or (lit.fn in attributes and not attributes[lit.fn].functional))
        if boolean and lit.value is not None and lit.value not in (TRUE, FALSE):
            report.append(Diagnostic("sort mismatch", f"{lit.fn} is boolean", lit.span or where))
        if not boolean and lit.value is None:
            report.append(Diagnostic("sort mismatch", f"{lit.fn} needs a value", lit.span or where))

    for ax in theory.axioms:
        where = ax.span
        for item in ax.body:
            if isinstance(item, Literal):
                check_lit(item, where)
        if isinstance(ax, DynamicCausalLaw):
            check_lit(ax.head, where)
            f = functions.get(ax.head.fn)
            if f is None or not f.fluent or f.defined:
                report.append(Diagnostic("bad head", f"causal law head {ax.head.fn} must be a "
                                         "basic fluent", where))
            _check_trigger(ax, report)
        elif isinstance(ax, Executability):
            _check_trigger(ax, report)
        elif isinstance(ax, Definition):
            check_lit(ax.head, where)
            f = functions.get(ax.head.fn)
            if f is None or not f.defined:
                report.append(Diagnostic("bad head", f"definition head {ax.head.fn} must be a "
                                         "defined function", where))
        elif isinstance(ax, StateConstraint) and ax.head is not None:
            check_lit(ax.head, where)
            f = functions.get(ax.head.fn)
            if f is not None and f.defined:
                report.append(Diagnostic("bad head", f"state constraint on defined function "
                                         f"{ax.head.fn}", where))


def _check_trigger(ax, report: ValidationReport) -> None:
    names = [v for item in ax.body for v in item.vars()]
    if ax.action not in names:
        report.append(Diagnostic("unbound action", f"action variable {ax.action} does not occur "
                                 "in the body", ax.span))


def _validate_structure(structure: Structure, theory: ModuleDecl,
                        report: ValidationReport) -> None:
    hierarchy = SortHierarchy(theory.sorts)
    functions = {f.name: f for f in theory.functions}
    for inst in structure.instances:
        if inst.sort not in hierarchy:
            report.append(Diagnostic("unknown sort", f"instance sort {inst.sort} is undeclared",
                                     inst.span))
            continue
        if inst.is_schema:
            for v, s in schema_var_sorts(inst, hierarchy).items():
                if s is None:
                    report.append(Diagnostic("untyped schema variable",
                                             f"{v} is not assigned to any attribute", inst.span))
    try:
        expanded = expand_schemas_quiet(structure, hierarchy)
    except Exception as e:  # pragma: no cover - defensive
        report.append(Diagnostic("schema", str(e), structure.span))
        return
    members = sort_members(expanded, hierarchy)

    def is_member(t: Term, sort: str) -> bool:
        return isinstance(t, Const) and t in members.get(sort, [])

    for inst in expanded.instances:
        if inst.sort not in hierarchy:
            continue
        for a in inst.assignments:
            decl = hierarchy.attribute(inst.sort, a.attr)
            where = a.span or inst.span
            if decl is None:
                report.append(Diagnostic("unknown attribute",
                                         f"{a.attr} is not an attribute of {inst.sort}", where))
                continue
            if decl.functional != a.functional or len(a.args) != len(decl.arg_sorts):
                report.append(Diagnostic("arity mismatch", f"attribute {a.attr}", where))
                continue
            for t, s in zip(a.args, decl.arg_sorts):
                if not is_member(t, s):
                    report.append(Diagnostic("sort mismatch",
                                             f"{a.attr}: {t} is not a {s}", where))
            if not is_member(a.value, decl.range_sort):
                report.append(Diagnostic("sort mismatch",
                                         f"{a.attr} = {a.value}: not a {decl.range_sort}", where))
    for lit in structure.statics:
        f = functions.get(lit.fn)
        if f is None or f.fluent:
            report.append(Diagnostic("unknown static", f"{lit.fn} is not a declared static",
                                     lit.span))
            continue
        if len(lit.args) != len(f.arg_sorts):
            report.append(Diagnostic("arity mismatch", f"static {lit.fn}", lit.span))
            continue
        for t, s in zip(lit.args, f.arg_sorts):
            if not is_member(t, s):
                report.append(Diagnostic("sort mismatch", f"{lit.fn}: {t} is not a {s}",
                                         lit.span))
        if lit.value is not None and not is_member(lit.value, f.range_sort):
            report.append(Diagnostic("sort mismatch",
                                     f"{lit.fn} = {lit.value}: not a {f.range_sort}", lit.span))


def expand_schemas_quiet(structure: Structure, hierarchy: SortHierarchy) -> Structure:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", EmptySort)
        return expand_schemas(structure, hierarchy)

"""Reader and printer for `.alm` text.

The format is line oriented: one statement per line, an optional trailing
period, ``%`` comments.  Indentation is cosmetic; section keywords
(``sort declarations``, ``attributes``, ``instances`` ...) decide how a line
is read.  The printer indents two spaces per nesting level and its output
parses back to an equal tree.
"""

from __future__ import annotations

import re
from typing import Union

from .model import (AlmError, AttrAssign, AttributeDecl, Compare, Const, Definition,
                    DynamicCausalLaw, Executability, FunctionDecl, Import, InstanceDecl, Literal,
                    ModuleDecl, SortDecl, SourceSpan, StateConstraint, Structure,
                    SystemDescription, Var, classify_axiom)


class AlmSyntaxError(AlmError):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class UnknownKeyword(AlmSyntaxError):
    pass


_TOKEN = re.compile(r"\s*(?:(::|->|!=|<>|[(),:=*.\-¬])|([A-Za-z_][A-Za-z0-9_]*)|(\d+)|(\S))")

KINDS = {("fluent", "basic"): "basic-fluent", ("fluent", "defined"): "defined-fluent",
         ("static", "basic"): "basic-static", ("static", "defined"): "defined-static"}
KIND_WORDS = {v: " ".join(k) for k, v in KINDS.items()}


class _Line:
    def __init__(self, text: str, lineno: int, file: str):
        self.lineno = lineno
        self.file = file
        self.toks: list[tuple[str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                break
            if m.group(4):
                raise AlmSyntaxError(f"unexpected character {m.group(4)!r}",
                                     SourceSpan(lineno, m.start(4) + 1, file=file))
            tok = m.group(1) or m.group(2) or m.group(3)
            col = m.start(m.lastindex) + 1
            self.toks.append(("-" if tok == "¬" else tok, col))
            pos = m.end()
        while self.toks and self.toks[-1][0] == ".":
            self.toks.pop()
        self.i = 0
        self.end_col = len(text) + 1

    def span(self, k: int | None = None) -> SourceSpan:
        k = self.i if k is None else k
        col = self.toks[k][1] if k < len(self.toks) else self.end_col
        return SourceSpan(self.lineno, col, self.lineno, self.end_col, self.file)

    def peek(self, k: int = 0) -> str:
        j = self.i + k
        return self.toks[j][0] if j < len(self.toks) else ""

    def words(self, n: int) -> tuple:
        return tuple(self.peek(k) for k in range(n))

    def next(self) -> str:
        if self.i >= len(self.toks):
            raise AlmSyntaxError("unexpected end of statement", self.span())
        t = self.toks[self.i][0]
        self.i += 1
        return t

    def expect(self, tok: str) -> None:
        if self.peek() != tok:
            found = self.peek() or "end of statement"
            raise AlmSyntaxError(f"expected {tok!r}, found {found!r}", self.span())
        self.i += 1

    def ident(self, what: str = "identifier") -> str:
        t = self.peek()
        if not t or not (t[0].isalpha() or t[0] == "_"):
            raise AlmSyntaxError(f"expected {what}, found {t or 'end of statement'!r}",
                                 self.span())
        self.i += 1
        return t

    def lower_ident(self, what: str) -> str:
        t = self.peek()
        if not t or not (t[0].islower() or t[0] == "_"):
            raise AlmSyntaxError(f"expected {what}, found {t or 'end of statement'!r}",
                                 self.span())
        self.i += 1
        return t

    def done(self) -> None:
        if self.i < len(self.toks):
            raise AlmSyntaxError(f"unexpected {self.peek()!r}", self.span())

    def ident_list(self, what: str) -> tuple:
        out = [self.lower_ident(what)]
        while self.peek() == ",":
            self.next()
            out.append(self.lower_ident(what))
        return tuple(out)


def _lines(text: str, file: str) -> list[_Line]:
    out = []
    for n, raw in enumerate(text.splitlines(), 1):
        raw = raw.split("%", 1)[0]
        if raw.strip():
            ln = _Line(raw, n, file)
            if ln.toks:
                out.append(ln)
    return out


# -- terms, literals, axioms -------------------------------------------------


def _term(ln: _Line):
    name = ln.ident("term")
    if name[0].isupper():
        return Var(name)
    if ln.peek() == "(":
        return Const(name, _args(ln))
    return Const(name)


def _args(ln: _Line) -> tuple:
    ln.expect("(")
    out = [_term(ln)]
    while ln.peek() == ",":
        ln.next()
        out.append(_term(ln))
    ln.expect(")")
    return tuple(out)


def _literal(ln: _Line) -> Literal:
    start = ln.span()
    neg = False
    if ln.peek() == "-":
        ln.next()
        neg = True
    fn = ln.lower_ident("function symbol")
    args = _args(ln) if ln.peek() == "(" else ()
    if ln.peek() in ("=", "!=", "<>"):
        if neg:
            raise AlmSyntaxError("negation of an equality; use '!='", start)
        op = ln.next()
        return Literal(fn, args, _term(ln), op != "=", span=start)
    return Literal(fn, args, None, neg, span=start)


def _body_item(ln: _Line):
    if ln.peek() and ln.peek()[0].isupper():
        start = ln.span()
        left = _term(ln)
        op = ln.next()
        if op not in ("=", "!=", "<>"):
            raise AlmSyntaxError(f"expected comparison, found {op!r}", ln.span(ln.i - 1))
        return Compare("!=" if op == "<>" else op, left, _term(ln), span=start)
    return _literal(ln)


def _body(ln: _Line) -> tuple:
    items = [_body_item(ln)]
    while ln.peek() == ",":
        ln.next()
        items.append(_body_item(ln))
    return tuple(items)


def _occurs_var(ln: _Line) -> str:
    ln.expect("occurs")
    ln.expect("(")
    v = ln.ident("action variable")
    if not v[0].isupper():
        raise AlmSyntaxError("occurs expects a variable", ln.span(ln.i - 1))
    ln.expect(")")
    return v


def _axiom(ln: _Line):
    span = ln.span(0)
    first = ln.peek()
    if first == "occurs":
        v = _occurs_var(ln)
        ln.expect("causes")
        head = _literal(ln)
        body: tuple = ()
        if ln.peek() == "if":
            ln.next()
            body = _body(ln)
        ln.done()
        return DynamicCausalLaw(v, head, body, span=span)
    if first == "impossible":
        ln.next()
        v = _occurs_var(ln)
        body = ()
        if ln.peek() == "if":
            ln.next()
            body = _body(ln)
        ln.done()
        return Executability(v, body, span=span)
    if first == "false":
        ln.next()
        ln.expect("if")
        body = _body(ln)
        ln.done()
        return StateConstraint(None, body, span=span)
    head = _literal(ln)
    body = ()
    if ln.peek() == "if":
        ln.next()
        body = _body(ln)
    ln.done()
    return StateConstraint(head, body, span=span)


def parse_axiom(text: str):
    lines = _lines(text, "<axiom>")
    if len(lines) != 1:
        raise AlmSyntaxError("expected one axiom", SourceSpan(1, 1, file="<axiom>"))
    return _axiom(lines[0])


def parse_literal(text: str) -> Literal:
    ln = _lines(text, "<literal>")[0]
    lit = _literal(ln)
    ln.done()
    return lit


def _signature(ln: _Line) -> tuple[tuple, str]:
    """``a * b -> r`` or just ``r``."""
    sorts = [ln.lower_ident("sort")]
    while ln.peek() == "*":
        ln.next()
        sorts.append(ln.lower_ident("sort"))
    if ln.peek() == "->":
        ln.next()
        rng = ln.lower_ident("range sort")
        return tuple(sorts), rng
    if len(sorts) > 1:
        raise AlmSyntaxError("expected '->'", ln.span())
    return (), sorts[0]


# -- sections ----------------------------------------------------------------


class _Reader:
    def __init__(self, text: str, file: str):
        self.lines = _lines(text, file)
        self.k = 0
        self.file = file

    def eof(self) -> bool:
        return self.k >= len(self.lines)

    def cur(self) -> _Line:
        return self.lines[self.k]

    def starts(self, *words: str) -> bool:
        return not self.eof() and self.cur().words(len(words)) == words

    def end_span(self) -> SourceSpan:
        n = self.lines[-1].lineno + 1 if self.lines else 1
        return SourceSpan(n, 1, file=self.file)

    def module(self) -> ModuleDecl:
        ln = self.cur()
        span = ln.span(0)
        optional = False
        if ln.peek() == "optional":
            ln.next()
            optional = True
        ln.expect("module")
        name = ln.lower_ident("module name")
        ln.done()
        self.k += 1
        depends: tuple = ()
        sorts: list = []
        functions: list = []
        axioms: list = []
        section = None
        while not self.eof():
            ln = self.cur()
            w = ln.words(2)
            if w[0] in ("module", "optional", "structure", "import", "system", "theory"):
                break
            self.k += 1
            if w == ("depends", "on"):
                ln.i = 2
                depends += ln.ident_list("module name")
                ln.done()
            elif w == ("sort", "declarations"):
                section = "sorts"
                ln.i = 2
                ln.done()
            elif w == ("function", "declarations"):
                section = "functions"
                ln.i = 2
                ln.done()
            elif w[0] == "axioms":
                section = "axioms"
                ln.i = 1
                ln.done()
            elif w[0] == "attributes":
                if section not in ("sorts", "attributes") or not sorts:
                    raise AlmSyntaxError("attributes outside a sort declaration", ln.span(0))
                section = "attributes"
                ln.i = 1
                ln.done()
            elif section == "sorts" or (section == "attributes" and "::" in [t for t, _ in ln.toks]):
                section = "sorts"
                sorts.append(self._sort_line(ln))
            elif section == "attributes" and ln.peek() in ("actions",) and len(ln.toks) == 1:
                section = "sorts"
                sorts.append(self._sort_line(ln))
            elif section == "attributes":
                s = sorts[-1]
                sorts[-1] = SortDecl(s.names, s.parents, s.attributes + self._attr_line(ln),
                                     span=s.span)
            elif section == "functions":
                functions.extend(self._function_line(ln))
            elif section == "axioms":
                axioms.append(_axiom(ln))
            else:
                raise UnknownKeyword(f"unknown keyword {ln.peek()!r}", ln.span(0))
        by_name = {f.name: f for f in functions}
        axioms = [classify_axiom(a, by_name) for a in axioms]
        return ModuleDecl(name, depends, tuple(sorts), tuple(functions), tuple(axioms), optional,
                          span=span)

    @staticmethod
    def _sort_line(ln: _Line) -> SortDecl:
        span = ln.span(0)
        names = ln.ident_list("sort name")
        parents: tuple = ()
        if ln.peek() == "::":
            ln.next()
            parents = ln.ident_list("sort name")
        ln.done()
        return SortDecl(names, parents, (), span=span)

    @staticmethod
    def _attr_line(ln: _Line) -> tuple:
        span = ln.span(0)
        names = ln.ident_list("attribute name")
        ln.expect(":")
        args, rng = _signature(ln)
        ln.done()
        return tuple(AttributeDecl(n, args, rng, span=span) for n in names)

    @staticmethod
    def _function_line(ln: _Line) -> list:
        span = ln.span(0)
        w = ln.words(2)
        kind = KINDS.get(w)
        if kind is None:
            raise UnknownKeyword(f"expected 'fluent|static basic|defined', found {w[0]!r}",
                                 ln.span(0))
        ln.i = 2
        names = ln.ident_list("function name")
        ln.expect(":")
        args, rng = _signature(ln)
        ln.done()
        return [FunctionDecl(n, kind, args, rng, span=span) for n in names]

    def structure(self) -> Structure:
        ln = self.cur()
        span = ln.span(0)
        ln.expect("structure")
        name = ln.lower_ident("structure name")
        ln.done()
        self.k += 1
        instances: list = []
        statics: list = []
        section = None
        while not self.eof():
            ln = self.cur()
            self.k += 1
            w = ln.words(3)
            if w[0] == "instances" and len(ln.toks) == 1:
                section = "instances"
            elif w == ("values", "of", "statics"):
                section = "statics"
                ln.i = 3
                ln.done()
            elif section == "instances":
                toks = [t for t, _ in ln.toks]
                if "in" in toks:
                    instances.append(self._instance_line(ln))
                else:
                    if not instances:
                        raise AlmSyntaxError("attribute value before any instance", ln.span(0))
                    inst = instances[-1]
                    instances[-1] = InstanceDecl(inst.names, inst.sort,
                                                 inst.assignments + (self._assign_line(ln),),
                                                 span=inst.span)
            elif section == "statics":
                lit = _literal(ln)
                ln.done()
                statics.append(lit)
            else:
                raise UnknownKeyword(f"unknown keyword {ln.peek()!r}", ln.span(0))
        return Structure(name, tuple(instances), tuple(statics), span=span)

    @staticmethod
    def _instance_line(ln: _Line) -> InstanceDecl:
        span = ln.span(0)
        names = [_term(ln)]
        while ln.peek() == ",":
            ln.next()
            names.append(_term(ln))
        for n in names:
            if isinstance(n, Var):
                raise AlmSyntaxError("instance names must be constants", span)
        ln.expect("in")
        sort = ln.lower_ident("sort")
        ln.done()
        return InstanceDecl(tuple(names), sort, (), span=span)

    @staticmethod
    def _assign_line(ln: _Line) -> AttrAssign:
        span = ln.span(0)
        attr = ln.lower_ident("attribute")
        args = _args(ln) if ln.peek() == "(" else ()
        ln.expect("=")
        value = _term(ln)
        ln.done()
        return AttrAssign(attr, args, value, span=span)


def parse_module(text: str, file: str = "<module>") -> ModuleDecl:
    r = _Reader(text, file)
    if r.eof():
        raise AlmSyntaxError("expected 'module'", r.end_span())
    if not (r.starts("module") or r.starts("optional", "module")):
        raise UnknownKeyword(f"expected 'module', found {r.cur().peek()!r}", r.cur().span(0))
    m = r.module()
    if not r.eof():
        raise AlmSyntaxError("unexpected input after module", r.cur().span(0))
    return m


def parse_system_description(text: str, file: str = "<system description>") -> SystemDescription:
    r = _Reader(text, file)
    if r.eof():
        raise AlmSyntaxError("expected 'system description'", r.end_span())
    ln = r.cur()
    span = ln.span(0)
    if ln.words(2) != ("system", "description"):
        raise UnknownKeyword(f"expected 'system description', found {ln.peek()!r}", span)
    ln.i = 2
    name = ln.lower_ident("system description name")
    ln.done()
    r.k += 1
    if r.eof() or r.cur().peek() != "theory":
        raise AlmSyntaxError("expected 'theory'", r.end_span() if r.eof() else r.cur().span(0))
    ln = r.cur()
    ln.next()
    theory = ln.lower_ident("theory name")
    ln.done()
    r.k += 1
    imports: list = []
    modules: list = []
    while not r.eof() and not r.starts("structure"):
        ln = r.cur()
        if ln.words(2) == ("import", "from"):
            ispan = ln.span(0)
            ln.i = 2
            lib = ln.ident("library name")
            ln.expect("module")
            mod = ln.lower_ident("module name")
            ln.done()
            imports.append(Import(lib, mod, span=ispan))
            r.k += 1
        elif ln.peek() in ("module", "optional"):
            modules.append(r.module())
        else:
            raise UnknownKeyword(f"unknown keyword {ln.peek()!r}", ln.span(0))
    structure = Structure()
    if not r.eof():
        structure = r.structure()
    return SystemDescription(name, theory, tuple(imports), tuple(modules), structure, span=span)


def parse_theory(text: str, file: str = "<theory>") -> tuple[str, tuple]:
    """Read ``theory N`` followed by modules; returns the name and modules."""
    r = _Reader(text, file)
    if r.eof():
        raise AlmSyntaxError("expected 'theory'", r.end_span())
    ln = r.cur()
    if ln.peek() != "theory":
        raise UnknownKeyword(f"expected 'theory', found {ln.peek()!r}", ln.span(0))
    ln.next()
    name = ln.lower_ident("theory name")
    ln.done()
    r.k += 1
    modules: list = []
    while not r.eof():
        ln = r.cur()
        if ln.peek() not in ("module", "optional"):
            raise UnknownKeyword(f"unknown keyword {ln.peek()!r}", ln.span(0))
        modules.append(r.module())
    return name, tuple(modules)


# -- printing ----------------------------------------------------------------


def format_axiom(ax) -> str:
    if isinstance(ax, DynamicCausalLaw):
        s = f"occurs({ax.action}) causes {ax.head}"
    elif isinstance(ax, Executability):
        s = f"impossible occurs({ax.action})"
    elif isinstance(ax, StateConstraint) and ax.head is None:
        s = "false"
    else:
        s = str(ax.head)
    if ax.body:
        s += " if " + ", ".join(map(str, ax.body))
    return s + "."


def _sig(args: tuple, rng: str) -> str:
    return (" * ".join(args) + " -> " + rng) if args else rng


def format_sort_decl(sd: SortDecl) -> str:
    s = ", ".join(sd.names)
    if sd.parents:
        s += " :: " + ", ".join(sd.parents)
    return s


def format_attribute(a: AttributeDecl) -> str:
    return f"{a.name} : {_sig(a.arg_sorts, a.range_sort)}"


def format_function(f: FunctionDecl) -> str:
    return f"{KIND_WORDS[f.kind]} {f.name} : {_sig(f.arg_sorts, f.range_sort)}"


def _module_lines(m: ModuleDecl, ind: int) -> list[str]:
    p = "  " * ind
    out = [f"{p}{'optional ' if m.optional else ''}module {m.name}"]
    if m.depends_on:
        out.append(f"{p}  depends on {', '.join(m.depends_on)}")
    out.append(f"{p}  sort declarations")
    for sd in m.sorts:
        out.append(f"{p}    {format_sort_decl(sd)}")
        if sd.attributes:
            out.append(f"{p}      attributes")
            out += [f"{p}        {format_attribute(a)}" for a in sd.attributes]
    out.append(f"{p}  function declarations")
    out += [f"{p}    {format_function(f)}" for f in m.functions]
    out.append(f"{p}  axioms")
    out += [f"{p}    {format_axiom(a)}" for a in m.axioms]
    return out


def _structure_lines(s: Structure, ind: int) -> list[str]:
    p = "  " * ind
    out = [f"{p}structure {s.name or 'main'}", f"{p}  instances"]
    for inst in s.instances:
        out.append(f"{p}    {', '.join(map(str, inst.names))} in {inst.sort}")
        for a in inst.assignments:
            lhs = a.attr + (f"({', '.join(map(str, a.args))})" if a.args else "")
            out.append(f"{p}      {lhs} = {a.value}")
    if s.statics:
        out.append(f"{p}  values of statics")
        out += [f"{p}    {lit}" for lit in s.statics]
    return out


def print_alm(node: Union[SystemDescription, ModuleDecl, Structure]) -> str:
    """Canonical text of a system description, module or structure."""
    if isinstance(node, ModuleDecl):
        lines = _module_lines(node, 0)
    elif isinstance(node, Structure):
        lines = _structure_lines(node, 0)
    else:
        lines = [f"system description {node.name}",
                 f"  theory {node.theory_name or node.name}"]
        lines += [f"    import from {i.library} module {i.module}" for i in node.imports]
        for m in node.modules:
            lines += _module_lines(m, 2)
        lines += _structure_lines(node.structure, 1)
    return "\n".join(lines) + "\n"


def print_theory(name: str, modules) -> str:
    lines = [f"theory {name}"]
    for m in modules:
        lines += _module_lines(m, 1)
    return "\n".join(lines) + "\n"

"""Non-ground answer-set programs: terms, literals, rules, and the `.lp` dialect.

Ground values are plain Python objects: ``str`` for constants, ``int`` for
numbers and ``tuple`` ``(name, arg1, ...)`` for compound terms.  The same
representation is used for ground atoms, where the predicate name of a
classically negated atom carries a leading ``-``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Union


class AspSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column


# -- terms ------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Fn:
    """Constant (no arguments) or compound term."""

    name: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({','.join(map(str, self.args))})"


@dataclass(frozen=True)
class Num:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class BinOp:
    op: str  # '+' or '-'
    left: "Term"
    right: "Term"

    def __str__(self) -> str:
        return f"{self.left}{self.op}{self.right}"


Term = Union[Var, Fn, Num, BinOp]
Value = Union[str, int, tuple]


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Fn):
        out: set[str] = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    if isinstance(t, BinOp):
        return term_vars(t.left) | term_vars(t.right)
    return set()


def from_value(v: Value) -> Term:
    if isinstance(v, int):
        return Num(v)
    if isinstance(v, str):
        return Fn(v)
    return Fn(v[0], tuple(from_value(a) for a in v[1:]))


def format_value(v: Value) -> str:
    if isinstance(v, (str, int)):
        return str(v)
    if len(v) == 1:
        return v[0]
    return f"{v[0]}({','.join(format_value(a) for a in v[1:])})"


def value_key(v: Value):
    """Total order on ground values: numbers < constants < compounds."""
    if isinstance(v, int):
        return (0, v, "", ())
    if isinstance(v, str):
        return (1, 0, v, ())
    return (2, len(v), v[0], tuple(value_key(a) for a in v[1:]))


# -- literals and rules ------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple = ()
    neg: bool = False  # classical negation

    @property
    def name(self) -> str:
        return "-" + self.pred if self.neg else self.pred

    def __str__(self) -> str:
        base = self.name
        if self.args:
            base += f"({','.join(map(str, self.args))})"
        return base


@dataclass(frozen=True)
class Lit:
    atom: Atom
    naf: bool = False  # default negation

    def __str__(self) -> str:
        return f"not {self.atom}" if self.naf else str(self.atom)


@dataclass(frozen=True)
class Cmp:
    op: str  # = != < <= > >=
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


BodyItem = Union[Lit, Cmp]


@dataclass(frozen=True)
class Choice:
    lower: int | None
    upper: int | None
    elements: tuple  # of (Atom, tuple[Lit, ...])

    def __str__(self) -> str:
        parts = []
        for atom, cond in self.elements:
            parts.append(str(atom) + (" : " + ", ".join(map(str, cond)) if cond else ""))
        s = "{ " + "; ".join(parts) + " }"
        if self.lower is not None:
            s = f"{self.lower} {s}"
        if self.upper is not None:
            s = f"{s} {self.upper}"
        return s


@dataclass(frozen=True)
class Rule:
    head: Atom | Choice | None  # None is a constraint
    body: tuple = ()

    def __str__(self) -> str:
        if self.head is None:
            return ":- " + ", ".join(map(str, self.body)) + "."
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- " + ", ".join(map(str, self.body)) + "."

    @property
    def is_fact(self) -> bool:
        return isinstance(self.head, Atom) and not self.body


@dataclass
class AspProgram:
    """A non-ground program plus the sort tables it was compiled against."""

    rules: list[Rule] = field(default_factory=list)
    facts: list[Atom] = field(default_factory=list)
    sorts: dict[str, tuple] = field(default_factory=dict)
    horizon: int = 0

    def all_rules(self) -> list[Rule]:
        return [Rule(f) for f in self.facts] + list(self.rules)

    def extended(self, rules: Iterable[Rule] = (), facts: Iterable[Atom] = ()) -> "AspProgram":
        return AspProgram(list(self.rules) + list(rules), list(self.facts) + list(facts),
                          dict(self.sorts), self.horizon)


# -- text emission -----------------------------------------------------------


def emit_text(program: AspProgram) -> str:
    """Render ``program`` in clingo-compatible syntax.

    Facts come first, sorted; rules follow in program order.  Empty programs
    render as the empty string.
    """
    lines = sorted({f"{f}." for f in program.facts}, key=_fact_sort_key)
    lines += [str(r) for r in program.rules]
    return "".join(line + "\n" for line in lines)


def _fact_sort_key(text: str):
    # numbers inside facts sort numerically so step/2 facts read naturally
    return [(0, int(tok), "") if tok.isdigit() else (1, 0, tok)
            for tok in re.findall(r"\d+|\D+", text)]


# -- text parsing ------------------------------------------------------------


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>%[^\n]*) |
    (?P<if>:-) | (?P<op><=|>=|!=|<>|=|<|>) |
    (?P<num>\d+) | (?P<ident>[a-z_][A-Za-z0-9_']*) | (?P<var>[A-Z][A-Za-z0-9_']*) |
    (?P<punct>[(),.:;{}+\-])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos, line, col = 0, 1, 1
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise AspSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        val = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        elif kind not in ("ws", "comment"):
            out.append((kind, val, line, col))
            col += len(val)
        else:
            col += len(val)
        pos = m.end()
    out.append(("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val: str):
        t = self.next()
        if t[1] != val:
            raise AspSyntaxError(f"expected {val!r}, got {t[1] or 'end of input'!r}", t[2], t[3])
        return t

    def error(self, msg: str):
        t = self.peek()
        raise AspSyntaxError(msg, t[2], t[3])

    def program(self) -> AspProgram:
        prog = AspProgram()
        while self.peek()[0] != "eof":
            r = self.rule()
            if r.is_fact:
                prog.facts.append(r.head)
            else:
                prog.rules.append(r)
        return prog

    def rule(self) -> Rule:
        head: Atom | Choice | None = None
        if self.peek()[1] != ":-":
            head = self.head()
        body: list = []
        if self.peek()[1] == ":-":
            self.next()
            body = self.body()
        elif head is None:
            self.error("empty rule")
        self.expect(".")
        return Rule(head, tuple(body))

    def head(self):
        t = self.peek()
        if t[0] == "num" or t[1] == "{":
            lower = None
            if t[0] == "num":
                lower = int(self.next()[1])
            self.expect("{")
            elems = []
            while self.peek()[1] != "}":
                atom = self.atom()
                cond: list = []
                if self.peek()[1] == ":":
                    self.next()
                    cond.append(self.lit())
                    while self.peek()[1] == ",":
                        self.next()
                        cond.append(self.lit())
                elems.append((atom, tuple(cond)))
                if self.peek()[1] == ";":
                    self.next()
            self.expect("}")
            upper = None
            if self.peek()[0] == "num":
                upper = int(self.next()[1])
            return Choice(lower, upper, tuple(elems))
        return self.atom()

    def body(self) -> list:
        items = [self.body_item()]
        while self.peek()[1] == ",":
            self.next()
            items.append(self.body_item())
        return items

    def body_item(self):
        t = self.peek()
        if t[1] == "not" or t[1] == "-" or (t[0] == "ident" and self._is_atom_start()):
            return self.lit()
        left = self.term()
        op = self.next()
        if op[0] != "op":
            raise AspSyntaxError("expected comparison operator", op[2], op[3])
        right = self.term()
        return Cmp("!=" if op[1] == "<>" else op[1], left, right)

    def _is_atom_start(self) -> bool:
        # an identifier begins an atom unless a comparison operator follows the term
        j = self.i
        depth = 0
        while True:
            k, v = self.toks[j][0], self.toks[j][1]
            if k == "eof":
                return True
            if v == "(":
                depth += 1
            elif v == ")":
                depth -= 1
            elif depth == 0 and (v in (",", ".", ";", ":", "}") or k == "if"):
                return True
            elif depth == 0 and (k == "op" or v in "+-"):
                return False
            j += 1

    def lit(self) -> Lit:
        naf = False
        if self.peek()[1] == "not":
            self.next()
            naf = True
        return Lit(self.atom(), naf)

    def atom(self) -> Atom:
        neg = False
        if self.peek()[1] == "-":
            self.next()
            neg = True
        t = self.next()
        if t[0] != "ident":
            raise AspSyntaxError(f"expected predicate name, got {t[1]!r}", t[2], t[3])
        args: tuple = ()
        if self.peek()[1] == "(":
            args = self.args()
        return Atom(t[1], args, neg)

    def args(self) -> tuple:
        self.expect("(")
        out = [self.term()]
        while self.peek()[1] == ",":
            self.next()
            out.append(self.term())
        self.expect(")")
        return tuple(out)

    def term(self) -> Term:
        left = self.simple_term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            left = BinOp(op, left, self.simple_term())
        return left

    def simple_term(self) -> Term:
        t = self.next()
        if t[0] == "num":
            return Num(int(t[1]))
        if t[0] == "var":
            return Var(t[1])
        if t[0] == "ident":
            if self.peek()[1] == "(":
                return Fn(t[1], self.args())
            return Fn(t[1])
        if t[1] == "-" and self.peek()[0] == "num":
            return Num(-int(self.next()[1]))
        raise AspSyntaxError(f"unexpected token {t[1]!r}", t[2], t[3])


def parse_program(text: str) -> AspProgram:
    """Read a program written in the dialect produced by :func:`emit_text`."""
    return _Parser(text).program()


def parse_rule(text: str) -> Rule:
    p = _Parser(text)
    r = p.rule()
    if p.peek()[0] != "eof":
        p.error("trailing input")
    return r

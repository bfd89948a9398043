"""S-expression reader and printer for KM source text."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True)
class Sym:
    """A bare symbol.  Keyword symbols start with a colon (``:triple``)."""

    name: str

    @property
    def is_keyword(self) -> bool:
        return self.name.startswith(":")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Str:
    value: str

    def __str__(self) -> str:
        return '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'


SExpr = Union[Sym, Str, int, list]


class UnbalancedParen(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


_TOKEN = re.compile(r'\s+|;[^\n]*|(\()|(\))|"((?:[^"\\]|\\.)*)"|([^\s()";]+)|(")', re.S)
_INT = re.compile(r"[+-]?\d+$")


def _position(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def parse_sexprs(text: str) -> list:
    """Read every top-level form of ``text``."""
    stack: list[tuple[list, int]] = []
    top: list = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        pos = m.end()
        if m.group(1):
            stack.append(([], m.start()))
            continue
        if m.group(2):
            if not stack:
                raise UnbalancedParen("unexpected ')'", *_position(text, m.start()))
            done, _ = stack.pop()
            (stack[-1][0] if stack else top).append(done)
            continue
        if m.group(5):
            raise UnbalancedParen("unterminated string", *_position(text, m.start()))
        if m.group(3) is not None:
            atom: SExpr = Str(re.sub(r"\\(.)", r"\1", m.group(3)))
        elif m.group(4):
            tok = m.group(4)
            atom = int(tok) if _INT.match(tok) else Sym(tok)
        else:
            continue
        (stack[-1][0] if stack else top).append(atom)
    if stack:
        raise UnbalancedParen("missing ')'", *_position(text, stack[-1][1]))
    return top


def format_sexpr(e: SExpr) -> str:
    if isinstance(e, list):
        return "(" + " ".join(format_sexpr(x) for x in e) + ")"
    return str(e)


def print_sexprs(forms: list) -> str:
    return "".join(format_sexpr(f) + "\n" for f in forms)

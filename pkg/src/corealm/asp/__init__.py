"""Grounding and stable-model solving for the programs produced by the compiler."""

from .bruteforce import TooLarge, brute_force
from .ground import GroundProgram, GroundRule, GroundingError, format_atom, ground, ground_text
from .solve import AnswerSet, ResourceLimit, Solver, consequences, projected, satisfiable, solve
from .syntax import (AspProgram, AspSyntaxError, Atom, BinOp, Choice, Cmp, Fn, Lit, Num, Rule,
                     Var, emit_text, parse_program, parse_rule)

__all__ = [
    "AnswerSet", "AspProgram", "AspSyntaxError", "Atom", "BinOp", "Choice", "Cmp", "Fn",
    "GroundProgram", "GroundRule", "GroundingError", "Lit", "Num", "ResourceLimit", "Rule",
    "Solver", "TooLarge", "Var", "brute_force", "consequences", "emit_text", "format_atom",
    "ground", "ground_text", "parse_program", "parse_rule", "projected", "satisfiable", "solve",
]

"""Temporal projection, planning and postdiction over compiled ALM programs."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import groupby

from .alm.model import AlmError, SystemDescription, flatten_all
from .asp.ground import ground
from .asp.solve import consequences, projected, solve
from .asp.syntax import (AspProgram, Atom, Choice, Cmp, Fn, Lit, Num, Rule, Var, format_value,
                         from_value, parse_program, value_key)
from .compile import compile_sd


class ReasoningError(AlmError):
    pass


class Inconsistent(ReasoningError):
    pass


class NoPlanWithinHorizon(ReasoningError):
    pass


class BadHistory(ReasoningError):
    pass


def _value(t):
    if isinstance(t, Num):
        return t.value
    if isinstance(t, Fn):
        if not t.args:
            return t.name
        return (t.name,) + tuple(_value(a) for a in t.args)
    raise BadHistory(f"non-ground term {t}")


@dataclass
class History:
    happened: list = field(default_factory=list)  # (action, step)
    observed: list = field(default_factory=list)  # (fluent, value, step)

    @classmethod
    def parse(cls, text: str) -> "History":
        try:
            prog = parse_program(text)
        except ValueError as e:
            raise BadHistory(str(e)) from None
        if prog.rules:
            raise BadHistory("histories contain only hpd/obs facts")
        h = cls()
        for a in prog.facts:
            vals = [_value(t) for t in a.args]
            if a.neg or a.pred not in ("hpd", "obs"):
                raise BadHistory(f"unexpected fact {a}")
            if a.pred == "hpd" and len(vals) == 2 and isinstance(vals[1], int):
                h.happened.append((vals[0], vals[1]))
            elif a.pred == "obs" and len(vals) == 3 and isinstance(vals[2], int):
                h.observed.append((vals[0], vals[1], vals[2]))
            else:
                raise BadHistory(f"malformed fact {a}")
        return h

    def text(self) -> str:
        lines = [f"hpd({format_value(a)}, {i})." for a, i in self.happened]
        lines += [f"obs({format_value(f)}, {format_value(v)}, {i})." for f, v, i in self.observed]
        return "".join(x + "\n" for x in lines)

    def current_step(self) -> int:
        steps = [i + 1 for _, i in self.happened] + [i for _, _, i in self.observed]
        return max(steps, default=0)

    def with_actions(self, plan) -> "History":
        return History(self.happened + [(a, i) for i, a in plan], list(self.observed))


@dataclass(frozen=True)
class Plan:
    steps: tuple  # ((step, action), ...)

    def __len__(self) -> int:
        return len(self.steps)

    def actions(self) -> list:
        return [a for _, a in self.steps]

    def __str__(self) -> str:
        return "[" + ", ".join(format_value(a) for a in self.actions()) + "]"


@dataclass
class Projection:
    horizon: int
    certain: dict  # (fluent, step) -> value in every answer set
    possible: dict  # (fluent, step) -> sorted list of values over all answer sets
    trajectories: list  # per enumerated answer set: {step: {fluent: value}}

    def value(self, fluent, step: int):
        return self.certain.get((fluent, step))


class _Kinds:
    def __init__(self, sd: SystemDescription):
        theory = flatten_all(sd.modules)
        self.fluents = {f.name: f for f in theory.functions if f.fluent}

    def decl(self, term):
        name = term if isinstance(term, str) else term[0]
        f = self.fluents.get(name)
        if f is None:
            raise BadHistory(f"{format_value(term)} is not a fluent")
        return f


def _goal_body(kinds: _Kinds, fluent, value, step: int) -> tuple:
    """Body of a constraint violated when ``fluent`` does not have ``value`` at ``step``."""
    f = kinds.decl(fluent)
    term = from_value(fluent)
    if f.boolean:
        if value not in ("true", "false"):
            raise BadHistory(f"{format_value(fluent)} is boolean")
        if value == "true":
            return (Lit(Atom("holds", (term, Num(step))), True),)
        return (Lit(Atom("holds", (term, Num(step)))),)
    return (Lit(Atom("val", (term, from_value(value), Num(step))), True),)


def history_program(sd: SystemDescription, prog: AspProgram, history: History) -> AspProgram:
    kinds = _Kinds(sd)
    h = prog.horizon
    actions = {_value(_const_term(c)) for c in prog.sorts.get("actions", ())}
    facts, rules = [], []
    for a, i in history.happened:
        if not 0 <= i < h:
            raise BadHistory(f"hpd({format_value(a)}, {i}) lies outside steps 0..{h - 1}")
        if a not in actions:
            raise BadHistory(f"{format_value(a)} is not an action instance")
        facts.append(Atom("hpd", (from_value(a), Num(i))))
    for f, v, i in history.observed:
        if not 0 <= i <= h:
            raise BadHistory(f"obs at step {i} lies outside 0..{h}")
        facts.append(Atom("obs", (from_value(f), from_value(v), Num(i))))
        rules.append(Rule(None, _goal_body(kinds, f, v, i)))
    A, I = Var("A"), Var("I")
    rules.insert(0, Rule(Atom("occurs", (A, I)), (Lit(Atom("hpd", (A, I))),)))
    return prog.extended(rules, facts)


def _const_term(c):
    return Fn(c.name, tuple(_const_term(a) for a in c.args))


def _fluent_values(atoms, kinds: _Kinds) -> dict:
    """(fluent, step) -> value from a set of ground atoms."""
    out = {}
    for a in atoms:
        if a[0] in ("holds", "-holds"):
            out[(a[1], a[2])] = "false" if a[0] == "-holds" else "true"
        elif a[0] == "val":
            out[(a[1], a[3])] = a[2]
    return out


def _state_atom(a) -> bool:
    return a[0] in ("holds", "-holds", "val")


def _trajectory(model, kinds: _Kinds, horizon: int) -> dict:
    vals = _fluent_values(model, kinds)
    traj: dict = {i: {} for i in range(horizon + 1)}
    for (f, i), v in vals.items():
        traj[i][f] = v
    for i in traj:
        traj[i] = dict(sorted(traj[i].items(), key=lambda kv: value_key(kv[0])))
    return traj


def project(sd: SystemDescription, history: History, horizon: int,
            max_models: int | None = 0) -> Projection:
    """Fluent values entailed (and possible) after the history.

    ``max_models`` bounds how many full trajectories are enumerated; values
    in ``certain``/``possible`` always account for every answer set.
    """
    kinds = _Kinds(sd)
    prog = history_program(sd, compile_sd(sd, horizon), history)
    gp = ground(prog)
    ids = [k for k, a in enumerate(gp.atoms) if _state_atom(a)]
    res = consequences(gp, ids)
    if res is None:
        raise Inconsistent("the history contradicts the system description")
    cautious, brave = res
    possible: dict = {}
    for k in brave:
        a = gp.atoms[k]
        for key, v in _fluent_values([a], kinds).items():
            possible.setdefault(key, set()).add(v)
    for k in ids:
        a = gp.atoms[k]
        if a[0] == "holds" and kinds.decl(a[1]).defined and k not in cautious:
            possible.setdefault((a[1], a[2]), set()).add("false")
    possible = {key: sorted(vs, key=value_key) for key, vs in possible.items()}
    certain = {key: vs[0] for key, vs in possible.items() if len(vs) == 1}
    trajectories = []
    if max_models != 0:
        trajectories = [_trajectory(m, kinds, horizon) for m in solve(gp, max_models)]
    order = lambda kv: (kv[0][1], value_key(kv[0][0]))  # noqa: E731
    return Projection(horizon, dict(sorted(certain.items(), key=order)),
                      dict(sorted(possible.items(), key=order)), trajectories)


def _goal_holds(sd: SystemDescription, history: History, goal, horizon: int) -> bool:
    """Does the goal hold at ``horizon`` in every answer set of the replay?"""
    try:
        p = project(sd, history, horizon)
    except Inconsistent:
        return False
    return all(p.certain.get((f, horizon)) == v for f, v in goal)


def planning_rules(n: int) -> list[Rule]:
    """At most one action per step from ``n`` on; nothing unrecorded before ``n``."""
    A, I = Var("A"), Var("I")
    return [
        Rule(Choice(0, 1, ((Atom("occurs", (A, I)), (Lit(Atom("action", (A,))),)),)),
             (Lit(Atom("step", (I,))), Cmp(">=", I, Num(n)))),
        Rule(None, (Lit(Atom("occurs", (A, I))), Cmp("<", I, Num(n)),
                    Lit(Atom("hpd", (A, I)), True))),
    ]


def plan(sd: SystemDescription, history: History, goal, max_horizon: int) -> list[Plan]:
    """All shortest sequential plans achieving ``goal``.

    ``goal`` is a list of (fluent, value).  Plans start at the step after the
    last recorded event or observation; candidates come from answer sets and
    are kept only if the goal holds in every answer set of their replay.
    """
    kinds = _Kinds(sd)
    for f, v in goal:
        _goal_body(kinds, f, v, 0)
    n = history.current_step()
    for h in range(max_horizon + 1):
        horizon = n + h
        prog = history_program(sd, compile_sd(sd, horizon), history)
        extra = planning_rules(n)
        extra += [Rule(None, _goal_body(kinds, f, v, horizon)) for f, v in goal]
        gp = ground(prog.extended(extra))
        ids = [k for k, a in enumerate(gp.atoms) if a[0] == "occurs" and a[2] >= n]
        found = []
        for proj in projected(gp, ids):
            steps = tuple(sorted(((a[2], a[1]) for a in proj),
                                 key=lambda s: (s[0], value_key(s[1]))))
            if _goal_holds(sd, history.with_actions(steps), goal, horizon):
                found.append(Plan(steps))
        if found:
            found.sort(key=lambda p: [(value_key(a), i) for i, a in p.steps])
            return found
    raise NoPlanWithinHorizon(f"no plan of length at most {max_horizon}")


def postdict(sd: SystemDescription, history: History, horizon: int,
             fluents=None) -> list[dict]:
    """Initial-state completions consistent with the history.

    By default the completions range over the fluents observed at some
    later step but not at step 0; ``fluents`` selects them explicitly.
    """
    kinds = _Kinds(sd)
    if fluents is None:
        at0 = {f for f, _, i in history.observed if i == 0}
        fluents = [f for f, _, i in history.observed if i > 0 and f not in at0]
    fluents = sorted(set(fluents), key=value_key)
    for f in fluents:
        kinds.decl(f)
    prog = history_program(sd, compile_sd(sd, horizon), history)
    gp = ground(prog)
    wanted = set(fluents)
    ids = [k for k, a in enumerate(gp.atoms)
           if _state_atom(a) and a[1] in wanted and a[-1] == 0]
    models = projected(gp, ids)
    if not models:
        raise Inconsistent("the history contradicts the system description")
    out = []
    for m in models:
        vals = {f: v for (f, _), v in _fluent_values(m, kinds).items()}
        for f in fluents:
            if kinds.decl(f).defined:
                vals.setdefault(f, "false")
        out.append(dict(sorted(vals.items(), key=lambda kv: value_key(kv[0]))))
    out.sort(key=lambda d: [(value_key(k), value_key(v)) for k, v in d.items()])
    return [k for k, _ in groupby(out)]


def parse_goal(text: str) -> list:
    """``f(a)=v, g=w`` -> [(f(a), v), (g, w)]."""
    goal = []
    for part in _split_top(text):
        if "=" not in part:
            raise BadHistory(f"goal item {part!r} lacks '='")
        lhs, rhs = part.rsplit("=", 1)
        try:
            f = _value(parse_program(f"g({lhs.strip()}, {rhs.strip()}).").facts[0].args[0])
            v = _value(parse_program(f"g({rhs.strip()}).").facts[0].args[0])
        except (ValueError, IndexError) as e:
            raise BadHistory(f"bad goal item {part!r}: {e}") from None
        goal.append((f, v))
    return goal


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    parts.append(cur)
    return [p.strip() for p in parts if p.strip()]

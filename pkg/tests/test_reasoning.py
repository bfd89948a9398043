import pytest

from corealm.alm.parser import parse_system_description
from corealm.asp.syntax import emit_text, AspProgram
from corealm.reasoning import (BadHistory, History, Inconsistent, NoPlanWithinHorizon, Plan,
                               parse_goal, plan, planning_rules, postdict, project)

from conftest import GOLDEN, TESTS, load_history
from oracles import wrestler_fluents, wrestler_initial_states, wrestler_restrain

RESTRAINED = ("is_restrained", "opponent")


def oracle_possible(history_obs: list, steps: list) -> dict:
    """Values of every fluent after applying ``steps`` to consistent initial states."""
    out: dict = {}
    for s in wrestler_initial_states():
        if any(s[f] != (v == "true") for f, v, i in history_obs if i == 0):
            continue
        trail = [s]
        for agent, obj in steps:
            trail.append(wrestler_restrain(trail[-1], agent, obj))
        if any(trail[i][f] != (v == "true") for f, v, i in history_obs):
            continue
        for i, st in enumerate(trail):
            for f in wrestler_fluents():
                out.setdefault((f, i), set()).add("true" if st[f] else "false")
    return out


def test_projection_restrains_opponent(wrestler):
    p = project(wrestler, load_history("wrestler.hist"), 1)
    assert p.value(RESTRAINED, 1) == "true"
    assert p.value(("is_restrained", "wrestler"), 1) == "false"
    assert p.value(("restrained_by", "opponent", "wrestler"), 1) == "true"


def test_projection_matches_simulation(wrestler):
    obs = [(RESTRAINED, "false", 0), (("is_restrained", "wrestler"), "false", 0)]
    want = oracle_possible(obs, [("wrestler", "opponent")])
    p = project(wrestler, load_history("wrestler.hist"), 1)
    got = {(f, i): set(vs) for (f, i), vs in p.possible.items()}
    assert got == want


def test_contradicting_observation(wrestler):
    h = load_history("wrestler.hist")
    h.observed.append((RESTRAINED, "false", 1))
    with pytest.raises(Inconsistent):
        project(wrestler, h, 1)


def test_empty_history_leaves_everything_open(wrestler):
    p = project(wrestler, History(), 0)
    assert p.certain == {}
    assert set(p.possible[(RESTRAINED, 0)]) == {"false", "true"}


def test_trajectories_are_bounded(wrestler):
    p = project(wrestler, load_history("wrestler.hist"), 1, max_models=3)
    assert len(p.trajectories) == 3
    assert all(t[1][RESTRAINED] == "true" for t in p.trajectories)


def test_plans_to_free_opponent(wrestler_ext):
    goal = [(RESTRAINED, "false")]
    plans = plan(wrestler_ext, load_history("wrestler.hist"), goal, 2)
    assert [str(p) for p in plans] == ["[u(opponent,opponent)]", "[u(wrestler,opponent)]"]
    assert all(p.steps[0][0] == 1 for p in plans)


def test_goal_already_true_gives_empty_plan(wrestler_ext):
    plans = plan(wrestler_ext, load_history("wrestler.hist"), [(RESTRAINED, "true")], 2)
    assert plans == [Plan(())]


def test_unreachable_goal(wrestler):
    with pytest.raises(NoPlanWithinHorizon):
        plan(wrestler, load_history("wrestler.hist"), [(RESTRAINED, "false")], 1)


def test_planning_rules_golden():
    prog = AspProgram(rules=planning_rules(1))
    assert emit_text(prog) == (GOLDEN / "plan_choice.lp").read_text()


def test_postdiction_both_completions(wrestler):
    got = postdict(wrestler, load_history("wrestler_late.hist"), 1)
    want = oracle_possible([(RESTRAINED, "true", 1)], [("wrestler", "opponent")])
    assert [c[RESTRAINED] for c in got] == sorted(want[(RESTRAINED, 0)])


def test_postdiction_fully_observed(wrestler):
    h = load_history("wrestler_late.hist")
    h.observed.append((RESTRAINED, "false", 0))
    assert postdict(wrestler, h, 1, [RESTRAINED]) == [{RESTRAINED: "false"}]


def test_postdiction_contradiction(wrestler):
    h = load_history("wrestler_late.hist")
    h.observed.append((RESTRAINED, "false", 1))
    with pytest.raises(Inconsistent):
        postdict(wrestler, h, 1)


def test_postdiction_on_tiny_domain():
    sd = parse_system_description((TESTS / "fixtures" / "alm" / "mini_r.alm").read_text())
    h = History.parse("hpd(r, 0). obs(restrained(a), true, 1).")
    assert postdict(sd, h, 1) == [{("restrained", "a"): "false"},
                                  {("restrained", "a"): "true"}]


def test_history_round_trip():
    h = History.parse((TESTS.parent / "walkthroughs" / "wrestler.hist").read_text())
    assert History.parse(h.text()) == h
    assert h.current_step() == 1


@pytest.mark.parametrize("text", ["hpd(r).", "obs(f, true).", "p(1).", "hpd(r, 0) :- q.",
                                  "hpd(r, 0"])
def test_bad_history(text):
    with pytest.raises(BadHistory):
        History.parse(text)


def test_history_with_unknown_action(wrestler):
    with pytest.raises(BadHistory):
        project(wrestler, History.parse("hpd(nobody, 0)."), 1)


def test_parse_goal():
    assert parse_goal("is_at(a, b) = true, loc = x") == [(("is_at", "a", "b"), "true"),
                                                        ("loc", "x")]
    with pytest.raises(BadHistory):
        parse_goal("is_at(a)")

import pytest

from khow import (BeliefState, KhowError, belief_state, belief_states_bisimilar, bisimilar,
                  distinguishing_formula, largest_bisimulation, parse_model)
from khow.bisim import _labels, _succ, block_separator
from khow.eal import Evaluator
from khow.harness import ModelParams, goal_battery, random_pr_model
from khow.planner import Checker
from khow.syntax import Fragment, Know, fragment_of, parse_formula, print_formula
from oracles import naive_bisimulation

TWINS = "agents: 1\nactions[1]: a\nstates: x y\nobs[1]: { x y }\nval[x]: p\nval[y]: p\n"
DUPES = """agents: 1
actions[1]: a
states: u v w
trans: u -a-> w
trans: v -a-> w
val[u]: p
val[v]: p
"""


def corpus():
    """Random models with few propositions, so that bisimilar pairs actually occur."""
    out = []
    for seed in range(120):
        params = ModelParams(n_states=1 + seed % 6, n_agents=1 + seed % 2,
                             n_props=seed % 3, density=0.25)
        out.append(random_pr_model(params, seed))
    return out


CORPUS = corpus()


def same_class(bp):
    return {(s, t) for c in bp.classes for s in c for t in c}


def test_clinic_all_distinct(clinic):
    bp = largest_bisimulation(clinic)
    assert len(bp.classes) == 6
    assert bisimilar(clinic, "s1", "s1")
    assert not bisimilar(clinic, "s5", "s6")
    assert not bisimilar(clinic, "s3", "s4")


def test_twins_collapse():
    m = parse_model(TWINS)
    assert largest_bisimulation(m).classes == (frozenset({"x", "y"}),)
    assert distinguishing_formula(m, "x", "y") is None


def test_duplicate_singletons_are_bisimilar_blocks():
    m = parse_model(DUPES)
    assert bisimilar(m, "u", "v")
    assert belief_states_bisimilar(m, belief_state(m, "u", "1"), belief_state(m, "v", "1"))
    assert not belief_states_bisimilar(m, belief_state(m, "u", "1"), belief_state(m, "w", "1"))


def test_belief_state_examples(clinic):
    b = belief_state(clinic, "s1", "1")
    assert belief_states_bisimilar(clinic, b, b)
    assert not belief_states_bisimilar(clinic, belief_state(clinic, "s3", "2"),
                                       belief_state(clinic, "s4", "2"))
    with pytest.raises(KhowError):
        belief_states_bisimilar(clinic, b, belief_state(clinic, "s1", "2"))


def test_agrees_with_pairwise_fixpoint():
    merged = 0
    for m in CORPUS:
        bp = largest_bisimulation(m)
        z = naive_bisimulation(m)
        assert same_class(bp) == z
        merged += len(m.states) - len(bp.classes)
    assert merged > 20  # the corpus exercises non-trivial classes


def test_partition_is_stable():
    for m in CORPUS:
        bp = largest_bisimulation(m)
        cls = bp.history[-1]
        for c in bp.classes:
            for label in _labels(m):
                sigs = {frozenset(cls[t] for t in _succ(m, label, s)) for s in c}
                assert len(sigs) == 1
            assert len({m.valuation[s] for s in c}) == 1


def test_distinguishing_examples(clinic):
    ev = Evaluator(clinic)
    f = distinguishing_formula(clinic, "s5", "s6")
    assert print_formula(f) == "~p"
    f = distinguishing_formula(clinic, "s1", "s2")
    assert ev.extension(f) == ev.extension(parse_formula("~q"))
    f = distinguishing_formula(clinic, "s1", "s3")
    assert "s1" in ev.extension(f) and "s3" not in ev.extension(f)


def test_distinguishing_formulas_are_sound():
    pairs = 0
    for m in CORPUS:
        ev = Evaluator(m)
        for s in m.states:
            for t in m.states:
                f = distinguishing_formula(m, s, t)
                if f is None:
                    assert bisimilar(m, s, t)
                    continue
                pairs += 1
                assert fragment_of(f) in (Fragment.EAL, Fragment.BOTH)
                ext = ev.extension(f)
                assert s in ext and t not in ext
    assert pairs > 500


def test_block_separators_split_blocks():
    checked = 0
    for m in CORPUS:
        ev = Evaluator(m)
        for i in m.agents:
            blocks = [BeliefState(i, b) for b in m.epistemic[i]]
            for b in blocks:
                for c in blocks:
                    if belief_states_bisimilar(m, b, c):
                        continue
                    ext = ev.extension(Know(i, block_separator(m, b, c)))
                    assert b.block <= ext and not (c.block & ext)
                    checked += 1
    assert checked > 100


def test_know_how_invariant_under_bisimulation():
    for n, m in enumerate(CORPUS):
        ch = Checker(m)
        bp = largest_bisimulation(m)
        for goal in goal_battery(m, n, size=8):
            ext = ch.extension(goal)
            for c in bp.classes:
                assert c <= ext or not (c & ext)


def test_unknown_state(clinic):
    with pytest.raises(KhowError):
        bisimilar(clinic, "s1", "nope")

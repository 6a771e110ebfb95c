import pytest
from hypothesis import given, settings, strategies as st

from khow.errors import ParseError, PlanError
from khow.syntax import (Act, And, Box, Branch, Diamond, Fragment, Imp, Know, KnowHow, Not, Or,
                         Prop, Seq, Skip, Top, bot, conj, disj, fragment_of, modal_depth, neg,
                         parse_formula, parse_plan, plan_actions, plan_depth, power, print_formula,
                         print_plan, seq)

p, q, r = Prop("p"), Prop("q"), Prop("r")

EXAMPLE_ONE = "~Kh{1}~p & ~Kh{2}~p & Kh{1}((K{2}q | K{2}~q) & Kh{2}~p)"
EXAMPLE_ONE_AST = And(
    And(Not(KnowHow("1", Not(p))), Not(KnowHow("2", Not(p)))),
    KnowHow("1", And(Or(Know("2", q), Know("2", Not(q))), KnowHow("2", Not(p)))))


def test_example_one_ast():
    assert parse_formula(EXAMPLE_ONE) == EXAMPLE_ONE_AST
    assert parse_formula(print_formula(EXAMPLE_ONE_AST)) == EXAMPLE_ONE_AST


def test_condition_with_nested_modalities():
    assert parse_formula("K{i}~K{j}[b]p") == Know("i", Not(Know("j", Box("b", p))))


@pytest.mark.parametrize("text, ast", [
    ("top", Top()),
    ("bot", Not(Top())),
    ("p & q | r", Or(And(p, q), r)),
    ("p | q & r", Or(p, And(q, r))),
    ("p -> q -> r", Imp(p, Imp(q, r))),
    ("p & q & r", And(And(p, q), r)),
    ("~p & q", And(Not(p), q)),
    ("K{1}p & q", And(Know("1", p), q)),
    ("<a>p | [b]q", Or(Diamond("a", p), Box("b", q))),
    ("¬p ∧ q ∨ ⊥ → ⊤", Imp(Or(And(Not(p), q), Not(Top())), Top())),
    ("  ( p )  ", p),
])
def test_parse(text, ast):
    assert parse_formula(text) == ast


@pytest.mark.parametrize("ast, text", [
    (Top(), "top"),
    (And(p, Or(q, r)), "p & (q | r)"),
    (Or(And(p, q), r), "p & q | r"),
    (Imp(Imp(p, q), r), "(p -> q) -> r"),
    (Imp(p, Imp(q, r)), "p -> q -> r"),
    (Not(And(p, q)), "~(p & q)"),
    (Know("1", Not(p)), "K{1}~p"),
    (KnowHow("2", Or(p, q)), "Kh{2}(p | q)"),
])
def test_print(ast, text):
    assert print_formula(ast) == text


@pytest.mark.parametrize("text", ["", "p &", "(p", "K{} p", "K{1 p", "p q", "[a p", "p $ q",
                                  "then", "~", "p -> "])
def test_formula_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_error_carries_position():
    with pytest.raises(ParseError) as info:
        parse_formula("p & $")
    assert info.value.pos == 4


def test_plans():
    assert parse_plan("a") == Act("a")
    assert parse_plan("skip") == Skip()
    joint = parse_plan("a ; if K{2} q then { c } else { b }")
    assert joint == Seq(Act("a"), Branch("2", Know("2", q), Act("c"), Act("b")))
    assert print_plan(joint) == "a ; if K{2} q then { c } else { b }"
    assert parse_plan("a ; b ; c") == Seq(Seq(Act("a"), Act("b")), Act("c"))
    assert print_plan(Seq(Act("a"), Seq(Act("b"), Act("c")))) == "a ; (b ; c)"


@pytest.mark.parametrize("text", ["if Kh{1} p then { a } else { skip }",
                                  "if K{1} Kh{1} p then { a } else { skip }",
                                  "if p then { a } else { b }",
                                  "if K{1} p then a else b",
                                  "a ;", "skip skip"])
def test_plan_syntax_errors(text):
    with pytest.raises(ParseError):
        parse_plan(text)


def test_branch_condition_invariants():
    with pytest.raises(PlanError):
        Branch("1", Know("2", p), Skip(), Skip())
    with pytest.raises(PlanError):
        Branch("1", p, Skip(), Skip())
    with pytest.raises(PlanError):
        Branch("1", Know("1", KnowHow("1", p)), Skip(), Skip())


def test_plan_helpers():
    assert power(Act("a"), 0) == Skip()
    assert power(Act("a"), 3) == Seq(Seq(Act("a"), Act("a")), Act("a"))
    assert seq(Skip(), Act("a"), Skip()) == Act("a")
    assert seq() == Skip()
    plan = parse_plan("a ; if K{1} p then { b ; c } else { skip }")
    assert plan_actions(plan) == {"a", "b", "c"}
    assert plan_depth(Act("a")) == 1
    assert plan_depth(plan) > plan_depth(Act("a"))


def test_formula_helpers():
    assert conj([]) == Top()
    assert disj([]) == bot()
    assert conj([p, q, p]) == And(p, q)
    assert disj([p]) == p
    assert neg(Not(p)) == p
    assert neg(p) == Not(p)
    assert modal_depth(EXAMPLE_ONE_AST) == 2
    assert modal_depth(Imp(p, Know("1", Box("a", q)))) == 2


@pytest.mark.parametrize("text, frag", [
    ("K{1}p", Fragment.BOTH),
    ("top", Fragment.BOTH),
    ("[a]p", Fragment.EAL),
    ("<a>K{1}p", Fragment.EAL),
    ("Kh{1}p", Fragment.ELKH),
    ("Kh{1}[a]p", Fragment.NEITHER),
    ("Kh{1}p & <a>q", Fragment.NEITHER),
])
def test_fragment_of(text, frag):
    assert fragment_of(parse_formula(text)) == frag


# -- structural fuzzer --------------------------------------------------------------

names = st.sampled_from(["p", "q", "r1", "x_2"])
agents = st.sampled_from(["1", "2", "alice"])
actions = st.sampled_from(["a", "b", "go"])


def formulas(kh=True, max_leaves=40):
    leaf = st.one_of(st.just(Top()), names.map(Prop))

    def grow(sub):
        options = [
            sub.map(Not),
            st.builds(And, sub, sub), st.builds(Or, sub, sub), st.builds(Imp, sub, sub),
            st.builds(Know, agents, sub),
            st.builds(Box, actions, sub), st.builds(Diamond, actions, sub),
        ]
        if kh:
            options.append(st.builds(KnowHow, agents, sub))
        return st.one_of(*options)

    return st.recursive(leaf, grow, max_leaves=max_leaves)


def _branch(agent, body, then, orelse):
    return Branch(agent, Know(agent, body), then, orelse)


plans = st.recursive(
    st.one_of(st.just(Skip()), actions.map(Act)),
    lambda sub: st.one_of(st.builds(Seq, sub, sub),
                          st.builds(_branch, agents, formulas(kh=False, max_leaves=6), sub, sub)),
    max_leaves=12)


@settings(max_examples=400, deadline=None)
@given(formulas().filter(lambda f: modal_depth(f) <= 8))
def test_formula_round_trip(f):
    text = print_formula(f)
    assert parse_formula(text) == f
    assert print_formula(parse_formula(text)) == text


@settings(max_examples=300, deadline=None)
@given(plans)
def test_plan_round_trip(plan):
    assert parse_plan(print_plan(plan)) == plan

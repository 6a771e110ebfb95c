"""Brute-force oracle, random perfect-recall models and the axiom battery.

The oracle decides ``Kh`` by enumerating every partial policy on the belief
quotient and exploring the executions each one induces.  It shares no code
with the preimage fixpoint in :mod:`khow.planner`; it builds its own
quotient, and nested ``Kh`` subformulas go through the oracle again.
"""

from __future__ import annotations

import itertools
import math
import os
import random
import string
from dataclasses import dataclass

from .eal import Evaluator
from .errors import BudgetExceededError, NotPerfectRecallError
from .model import Model, check_perfect_recall, is_perfect_recall
from .planner import Checker
from .syntax import (Act, And, Box, Branch, Formula, Imp, Know, KnowHow, Not, Or, Plan, Prop,
                     Seq, Skip, Top, bot, print_formula)

DEFAULT_BUDGET = 10**6


def budget_from_env(default=DEFAULT_BUDGET) -> int:
    raw = os.environ.get("KHOW_BUDGET")
    return int(raw) if raw else default


# -- brute-force oracle ----------------------------------------------------------

class Oracle(Evaluator):
    def __init__(self, model: Model, budget: int):
        super().__init__(model)
        self.budget = budget

    def know_how(self, i, body) -> frozenset:
        m = self.model
        m.require_agent(i)
        blocks = list(m.epistemic[i])
        inner = self.extension(body)
        goal = {n for n, b in enumerate(blocks) if b <= inner}
        where = {s: n for n, b in enumerate(blocks) for s in b}
        enabled = []
        for b in blocks:
            opts = {}
            for a in m.actions_of[i]:
                if all(m._succ[a][s] for s in b):
                    opts[a] = frozenset(where[t] for s in b for t in m._succ[a][s])
            enabled.append(opts)
        size = math.prod(len(o) + 1 for o in enabled)
        if size > self.budget:
            raise BudgetExceededError(f"{size} policies exceed the budget of {self.budget}")

        winners = set()
        # None = block left outside the policy's domain
        for policy in itertools.product(*[[None, *o] for o in enabled]):
            winners |= _strong_from(policy, enabled, goal)
            if len(winners) == len(blocks):
                break
        return frozenset().union(*(blocks[n] for n in winners)) if winners else frozenset()


def _strong_from(policy, enabled, goal) -> set:
    """Blocks from which every complete trace under ``policy`` is finite and ends in goal."""
    verdict = {}

    def good(v, path):
        if v in verdict:
            return verdict[v]
        a = policy[v]
        if a is None:
            verdict[v] = v in goal
            return verdict[v]
        if v in path:
            return False  # a reachable cycle gives an infinite trace
        path.add(v)
        ok = all(good(w, path) for w in enabled[v][a])
        path.discard(v)
        verdict[v] = ok
        return ok

    return {v for v in range(len(policy)) if good(v, set())}


def brute_force_extension(m: Model, f: Formula, budget=None) -> frozenset:
    if not is_perfect_recall(m):
        raise NotPerfectRecallError("the oracle only runs on perfect-recall models")
    return Oracle(m, budget or budget_from_env()).extension(f)


def brute_force_kh(m: Model, i, s, body: Formula, budget=None) -> bool:
    m.index(s)
    return s in brute_force_extension(m, KnowHow(i, body), budget)


# -- random models -------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    n_states: int = 5
    n_agents: int = 2
    max_actions: int = 2
    density: float = 0.3
    n_props: int = 2


def repair_perfect_recall(m: Model, rng: random.Random) -> Model:
    """Add transitions until every perfect-recall obligation is met."""
    trans = {a: set(p) for a, p in m.transitions.items()}
    while True:
        cur = Model(m.states, m.agents, m.actions_of, m.epistemic, trans, m.valuation)
        report = check_perfect_recall(cur)
        if report.ok:
            return cur
        for v in report.violations:
            i, a, s1, _, s4 = v.witness
            s3 = rng.choice(cur.ordered(cur.block(s1, i)))
            trans[a].add((s3, s4))


def random_pr_model(params: ModelParams = ModelParams(), seed=0) -> Model:
    rng = random.Random(seed)
    states = [f"s{n}" for n in range(params.n_states)]
    agents = [str(n + 1) for n in range(params.n_agents)]
    names = iter(string.ascii_lowercase[:15])
    actions_of = {}
    for i in agents:
        k = rng.randint(1, params.max_actions) if params.max_actions else 0
        actions_of[i] = [next(names) for _ in range(k)]
    obs = {}
    for i in agents:
        n_blocks = rng.randint(1, params.n_states)
        cells = {}
        for s in states:
            cells.setdefault(rng.randrange(n_blocks), []).append(s)
        obs[i] = list(cells.values())
    trans = {}
    for a in [a for i in agents for a in actions_of[i]]:
        trans[a] = {(s, t) for s in states for t in states if rng.random() < params.density}
    props = ["p", "q", "r", "u", "v"][: params.n_props]
    val = {s: [p for p in props if rng.random() < 0.5] for s in states}
    base = Model(states, agents, actions_of, obs, trans, val)
    return repair_perfect_recall(base, rng)


def chain_model(n: int) -> Model:
    """Single-agent chain of ``n`` states in blocks of two, with actions ``a``, ``b``.

    ``a`` steps from block ``k`` to every state of block ``k + 1``; ``b`` jumps
    to block ``k + 2`` or back to block 0.  ``p`` holds on the last block only.
    """
    states = [f"s{k}" for k in range(n)]
    blocks = [states[k:k + 2] for k in range(0, n, 2)]
    trans = {"a": set(), "b": set()}
    for k, blk in enumerate(blocks):
        for s in blk:
            if k + 1 < len(blocks):
                trans["a"].update((s, t) for t in blocks[k + 1])
            if k + 2 < len(blocks):
                trans["b"].update((s, t) for t in blocks[k + 2])
                trans["b"].update((s, t) for t in blocks[0])
    val = {s: ["p"] for s in blocks[-1]}
    return Model(states, ["1"], {"1": ["a", "b"]}, {"1": blocks}, trans, val)


# -- random formulas and plans -----------------------------------------------------

def random_formula(rng: random.Random, props, agents, depth: int, kh=True, actions=()) -> Formula:
    """Random formula of modal depth at most ``depth``.

    With ``kh`` the result is in the know-how language, otherwise in the
    epistemic action language (``actions`` feed the box modality).
    """
    leaves = [Top(), *(Prop(p) for p in props)]
    if depth == 0 or rng.random() < 0.25:
        f = rng.choice(leaves)
        return Not(f) if rng.random() < 0.3 else f
    kinds = ["not", "and", "or", "K"] + (["Kh", "Kh"] if kh else (["box"] if actions else []))
    kind = rng.choice(kinds)
    sub = lambda d: random_formula(rng, props, agents, d, kh, actions)  # noqa: E731
    if kind == "not":
        return Not(sub(depth))
    if kind == "and":
        return And(sub(depth), sub(depth - 1))
    if kind == "or":
        return Or(sub(depth - 1), sub(depth))
    if kind == "K":
        return Know(rng.choice(agents), sub(depth - 1))
    if kind == "box":
        return Box(rng.choice(actions), sub(depth - 1))
    return KnowHow(rng.choice(agents), sub(depth - 1))


def random_plan(rng: random.Random, m: Model, agent, depth: int) -> Plan:
    """Random plan for ``agent`` with nesting depth at most ``depth``."""
    acts = m.actions_of[agent]
    if depth <= 1 or rng.random() < 0.3:
        if not acts or rng.random() < 0.15:
            return Skip()
        return Act(rng.choice(acts))
    if rng.random() < 0.6:
        return Seq(random_plan(rng, m, agent, depth - 1), random_plan(rng, m, agent, depth - 1))
    cond = random_formula(rng, m.props or ("p",), m.agents, 1, kh=False, actions=m.actions)
    return Branch(agent, Know(agent, cond), random_plan(rng, m, agent, depth - 1),
                  random_plan(rng, m, agent, depth - 1))


def goal_battery(m: Model, seed=0, size=12, depth=3) -> list[Formula]:
    """Kh goals over ``m``'s vocabulary, each of modal depth at most ``depth``."""
    rng = random.Random(seed)
    props = list(m.props) or ["p"]
    out = [KnowHow(i, f) for i in m.agents for f in (Top(), bot(), Prop(props[0]))]
    while len(out) < size:
        body = random_formula(rng, props, m.agents, depth - 1)
        out.append(KnowHow(rng.choice(m.agents), body))
    return out


# -- axiom battery -----------------------------------------------------------------

def instantiation_battery(m: Model) -> list[Formula]:
    """Propositions, negations, ``top``/``bot`` and depth-1 ``K``/``Kh`` compounds."""
    props = list(m.props) or ["p"]
    lits = [Prop(p) for p in props] + [Not(Prop(p)) for p in props]
    base = [Top(), bot(), *lits]
    compound = [op(i, x) for i in m.agents for x in lits for op in (Know, KnowHow)]
    return base + compound


def axiom_instances(agents, battery):
    """Yield ``(name, agent, formula)`` for every schema instance."""
    for i in agents:
        K = lambda f: Know(i, f)  # noqa: E731
        Kh = lambda f: KnowHow(i, f)  # noqa: E731
        yield "AxKhbot", i, Not(Kh(bot()))
        for p in battery:
            yield "T", i, Imp(K(p), p)
            yield "4", i, Imp(K(p), K(K(p)))
            yield "5", i, Imp(Not(K(p)), K(Not(K(p))))
            yield "AxKtoKh", i, Imp(K(p), Kh(p))
            yield "AxKhtoKhK", i, Imp(Kh(p), Kh(K(p)))
            yield "AxKhtoKKh", i, Imp(Kh(p), K(Kh(p)))
            yield "AxKhKh", i, Imp(Kh(Kh(p)), Kh(p))
        for p, q in itertools.product(battery, repeat=2):
            yield "DISTK", i, Imp(And(K(p), K(Imp(p, q))), K(q))
            yield "KhOrKh", i, Imp(Kh(Or(p, Kh(q))), Kh(Or(p, q)))


@dataclass(frozen=True)
class AxiomReport:
    checked: int
    counterexamples: tuple  # (schema, agent, instance text, state)

    @property
    def ok(self) -> bool:
        return not self.counterexamples


def axiom_suite(m: Model, battery=None) -> AxiomReport:
    if not is_perfect_recall(m):
        raise NotPerfectRecallError("axiom suite runs on perfect-recall models only")
    battery = instantiation_battery(m) if battery is None else battery
    checker = Checker(m)
    everything = frozenset(m.states)
    bad = []
    n = 0
    for name, i, f in axiom_instances(m.agents, battery):
        n += 1
        missing = everything - checker.extension(f)
        if missing:
            bad.append((name, i, print_formula(f), m.ordered(missing)[0]))
    return AxiomReport(n, tuple(bad))


# -- invalidity search --------------------------------------------------------------

def find_conjunction_counterexample(seed=0, tries=2000, params=ModelParams(n_states=4,
                                                                            n_agents=1)):
    """Search for a model where ``Kh phi & Kh psi`` holds but ``Kh (phi & psi)`` fails.

    The brute-force oracle is the judge.  Returns ``(model, agent, phi, psi,
    state)`` or ``None``.
    """
    rng = random.Random(seed)
    for n in range(tries):
        m = random_pr_model(params, seed=rng.randrange(2**32))
        lits = [Prop(p) for p in m.props] + [Not(Prop(p)) for p in m.props]
        oracle = Oracle(m, DEFAULT_BUDGET)
        for i in m.agents:
            for phi, psi in itertools.combinations(lits, 2):
                both = oracle.extension(KnowHow(i, phi)) & oracle.extension(KnowHow(i, psi))
                bad = both - oracle.extension(KnowHow(i, And(phi, psi)))
                if bad:
                    return m, i, phi, psi, m.ordered(bad)[0]
    return None

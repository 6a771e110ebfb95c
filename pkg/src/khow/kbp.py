"""Knowledge-based plans: execution, strong executability, execution trees."""

from __future__ import annotations

from dataclasses import dataclass

from .bisim import belief_states_bisimilar, block_separator, make_distinguisher
from .eal import Evaluator
from .errors import PlanError, UnknownIdentifierError
from .model import BeliefState, Model, ValidationReport, Violation
from .syntax import (Act, Box, Branch, Diamond, Know, Plan, Seq, Skip, conj, seq,
                     subformulas)


def check_plan(m: Model, plan: Plan, agent=None):
    """Raise :class:`PlanError` unless ``plan`` can run on ``m``.

    With ``agent`` given, also require membership in that agent's plan
    language: its own actions only, and branch conditions on its own knowledge.
    """
    if agent is not None:
        m.require_agent(agent)
    match plan:
        case Skip():
            pass
        case Act(a):
            if a not in m._succ:
                raise PlanError(f"unknown action {a!r}")
            if agent is not None and a not in m.actions_of[agent]:
                raise PlanError(f"action {a!r} does not belong to agent {agent}")
        case Seq(p, q):
            check_plan(m, p, agent)
            check_plan(m, q, agent)
        case Branch(i, cond, p, q):
            if agent is not None and i != agent:
                raise PlanError(f"condition K{{{i}}} in a plan for agent {agent}")
            for g in subformulas(cond):
                try:
                    match g:
                        case Know(j, _):
                            m.require_agent(j)
                        case Box(a, _) | Diamond(a, _):
                            m.require_action(a)
                except UnknownIdentifierError as exc:
                    raise PlanError(str(exc)) from None
            check_plan(m, p, agent)
            check_plan(m, q, agent)
        case _:
            raise PlanError(f"not a plan: {plan!r}")


class _Runner:
    def __init__(self, m: Model):
        self.m = m
        self.ev = Evaluator(m)

    def test(self, cond, s) -> bool:
        return s in self.ev.extension(cond)

    def run(self, plan: Plan, s) -> frozenset:
        match plan:
            case Skip():
                return frozenset([s])
            case Act(a):
                return self.m._succ[a][s]
            case Seq(p, q):
                out = set()
                for t in self.run(p, s):
                    out |= self.run(q, t)
                return frozenset(out)
            case Branch(_, cond, p, q):
                return self.run(p if self.test(cond, s) else q, s)
        raise PlanError(f"not a plan: {plan!r}")

    def strong(self, plan: Plan, s) -> bool:
        match plan:
            case Skip():
                return True
            case Act(a):
                return bool(self.m._succ[a][s])
            case Seq(p, q):
                return self.strong(p, s) and all(self.strong(q, t) for t in self.run(p, s))
            case Branch(_, cond, p, q):
                return self.strong(p if self.test(cond, s) else q, s)
        raise PlanError(f"not a plan: {plan!r}")


def execute_plan(m: Model, plan: Plan, s) -> frozenset:
    """States on which running ``plan`` from ``s`` can terminate (possibly none)."""
    m.index(s)
    check_plan(m, plan)
    return _Runner(m).run(plan, s)


def execute_on_belief_state(m: Model, plan: Plan, b: BeliefState | frozenset) -> frozenset:
    check_plan(m, plan)
    runner = _Runner(m)
    out = set()
    for s in b:
        out |= runner.run(plan, s)
    return frozenset(out)


def strongly_executable(m: Model, plan: Plan, s) -> bool:
    m.index(s)
    check_plan(m, plan)
    return _Runner(m).strong(plan, s)


def strongly_executable_on(m: Model, plan: Plan, states) -> bool:
    check_plan(m, plan)
    runner = _Runner(m)
    return all(runner.strong(plan, s) for s in states)


@dataclass(frozen=True)
class ExecutionTree:
    """Labeled tree of belief states; node 0 is the root.

    ``edges`` holds ``(parent, child, action)`` triples.
    """

    agent: str
    labels: tuple[BeliefState, ...]
    edges: tuple[tuple[int, int, str], ...]

    root = 0

    def children(self, n) -> list[int]:
        return [c for p, c, _ in self.edges if p == n]

    def action(self, n):
        for p, _, a in self.edges:
            if p == n:
                return a
        return None

    def leaves(self) -> list[int]:
        parents = {p for p, _, _ in self.edges}
        return [n for n in range(len(self.labels)) if n not in parents]


def validate_execution_tree(m: Model, agent, tree: ExecutionTree) -> ValidationReport:
    m.require_agent(agent)
    bad = []
    n = len(tree.labels)
    blocks = set(m.epistemic[agent])
    for k, lab in enumerate(tree.labels):
        if lab.agent != agent or lab.block not in blocks:
            bad.append(Violation("label is not a belief state", (k, m.fmt(lab.block))))
    parents = {}
    for p, c, a in tree.edges:
        if not (0 <= p < n and 0 <= c < n):
            bad.append(Violation("edge to missing node", (p, c)))
            continue
        if c in parents or c == tree.root:
            bad.append(Violation("node with two parents", (c,)))
        parents[c] = p
        if a not in m.actions_of[agent]:
            bad.append(Violation("action not owned by agent", (p, c, a)))
    reach = {tree.root}
    frontier = [tree.root]
    while frontier:
        k = frontier.pop()
        for c in tree.children(k):
            if c not in reach:
                reach.add(c)
                frontier.append(c)
    if len(reach) != n:
        bad.append(Violation("unreachable nodes", tuple(sorted(set(range(n)) - reach))))
    if bad:
        return ValidationReport(tuple(bad))

    for k in range(n):
        out = [(c, a) for p, c, a in tree.edges if p == k]
        if not out:
            continue
        acts = {a for _, a in out}
        if len(acts) > 1:
            bad.append(Violation("clause 2: out-edges disagree on action", (k, *sorted(acts))))
            continue
        a = out[0][1]
        src = tree.labels[k].block
        if not all(m._succ[a][s] for s in src):
            bad.append(Violation("clause 1: action not strongly executable", (k, a)))
        img = m.image(a, src)
        covered = set()
        for c, _ in out:
            blk = tree.labels[c].block
            if not blk & img:
                bad.append(Violation("clause 3: child misses the successors", (k, c)))
            covered |= blk
        for t in m.ordered(img - covered):
            bad.append(Violation("clause 4: successor not covered", (k, t)))
    return ValidationReport(tuple(bad))


class _TreeBuilder:
    def __init__(self, m: Model, agent):
        self.m = m
        self.agent = agent
        self.runner = _Runner(m)
        self.labels = []
        self.edges = []

    def node(self, block) -> int:
        self.labels.append(BeliefState(self.agent, block))
        return len(self.labels) - 1

    def grow(self, block, todo) -> int:
        """Unfold the plan list ``todo`` from ``block``; returns the node id."""
        todo = list(todo)
        while todo:
            step = todo.pop(0)
            match step:
                case Skip():
                    continue
                case Seq(p, q):
                    todo[:0] = [p, q]
                case Branch(_, cond, p, q):
                    # K_i conditions are constant on an i-block
                    pick = self.runner.test(cond, next(iter(block)))
                    todo.insert(0, p if pick else q)
                case Act(a):
                    if not all(self.m._succ[a][s] for s in block):
                        raise PlanError(f"clause 1: {a!r} is not strongly executable on "
                                        f"{self.m.fmt(block)}")
                    me = self.node(block)
                    img = self.m.image(a, block)
                    kids = [b for b in self.m.epistemic[self.agent] if b & img]
                    for kid in kids:
                        c = self.grow(kid, todo)
                        self.edges.append((me, c, a))
                    return me
        return self.node(block)


def tree_from_plan(m: Model, agent, plan: Plan, b: BeliefState) -> ExecutionTree:
    """Execution tree of ``plan`` rooted at ``b``.

    Leaves are contained in the plan's outcome set only when the model has
    perfect recall; the tree is a valid execution tree either way.
    """
    check_plan(m, plan, agent)
    if b.agent != agent:
        raise PlanError(f"belief state of agent {b.agent}, plan for agent {agent}")
    if not strongly_executable_on(m, plan, b.block):
        raise PlanError(f"plan is not strongly executable on {m.fmt(b.block)}")
    builder = _TreeBuilder(m, agent)
    builder.grow(b.block, [plan])
    # nodes are allocated before their children, so the root is node 0
    return ExecutionTree(agent, tuple(builder.labels), tuple(sorted(builder.edges)))


def plan_from_tree(m: Model, agent, tree: ExecutionTree) -> Plan:
    """Read a plan for ``agent`` back off an execution tree.

    At a node doing ``a`` with children ``C1..Ck``, bisimilar children are
    merged, and the rest are told apart by ``K_i`` conditions built from
    distinguishing formulas: ``a ; if K_i d1 then {..} else if ... else {..}``.
    """
    report = validate_execution_tree(m, agent, tree)
    if not report.ok:
        raise PlanError(f"invalid execution tree: {report.violations[0]}")
    dist = make_distinguisher(m)
    kids = {}
    for p, c, a in tree.edges:
        kids.setdefault(p, []).append(c)

    def build(k) -> Plan:
        children = kids.get(k)
        if not children:
            return Skip()
        children = sorted(children, key=lambda c: m.index(min(tree.labels[c].block,
                                                              key=m.index)))
        groups = []
        for c in children:
            lab = tree.labels[c]
            if not any(belief_states_bisimilar(m, lab, tree.labels[g]) for g in groups):
                groups.append(c)
        subplans = [build(g) for g in groups]
        tail = subplans[-1]
        for n in range(len(groups) - 2, -1, -1):
            mine = tree.labels[groups[n]]
            others = [tree.labels[g] for j, g in enumerate(groups) if j != n]
            cond = conj(block_separator(m, mine, o, dist) for o in others)
            tail = Branch(agent, Know(agent, cond), subplans[n], tail)
        return seq(Act(tree.action(k)), tail)

    return build(tree.root)


def tree_to_dot(m: Model, tree: ExecutionTree) -> str:
    out = ["digraph execution_tree {"]
    for k, lab in enumerate(tree.labels):
        shape = "doublecircle" if k == tree.root else "box"
        out.append(f'  n{k} [shape={shape}, label="{m.fmt(lab.block)}"];')
    for p, c, a in tree.edges:
        out.append(f'  n{p} -> n{c} [label="{a}"];')
    out.append("}")
    return "\n".join(out) + "\n"


def plan_outcomes(m: Model, plan: Plan, b: BeliefState) -> list[BeliefState]:
    """Belief states (of ``b``'s agent) touched by the outcome of ``plan``."""
    out = execute_on_belief_state(m, plan, b)
    seen = {}
    for s in m.ordered(out):
        blk = m.block(s, b.agent)
        seen.setdefault(blk, BeliefState(b.agent, blk))
    return list(seen.values())

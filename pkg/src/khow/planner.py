"""Know-how model checking by reduction to strong planning on belief states.

``Kh_i phi`` holds at ``s`` iff the fully observable nondeterministic planning
problem over agent ``i``'s belief quotient, started at ``[s]^i`` with goal
``{B | K_i phi holds on B}``, has a strong plan.  The planning question is
answered by the backward preimage fixpoint below, which runs at most
``|D| + 1`` rounds.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .eal import Evaluator
from .errors import FragmentError, KhowError, NotPerfectRecallError
from .kbp import ExecutionTree, execute_on_belief_state, plan_from_tree, strongly_executable_on
from .model import BeliefState, Model, belief_state, is_perfect_recall
from .syntax import Formula, Fragment, Plan, Skip, fragment_of

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BeliefTransitionSystem:
    """Agent ``i``'s quotient: belief states linked by ``i``'s own actions.

    ``B -a-> C`` iff ``a`` is strongly executable on ``B`` and ``C`` meets the
    ``a``-image of ``B``.  Edges are kept by block index in ``succ``.
    """

    agent: str
    domain: tuple[BeliefState, ...]
    actions: tuple[str, ...]
    succ: dict = field(repr=False)  # (block index, action) -> tuple of block indices

    def index(self, b: BeliefState) -> int:
        return self.domain.index(b)

    def edges(self):
        for (v, a), targets in self.succ.items():
            for t in targets:
                yield self.domain[v], a, self.domain[t]

    def successors(self, b: BeliefState, a) -> list[BeliefState]:
        return [self.domain[t] for t in self.succ.get((self.index(b), a), ())]


@dataclass(frozen=True)
class PlanningProblem:
    bts: BeliefTransitionSystem
    init: BeliefState
    goal: frozenset  # of BeliefState

    def __post_init__(self):
        dom = set(self.bts.domain)
        if self.init not in dom or not set(self.goal) <= dom:
            raise KhowError("initial or goal belief state outside the quotient")


@dataclass(frozen=True)
class PolicyTable:
    # (belief state, action) -> round of first insertion
    rounds: dict

    @property
    def pairs(self) -> set:
        return set(self.rounds)

    def states(self) -> set:
        return {v for v, _ in self.rounds}

    def choice(self, v: BeliefState, action_order) -> str | None:
        """Least-round action for ``v``; ties broken by ``action_order``."""
        options = [(r, action_order.index(a), a) for (u, a), r in self.rounds.items() if u == v]
        return min(options)[2] if options else None


def quotient_system(m: Model, i) -> BeliefTransitionSystem:
    m.require_agent(i)
    key = ("bts", i)
    if key in m._cache:
        return m._cache[key]
    blocks = m.epistemic[i]
    where = {s: n for n, b in enumerate(blocks) for s in b}
    succ = {}
    for n, b in enumerate(blocks):
        for a in m.actions_of[i]:
            row = m._succ[a]
            if not all(row[s] for s in b):
                continue
            targets = {where[t] for s in b for t in row[s]}
            succ[(n, a)] = tuple(sorted(targets))
    bts = BeliefTransitionSystem(i, tuple(BeliefState(i, b) for b in blocks),
                                 tuple(m.actions_of[i]), succ)
    m._cache[key] = bts
    return bts


def _preds(bts: BeliefTransitionSystem):
    preds = {}
    for (v, a), targets in bts.succ.items():
        for t in targets:
            preds.setdefault(t, set()).add((v, a))
    return preds


def _fixpoint(bts: BeliefTransitionSystem, goal: set, init: int | None):
    """Backward strong preimage iteration over block indices.

    Each round adds every pair ``(v, a)`` with ``v`` not yet covered whose
    ``a``-successors are all covered, where covered = goal plus the states of
    pairs already added.  Only predecessors of states newly covered in the
    previous round can become eligible, so later rounds scan just those; the
    pairs added per round are exactly those of the plain full scan.  Stops
    when a round adds nothing, or (if ``init`` is given) once ``init`` is
    covered.
    """
    preds = _preds(bts)
    covered = set(goal)
    rounds = {}
    candidates = set(bts.succ)
    r = 0
    while not (init is not None and init in covered):
        r += 1
        pre = [(v, a) for v, a in candidates
               if v not in covered and all(t in covered for t in bts.succ[(v, a)])]
        if not pre:
            break
        for pair in pre:
            rounds[pair] = r
        fresh = {v for v, _ in pre}
        covered |= fresh
        candidates = {p for t in fresh for p in preds.get(t, ())}
    return covered, rounds


def strong_plan_existence(problem: PlanningProblem, stop_early=True) -> tuple[bool, PolicyTable]:
    bts = problem.bts
    goal = {bts.index(g) for g in problem.goal}
    init = bts.index(problem.init)
    covered, rounds = _fixpoint(bts, goal, init if stop_early else None)
    table = PolicyTable({(bts.domain[v], a): r for (v, a), r in rounds.items()})
    return init in covered, table


class Checker(Evaluator):
    """Evaluator for the know-how language (``K_i`` and ``Kh_i``).

    On a model without perfect recall the reduction to planning is not
    guaranteed to match the semantics, so ``Kh`` is refused unless ``force``.
    """

    def __init__(self, model: Model, force=False):
        super().__init__(model)
        self.force = force

    def goal_blocks(self, i, body) -> list[int]:
        inner = self.extension(body)
        return [n for n, b in enumerate(self.model.epistemic[i]) if b <= inner]

    def know_how(self, i, body) -> frozenset:
        m = self.model
        if not is_perfect_recall(m):
            if not self.force:
                raise NotPerfectRecallError(
                    "model lacks perfect recall; Kh evaluation refused (use force=True)")
            log.warning("model lacks perfect recall: Kh semantics not guaranteed")
        bts = quotient_system(m, i)
        covered, _ = _fixpoint(bts, set(self.goal_blocks(i, body)), None)
        return frozenset().union(*(bts.domain[n].block for n in covered))


def _require_elkh(f: Formula):
    frag = fragment_of(f)
    if frag not in (Fragment.ELKH, Fragment.BOTH):
        raise FragmentError(f"formula is {frag.value}; the know-how checker needs ELKh")


def extension(m: Model, f: Formula, force=False) -> frozenset:
    _require_elkh(f)
    return Checker(m, force).extension(f)


def check(m: Model, s, f: Formula, force=False) -> bool:
    m.index(s)
    return s in extension(m, f, force)


def policy_tree(m: Model, bts: BeliefTransitionSystem, table: PolicyTable, init: BeliefState,
                goal) -> ExecutionTree:
    """Unfold the policy from ``init`` into an execution tree.

    Every non-goal successor of a pair added in round ``r`` was covered before
    round ``r``, so the unfolding is finite.
    """
    labels, edges = [], []
    goal = set(goal)

    def grow(v: BeliefState) -> int:
        labels.append(v)
        me = len(labels) - 1
        if v in goal:
            return me
        a = table.choice(v, bts.actions)
        assert a is not None, "policy undefined off the goal"
        for w in bts.successors(v, a):
            edges.append((me, grow(w), a))
        return me

    grow(init)
    return ExecutionTree(bts.agent, tuple(labels), tuple(sorted(edges)))


def synthesize_plan(m: Model, i, b: BeliefState | str, goal: Formula, force=False) -> Plan | None:
    """A plan for agent ``i`` that, run from ``b``, surely ends where ``goal`` holds.

    ``b`` may be a belief state or a state (standing for its ``i``-block).
    Returns ``None`` when ``Kh_i goal`` fails there.  The result is re-executed
    before being returned.
    """
    _require_elkh(goal)
    if not isinstance(b, BeliefState):
        b = belief_state(m, b, i)
    checker = Checker(m, force)
    if not is_perfect_recall(m) and not force:
        raise NotPerfectRecallError("model lacks perfect recall; synthesis refused")
    target = checker.extension(goal)
    bts = quotient_system(m, i)
    goals = frozenset(bts.domain[n] for n in checker.goal_blocks(i, goal))
    if b in goals:
        return Skip()
    ok, table = strong_plan_existence(PlanningProblem(bts, b, goals))
    if not ok:
        return None
    plan = plan_from_tree(m, i, policy_tree(m, bts, table, b, goals))
    if not (strongly_executable_on(m, plan, b.block)
            and execute_on_belief_state(m, plan, b) <= target):
        raise KhowError(f"synthesized plan failed its self-check: {plan}")
    return plan


def quotient_to_dot(m: Model, bts: BeliefTransitionSystem) -> str:
    out = [f'digraph "T(M,{bts.agent})" {{']
    for n, b in enumerate(bts.domain):
        out.append(f'  b{n} [shape=box, label="{m.fmt(b.block)}"];')
    for (v, a), targets in bts.succ.items():
        for t in targets:
            out.append(f'  b{v} -> b{t} [label="{a}"];')
    out.append("}")
    return "\n".join(out) + "\n"

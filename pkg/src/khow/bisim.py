"""Largest bisimulation by partition refinement, and distinguishing formulas.

Every epistemic relation and every action relation is refined as a plain
labeled relation, so one splitter loop handles both.  Each round's class
assignment is kept; a pair of states first separated in round ``r`` is told
apart by a formula built from the round ``r - 1`` classes, recursively.
"""

from __future__ import annotations

from dataclasses import dataclass

from .eal import Evaluator
from .errors import KhowError
from .model import BeliefState, Model
from .syntax import Diamond, Formula, Know, Not, Prop, conj, disj, neg


@dataclass(frozen=True)
class BisimPartition:
    model: Model
    classes: tuple[frozenset, ...]
    history: tuple[dict, ...]
    # (round, splitter kind, label): kind is "prop", "agent" or "action"
    log: tuple[tuple[int, str, str], ...]

    def class_of(self, s) -> int:
        return self.history[-1][s]

    @property
    def rounds(self) -> int:
        return len(self.history) - 1


def _labels(m: Model):
    out = [("agent", i) for i in m.agents]
    out += [("action", a) for a in m.actions]
    return out


def _succ(m: Model, label, s) -> frozenset:
    kind, x = label
    if kind == "agent":
        return m._block[x][s]
    return m._succ[x][s]


def _renumber(m: Model, keys: dict) -> dict:
    ids = {}
    out = {}
    for s in m.states:
        out[s] = ids.setdefault(keys[s], len(ids))
    return out


def largest_bisimulation(m: Model) -> BisimPartition:
    cached = m._cache.get("bisim")
    if cached is not None:
        return cached
    labels = _labels(m)
    current = _renumber(m, {s: m.valuation[s] for s in m.states})
    log = []
    for p in m.props:
        if len({p in m.valuation[s] for s in m.states}) > 1:
            log.append((0, "prop", p))
    history = [current]
    while True:
        sigs = {}
        for label in labels:
            sigs[label] = {s: frozenset(current[t] for t in _succ(m, label, s)) for s in m.states}
        keys = {s: (current[s],) + tuple(sigs[l][s] for l in labels) for s in m.states}
        nxt = _renumber(m, keys)
        if len(set(nxt.values())) == len(set(current.values())):
            break
        r = len(history)
        for label in labels:
            seen = {}
            for s in m.states:
                if seen.setdefault(current[s], sigs[label][s]) != sigs[label][s]:
                    log.append((r, *label))
                    break
        history.append(nxt)
        current = nxt
    groups = {}
    for s in m.states:
        groups.setdefault(current[s], []).append(s)
    result = BisimPartition(m, tuple(frozenset(g) for g in groups.values()),
                            tuple(history), tuple(log))
    m._cache["bisim"] = result
    return result


def bisimilar(m: Model, s, t) -> bool:
    m.index(s)
    m.index(t)
    bp = largest_bisimulation(m)
    return bp.class_of(s) == bp.class_of(t)


def belief_states_bisimilar(m: Model, b: BeliefState, c: BeliefState) -> bool:
    if b.agent != c.agent:
        raise KhowError(f"belief states of different agents ({b.agent}, {c.agent})")
    bp = largest_bisimulation(m)
    left = {bp.class_of(s) for s in b.block}
    right = {bp.class_of(s) for s in c.block}
    return left == right


class _Distinguisher:
    def __init__(self, m: Model):
        self.m = m
        self.bp = largest_bisimulation(m)
        self.memo = {}
        self.ev = Evaluator(m)

    def split_round(self, s, t):
        for r, assignment in enumerate(self.bp.history):
            if assignment[s] != assignment[t]:
                return r
        return None

    def formula(self, s, t) -> Formula:
        key = (s, t)
        if key not in self.memo:
            self.memo[key] = self._build(s, t)
        return self.memo[key]

    def _build(self, s, t) -> Formula:
        m = self.m
        r = self.split_round(s, t)
        assert r is not None, "states are bisimilar"
        if r == 0:
            for p in m.props:
                here, there = p in m.valuation[s], p in m.valuation[t]
                if here and not there:
                    return Prop(p)
                if there and not here:
                    return Not(Prop(p))
            raise AssertionError("round-0 split without a valuation difference")
        prev = self.bp.history[r - 1]
        for label in _labels(m):
            ss, ts = _succ(m, label, s), _succ(m, label, t)
            s_classes = {prev[x] for x in ss}
            t_classes = {prev[x] for x in ts}
            for x in m.ordered(ss):
                if prev[x] not in t_classes:
                    body = self._shrink([self.formula(x, y) for y in m.ordered(ts)], ts)
                    return _possible(label, body)
            if t_classes - s_classes:
                return neg(self.formula(t, s))
        raise AssertionError("no splitter found for a separated pair")

    def _shrink(self, conjuncts, falsify):
        """Drop conjuncts the rest can do without (still false on ``falsify``)."""
        keep = list(dict.fromkeys(conjuncts))
        for c in list(keep):
            trial = [d for d in keep if d != c]
            if not (self.ev.extension(conj(trial)) & falsify):
                keep = trial
        return conj(keep)


def _possible(label, body: Formula) -> Formula:
    kind, x = label
    if kind == "agent":
        return Not(Know(x, neg(body)))
    return Diamond(x, body)


def distinguishing_formula(m: Model, s, t) -> Formula | None:
    """An EAL formula true at ``s`` and false at ``t``; ``None`` if bisimilar."""
    if bisimilar(m, s, t):
        return None
    return _Distinguisher(m).formula(s, t)


def block_separator(m: Model, b: BeliefState, c: BeliefState, d=None) -> Formula:
    """EAL ``psi`` with ``K_i psi`` true throughout ``b`` and false throughout ``c``.

    Requires the two belief states not to be bisimilar.
    """
    d = d or _Distinguisher(m)
    bp = d.bp
    left = {bp.class_of(u) for u in b.block}
    # a state of c matched by nothing in b: psi holds on all of b but fails there
    for t in m.ordered(c.block):
        if bp.class_of(t) not in left:
            return disj(d.formula(u, t) for u in m.ordered(b.block))
    right = {bp.class_of(t) for t in c.block}
    for u in m.ordered(b.block):
        if bp.class_of(u) not in right:
            inner = conj(d.formula(u, t) for t in m.ordered(c.block))
            return Not(Know(b.agent, neg(inner)))
    raise KhowError("belief states are bisimilar")


def make_distinguisher(m: Model):
    """Shared memo for repeated distinguishing-formula queries on ``m``."""
    return _Distinguisher(m)

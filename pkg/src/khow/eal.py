"""Bottom-up evaluation of epistemic action formulas on a model."""

from __future__ import annotations

from .errors import UnknownIdentifierError
from .model import Model
from .syntax import (And, Box, Diamond, Formula, Fragment, Imp, Know, KnowHow, Not, Or, Prop,
                     Top, require_fragment)


class Evaluator:
    """Computes formula extensions, memoizing each subformula once.

    The memo lives on the instance, so one evaluator answers many related
    queries against the same model cheaply.  Subclasses add modalities by
    overriding :meth:`know_how`.
    """

    def __init__(self, model: Model):
        self.model = model
        self.all = frozenset(model.states)
        self.memo: dict[Formula, frozenset] = {}

    def extension(self, f: Formula) -> frozenset:
        hit = self.memo.get(f)
        if hit is None:
            hit = self.memo[f] = self._compute(f)
        return hit

    def holds(self, s, f: Formula) -> bool:
        self.model.index(s)
        return s in self.extension(f)

    def _compute(self, f: Formula) -> frozenset:
        m = self.model
        match f:
            case Top():
                return self.all
            case Prop(p):
                return frozenset(s for s in m.states if p in m.valuation[s])
            case Not(b):
                return self.all - self.extension(b)
            case And(l, r):
                return self.extension(l) & self.extension(r)
            case Or(l, r):
                return self.extension(l) | self.extension(r)
            case Imp(l, r):
                return (self.all - self.extension(l)) | self.extension(r)
            case Know(i, b):
                if i not in m.actions_of:
                    raise UnknownIdentifierError(f"unknown agent {i!r}")
                inner = self.extension(b)
                return frozenset().union(*(blk for blk in m.epistemic[i] if blk <= inner))
            case Box(a, b):
                m.require_action(a)
                inner = self.extension(b)
                succ = m._succ[a]
                return frozenset(s for s in m.states if succ[s] <= inner)
            case Diamond(a, b):
                m.require_action(a)
                pred = m._pred[a]
                out = set()
                for t in self.extension(b):
                    out |= pred[t]
                return frozenset(out)
            case KnowHow(i, b):
                return self.know_how(i, b)
        raise TypeError(f"not a formula: {f!r}")

    def know_how(self, agent, body) -> frozenset:
        raise TypeError("Kh is not part of the epistemic action language")


def extension_eal(m: Model, f: Formula) -> frozenset:
    require_fragment(f, Fragment.EAL)
    return Evaluator(m).extension(f)


def eval_eal(m: Model, s, f: Formula) -> bool:
    m.index(s)
    return s in extension_eal(m, f)

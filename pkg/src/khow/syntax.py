"""Formula and plan ASTs with their parser and printer.

Surface syntax (ASCII, whitespace-insensitive)::

    phi  ::= imp
    imp  ::= or ( "->" imp )?
    or   ::= and ( "|" and )*
    and  ::= un ( "&" un )*
    un   ::= "~" un | "K{" id "}" un | "Kh{" id "}" un | "[" id "]" un
           | "<" id ">" un | "top" | "bot" | id | "(" phi ")"
    plan ::= atom ( ";" atom )*
    atom ::= "skip" | id | "if" "K{" id "}" phi "then" "{" plan "}" "else" "{" plan "}"
           | "(" plan ")"

``¬ ∧ ∨ → ⊤ ⊥`` are accepted as aliases.  ``&``, ``|`` and ``;`` group to
the left, ``->`` to the right.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .errors import FragmentError, ParseError, PlanError


class Formula:
    __slots__ = ()

    def __str__(self):
        return print_formula(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Prop(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Know(Formula):
    agent: str
    body: Formula


@dataclass(frozen=True)
class Box(Formula):
    action: str
    body: Formula


@dataclass(frozen=True)
class Diamond(Formula):
    action: str
    body: Formula


@dataclass(frozen=True)
class KnowHow(Formula):
    agent: str
    body: Formula


def bot() -> Formula:
    return Not(Top())


def conj(items) -> Formula:
    items = list(dict.fromkeys(items))
    if not items:
        return Top()
    out = items[0]
    for f in items[1:]:
        out = And(out, f)
    return out


def disj(items) -> Formula:
    items = list(dict.fromkeys(items))
    if not items:
        return bot()
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def neg(f: Formula) -> Formula:
    """Negation that cancels a double negation."""
    return f.body if isinstance(f, Not) else Not(f)


def subformulas(f: Formula):
    """Post-order walk over ``f``."""
    match f:
        case Not(b) | Know(_, b) | Box(_, b) | Diamond(_, b) | KnowHow(_, b):
            yield from subformulas(b)
        case And(l, r) | Or(l, r) | Imp(l, r):
            yield from subformulas(l)
            yield from subformulas(r)
    yield f


def modal_depth(f: Formula) -> int:
    match f:
        case Top() | Prop():
            return 0
        case Not(b):
            return modal_depth(b)
        case And(l, r) | Or(l, r) | Imp(l, r):
            return max(modal_depth(l), modal_depth(r))
        case Know(_, b) | Box(_, b) | Diamond(_, b) | KnowHow(_, b):
            return 1 + modal_depth(b)
    raise TypeError(f"not a formula: {f!r}")


class Fragment(enum.Enum):
    EAL = "EAL"
    ELKH = "ELKh"
    BOTH = "Both"
    NEITHER = "Neither"


def fragment_of(f: Formula) -> Fragment:
    kh = action = False
    for g in subformulas(f):
        if isinstance(g, KnowHow):
            kh = True
        elif isinstance(g, (Box, Diamond)):
            action = True
    if kh and action:
        return Fragment.NEITHER
    if kh:
        return Fragment.ELKH
    if action:
        return Fragment.EAL
    return Fragment.BOTH


def require_fragment(f: Formula, fragment: Fragment):
    got = fragment_of(f)
    if got not in (fragment, Fragment.BOTH):
        raise FragmentError(f"formula {print_formula(f)!r} is {got.value}, "
                            f"expected {fragment.value}")


# -- plans ---------------------------------------------------------------------

class Plan:
    __slots__ = ()

    def __str__(self):
        return print_plan(self)


@dataclass(frozen=True)
class Skip(Plan):
    pass


@dataclass(frozen=True)
class Act(Plan):
    action: str


@dataclass(frozen=True)
class Seq(Plan):
    first: Plan
    second: Plan


@dataclass(frozen=True)
class Branch(Plan):
    agent: str
    condition: Know
    then: Plan
    orelse: Plan

    def __post_init__(self):
        c = self.condition
        if not isinstance(c, Know):
            raise PlanError("branch condition must have the form K{i} phi")
        if c.agent != self.agent:
            raise PlanError(f"branch condition K{{{c.agent}}} does not match agent {self.agent}")
        if any(isinstance(g, KnowHow) for g in subformulas(c.body)):
            raise PlanError("Kh is not allowed inside a branch condition")


def seq(*plans: Plan) -> Plan:
    """Left-nested sequence with ``skip`` steps dropped."""
    plans = [p for p in plans if not isinstance(p, Skip)]
    if not plans:
        return Skip()
    out = plans[0]
    for p in plans[1:]:
        out = Seq(out, p)
    return out


def power(plan: Plan, n: int) -> Plan:
    """``plan`` repeated ``n`` times; the zeroth power is ``skip``."""
    if n == 0:
        return Skip()
    out = plan
    for _ in range(n - 1):
        out = Seq(out, plan)
    return out


def plan_actions(plan: Plan) -> set:
    match plan:
        case Skip():
            return set()
        case Act(a):
            return {a}
        case Seq(p, q):
            return plan_actions(p) | plan_actions(q)
        case Branch(_, _, p, q):
            return plan_actions(p) | plan_actions(q)
    raise TypeError(f"not a plan: {plan!r}")


def plan_depth(plan: Plan) -> int:
    match plan:
        case Skip() | Act():
            return 1
        case Seq(p, q) | Branch(_, _, p, q):
            return 1 + max(plan_depth(p), plan_depth(q))
    raise TypeError(f"not a plan: {plan!r}")


# -- lexer ---------------------------------------------------------------------

_ALIASES = {"¬": "~", "∧": "&", "∨": "|", "→": "->", "⊤": "top", "⊥": "bot"}
_TOKEN = re.compile(r"\s*(?:(->|[~&|()\[\]<>{};¬∧∨→⊤⊥])|([A-Za-z0-9_]+))")
KEYWORDS = frozenset({"top", "bot", "skip", "if", "then", "else"})


def _tokenize(text: str):
    toks = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            rest = text[pos:]
            if rest.strip():
                bad = len(text) - len(rest.lstrip())
                raise ParseError(f"unexpected character {text[bad]!r}", pos=bad)
            break
        sym, word = m.groups()
        tok = _ALIASES.get(sym, sym) if sym else word
        toks.append((tok, m.start(1) if sym else m.start(2)))
        pos = m.end()
    toks.append(("<end>", len(text)))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k=0):
        return self.toks[min(self.i + k, len(self.toks) - 1)][0]

    def pos(self):
        return self.toks[self.i][1]

    def take(self, expected=None):
        tok = self.peek()
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok!r}", pos=self.pos())
        self.i += 1
        return tok

    def ident(self, what):
        tok = self.peek()
        if not re.fullmatch(r"[A-Za-z0-9_]+", tok) or tok in KEYWORDS:
            raise ParseError(f"expected {what}, got {tok!r}", pos=self.pos())
        self.i += 1
        return tok

    def end(self):
        if self.peek() != "<end>":
            raise ParseError(f"unexpected {self.peek()!r}", pos=self.pos())

    # formulas
    def phi(self):
        left = self.disj()
        if self.peek() == "->":
            self.take()
            return Imp(left, self.phi())
        return left

    def disj(self):
        out = self.conj()
        while self.peek() == "|":
            self.take()
            out = Or(out, self.conj())
        return out

    def conj(self):
        out = self.unary()
        while self.peek() == "&":
            self.take()
            out = And(out, self.unary())
        return out

    def unary(self):
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok in ("K", "Kh") and self.peek(1) == "{":
            self.take()
            self.take("{")
            agent = self.ident("agent")
            self.take("}")
            return (Know if tok == "K" else KnowHow)(agent, self.unary())
        if tok == "[":
            self.take()
            a = self.ident("action")
            self.take("]")
            return Box(a, self.unary())
        if tok == "<":
            self.take()
            a = self.ident("action")
            self.take(">")
            return Diamond(a, self.unary())
        if tok == "top":
            self.take()
            return Top()
        if tok == "bot":
            self.take()
            return bot()
        if tok == "(":
            self.take()
            f = self.phi()
            self.take(")")
            return f
        return Prop(self.ident("formula"))

    # plans
    def plan(self):
        out = self.atom()
        while self.peek() == ";":
            self.take()
            out = Seq(out, self.atom())
        return out

    def atom(self):
        tok = self.peek()
        if tok == "skip":
            self.take()
            return Skip()
        if tok == "(":
            self.take()
            p = self.plan()
            self.take(")")
            return p
        if tok == "if":
            self.take()
            at = self.pos()
            if self.peek() == "Kh":
                raise ParseError("Kh is not allowed in a branch condition", pos=at)
            if self.peek() != "K" or self.peek(1) != "{":
                raise ParseError("branch condition must start with K{i}", pos=at)
            self.take()
            self.take("{")
            agent = self.ident("agent")
            self.take("}")
            body = self.phi()
            if any(isinstance(g, KnowHow) for g in subformulas(body)):
                raise ParseError("Kh is not allowed in a branch condition", pos=at)
            self.take("then")
            self.take("{")
            then = self.plan()
            self.take("}")
            self.take("else")
            self.take("{")
            orelse = self.plan()
            self.take("}")
            return Branch(agent, Know(agent, body), then, orelse)
        return Act(self.ident("plan"))


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.phi()
    p.end()
    return f


def parse_plan(text: str) -> Plan:
    p = _Parser(text)
    plan = p.plan()
    p.end()
    return plan


# -- printer ---------------------------------------------------------------------

_IMP, _OR, _AND, _UN = 1, 2, 3, 4


def _fmt(f: Formula, ctx: int) -> str:
    match f:
        case Top():
            return "top"
        case Prop(name):
            return name
        case Not(b):
            return "~" + _fmt(b, _UN)
        case Know(i, b):
            return f"K{{{i}}}" + _fmt(b, _UN)
        case KnowHow(i, b):
            return f"Kh{{{i}}}" + _fmt(b, _UN)
        case Box(a, b):
            return f"[{a}]" + _fmt(b, _UN)
        case Diamond(a, b):
            return f"<{a}>" + _fmt(b, _UN)
        case And(l, r):
            s, own = f"{_fmt(l, _AND)} & {_fmt(r, _AND + 1)}", _AND
        case Or(l, r):
            s, own = f"{_fmt(l, _OR)} | {_fmt(r, _OR + 1)}", _OR
        case Imp(l, r):
            s, own = f"{_fmt(l, _IMP + 1)} -> {_fmt(r, _IMP)}", _IMP
        case _:
            raise TypeError(f"not a formula: {f!r}")
    return f"({s})" if own < ctx else s


def print_formula(f: Formula) -> str:
    return _fmt(f, _IMP)


def _fmt_plan(p: Plan, nested: bool) -> str:
    match p:
        case Skip():
            return "skip"
        case Act(a):
            return a
        case Seq(first, second):
            s = f"{_fmt_plan(first, False)} ; {_fmt_plan(second, True)}"
            return f"({s})" if nested else s
        case Branch(_, cond, then, orelse):
            return (f"if K{{{cond.agent}}} {print_formula(cond.body)} "
                    f"then {{ {_fmt_plan(then, False)} }} else {{ {_fmt_plan(orelse, False)} }}")
    raise TypeError(f"not a plan: {p!r}")


def print_plan(p: Plan) -> str:
    return _fmt_plan(p, False)

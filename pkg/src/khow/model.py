"""Epistemic transition systems: data model, file format and perfect recall."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import ModelError, ParseError, UnknownIdentifierError

IDENT = re.compile(r"[A-Za-z0-9_]+\Z")
# words the formula/plan grammar claims; they cannot name propositions or actions
RESERVED = frozenset({"top", "bot", "skip", "if", "then", "else"})


@dataclass(frozen=True)
class BeliefState:
    agent: str
    block: frozenset

    def __iter__(self):
        return iter(self.block)

    def __len__(self):
        return len(self.block)

    def __contains__(self, s):
        return s in self.block


@dataclass(frozen=True)
class Violation:
    kind: str
    witness: tuple


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class Model:
    """A finite epistemic transition system.

    ``epistemic`` maps each agent to its partition of the states; states an
    agent's partition leaves out are put in singleton blocks.  ``transitions``
    maps each action to its set of ``(source, target)`` pairs.  Containers are
    normalized to tuples/frozensets on construction and the model is
    validated; an invalid model raises :class:`ModelError`.
    """

    states: tuple
    agents: tuple
    actions_of: Mapping[str, tuple]
    epistemic: Mapping[str, tuple]
    transitions: Mapping[str, frozenset]
    valuation: Mapping[str, frozenset]
    _index: dict = field(init=False, repr=False, compare=False)
    _block: dict = field(init=False, repr=False, compare=False)
    _succ: dict = field(init=False, repr=False, compare=False)
    _pred: dict = field(init=False, repr=False, compare=False)
    _cache: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        states = tuple(self.states)
        agents = tuple(self.agents)
        index = {s: n for n, s in enumerate(states)}
        actions_of = {i: tuple(dict.fromkeys(self.actions_of.get(i, ()))) for i in agents}
        act = tuple(dict.fromkeys(a for i in agents for a in actions_of[i]))
        problems = _structural_problems(states, agents, self.actions_of, actions_of,
                                        self.epistemic, self.transitions, self.valuation, act)
        if problems:
            kind, witness = problems[0]
            raise ModelError(f"{kind}: {' '.join(map(str, witness))}")

        epistemic = {}
        block_of = {}
        for i in agents:
            blocks = [frozenset(b) for b in self.epistemic.get(i, ())]
            covered = set().union(*blocks) if blocks else set()
            blocks += [frozenset([s]) for s in states if s not in covered]
            blocks.sort(key=lambda b: min(index[s] for s in b))
            epistemic[i] = tuple(blocks)
            block_of[i] = {s: b for b in blocks for s in b}

        transitions = {a: frozenset((s, t) for s, t in self.transitions.get(a, ())) for a in act}
        succ = {a: {s: set() for s in states} for a in act}
        pred = {a: {s: set() for s in states} for a in act}
        for a, pairs in transitions.items():
            for s, t in pairs:
                succ[a][s].add(t)
                pred[a][t].add(s)
        succ = {a: {s: frozenset(ts) for s, ts in d.items()} for a, d in succ.items()}
        pred = {a: {s: frozenset(ts) for s, ts in d.items()} for a, d in pred.items()}
        valuation = {s: frozenset(self.valuation.get(s, ())) for s in states}

        setattr_ = object.__setattr__
        setattr_(self, "states", states)
        setattr_(self, "agents", agents)
        setattr_(self, "actions_of", actions_of)
        setattr_(self, "epistemic", epistemic)
        setattr_(self, "transitions", transitions)
        setattr_(self, "valuation", valuation)
        setattr_(self, "_index", index)
        setattr_(self, "_block", block_of)
        setattr_(self, "_succ", succ)
        setattr_(self, "_pred", pred)
        setattr_(self, "_cache", {})

    @property
    def actions(self) -> tuple:
        """All actions (the union of every agent's set), in declaration order."""
        return tuple(self.transitions)

    @property
    def props(self) -> tuple:
        seen = {}
        for s in self.states:
            for p in sorted(self.valuation[s]):
                seen.setdefault(p, None)
        return tuple(seen)

    def index(self, s) -> int:
        try:
            return self._index[s]
        except KeyError:
            raise UnknownIdentifierError(f"unknown state {s!r}") from None

    def require_agent(self, i):
        if i not in self.actions_of:
            raise UnknownIdentifierError(f"unknown agent {i!r}")

    def require_action(self, a):
        if a not in self._succ:
            raise UnknownIdentifierError(f"unknown action {a!r}")

    def block(self, s, i) -> frozenset:
        self.require_agent(i)
        self.index(s)
        return self._block[i][s]

    def successors(self, a, s) -> frozenset:
        self.require_action(a)
        return self._succ[a][s]

    def predecessors(self, a, s) -> frozenset:
        self.require_action(a)
        return self._pred[a][s]

    def image(self, a, states: Iterable) -> frozenset:
        succ = self._succ[a]
        out = set()
        for s in states:
            out |= succ[s]
        return frozenset(out)

    def ordered(self, states: Iterable) -> list:
        """States sorted by declaration order."""
        return sorted(states, key=self._index.__getitem__)

    def fmt(self, states: Iterable) -> str:
        return "{" + ",".join(self.ordered(states)) + "}"


def _structural_problems(states, agents, raw_actions, actions_of, epistemic, transitions,
                         valuation, act):
    problems = []
    if not states:
        problems.append(("no states", ()))
    if not agents:
        problems.append(("no agents", ()))
    if len(set(states)) != len(states):
        dup = [s for s in states if states.count(s) > 1]
        problems.append(("duplicate state", (dup[0],)))
    if len(set(agents)) != len(agents):
        problems.append(("duplicate agent", ()))
    known = set(states)
    for i in raw_actions:
        if i not in agents:
            problems.append(("unknown agent", (i,)))
    for i in epistemic:
        if i not in agents:
            problems.append(("unknown agent", (i,)))
            continue
        seen = set()
        for b in epistemic[i]:
            b = set(b)
            if not b:
                problems.append(("empty block", (i,)))
            for s in b:
                if s not in known:
                    problems.append(("unknown state", (s,)))
                elif s in seen:
                    problems.append(("state in two blocks", (i, s)))
            seen |= b
    for a, pairs in transitions.items():
        if a not in act:
            problems.append(("action owned by no agent", (a,)))
        for s, t in pairs:
            for x in (s, t):
                if x not in known:
                    problems.append(("unknown state", (x,)))
    for s in valuation:
        if s not in known:
            problems.append(("unknown state", (s,)))
    return problems


def validate_model(m: Model) -> ValidationReport:
    """Re-check the structural invariants of an already-built model."""
    problems = _structural_problems(m.states, m.agents, m.actions_of, m.actions_of,
                                    m.epistemic, m.transitions, m.valuation, m.actions)
    for i in m.agents:
        union = set().union(*m.epistemic[i])
        if union != set(m.states):
            problems.append(("partition does not cover states", (i,)))
    return ValidationReport(tuple(Violation(k, w) for k, w in problems))


def belief_state(m: Model, s, i) -> BeliefState:
    return BeliefState(i, m.block(s, i))


def belief_partition(m: Model, i) -> list[BeliefState]:
    m.require_agent(i)
    return [BeliefState(i, b) for b in m.epistemic[i]]


def check_perfect_recall(m: Model) -> ValidationReport:
    """List every perfect-recall obligation the model fails to discharge.

    For agent ``i`` and one of its own actions ``a``: whenever ``s1 -a-> s2``
    and ``s2 ~i s4``, some ``s3 ~i s1`` must have ``s3 -a-> s4``.  That is the
    same as asking that the ``a``-image of each ``i``-block be a union of
    ``i``-blocks.  Violations carry ``(agent, action, s1, s2, s4)``.
    """
    found = []
    for i in m.agents:
        for a in m.actions_of[i]:
            succ = m._succ[a]
            for blk in m.epistemic[i]:
                img = m.image(a, blk)
                for s2 in m.ordered(img):
                    missing = m._block[i][s2] - img
                    if not missing:
                        continue
                    for s1 in m.ordered(blk):
                        if s2 in succ[s1]:
                            for s4 in m.ordered(missing):
                                found.append(Violation("perfect recall", (i, a, s1, s2, s4)))
    return ValidationReport(tuple(found))


def is_perfect_recall(m: Model) -> bool:
    if "pr" not in m._cache:
        m._cache["pr"] = check_perfect_recall(m).ok
    return m._cache["pr"]


# -- file format -------------------------------------------------------------

_SECTION_ORDER = ("agents", "actions", "states", "obs", "trans", "val")
_HEADER = re.compile(r"^(\w+)(?:\[([^\]]*)\])?\s*:(.*)$")
_TRANS = re.compile(r"^(\S+)\s+-(\S+?)->\s+(\S+)$")


def _ident(tok, line, what):
    if not IDENT.match(tok):
        raise ParseError(f"bad {what} identifier {tok!r}", line=line)
    return tok


def parse_model(text: str) -> Model:
    """Parse the line-oriented model format (see ``data/clinic.ets``)."""
    agents = None
    states = None
    actions_of = {}
    obs = {}
    trans = []
    val = {}
    stage = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        mt = _HEADER.match(line)
        if not mt:
            raise ParseError(f"expected 'section: ...', got {line!r}", line=lineno)
        section, arg, body = mt.group(1), mt.group(2), mt.group(3).strip()
        if section not in _SECTION_ORDER:
            raise ParseError(f"unknown section {section!r}", line=lineno)
        pos = _SECTION_ORDER.index(section)
        if pos < stage:
            raise ParseError(f"section {section!r} out of order", line=lineno)
        stage = pos
        if (arg is None) != (section in ("agents", "states", "trans")):
            raise ParseError(f"section {section!r} takes "
                             f"{'no' if arg is not None else 'a'} [argument]", line=lineno)
        toks = body.split()

        if section == "agents":
            if agents is not None:
                raise ParseError("agents declared twice", line=lineno)
            agents = [_ident(t, lineno, "agent") for t in toks]
            if len(set(agents)) != len(agents):
                raise ModelError(f"line {lineno}: duplicate agent")
        elif section == "actions":
            if agents is None:
                raise ParseError("actions before agents", line=lineno)
            if arg not in agents:
                raise ModelError(f"line {lineno}: unknown agent {arg!r}")
            if arg in actions_of:
                raise ModelError(f"line {lineno}: actions[{arg}] declared twice")
            for t in toks:
                _ident(t, lineno, "action")
                if t in RESERVED:
                    raise ModelError(f"line {lineno}: reserved word {t!r} used as action")
            actions_of[arg] = toks
        elif section == "states":
            if states is not None:
                raise ParseError("states declared twice", line=lineno)
            states = [_ident(t, lineno, "state") for t in toks]
            seen = set()
            for s in states:
                if s in seen:
                    raise ModelError(f"line {lineno}: duplicate state {s!r}")
                seen.add(s)
        elif section == "obs":
            if states is None:
                raise ParseError("obs before states", line=lineno)
            if arg not in (agents or ()):
                raise ModelError(f"line {lineno}: unknown agent {arg!r}")
            if arg in obs:
                raise ModelError(f"line {lineno}: obs[{arg}] declared twice")
            obs[arg] = _parse_blocks(body, lineno, set(states))
        elif section == "trans":
            if states is None:
                raise ParseError("trans before states", line=lineno)
            mt = _TRANS.match(body)
            if not mt:
                raise ParseError(f"expected 's -a-> t', got {body!r}", line=lineno)
            s, a, t = mt.groups()
            for x in (s, t):
                if x not in states:
                    raise ModelError(f"line {lineno}: unknown state {x!r}")
            if not any(a in acts for acts in actions_of.values()):
                raise ModelError(f"line {lineno}: action {a!r} owned by no agent")
            trans.append((s, a, t))
        elif section == "val":
            if states is None:
                raise ParseError("val before states", line=lineno)
            if arg not in states:
                raise ModelError(f"line {lineno}: unknown state {arg!r}")
            if arg in val:
                raise ModelError(f"line {lineno}: val[{arg}] declared twice")
            for t in toks:
                _ident(t, lineno, "proposition")
                if t in RESERVED:
                    raise ModelError(f"line {lineno}: reserved word {t!r} used as proposition")
            val[arg] = toks

    if agents is None:
        raise ParseError("missing 'agents:' section")
    if states is None:
        raise ParseError("missing 'states:' section")
    transitions = {}
    for s, a, t in trans:
        transitions.setdefault(a, set()).add((s, t))
    return Model(states, agents, actions_of, obs, transitions, val)


def _parse_blocks(body, lineno, states):
    blocks = []
    seen = set()
    rest = body
    while rest:
        mt = re.match(r"\{([^{}]*)\}\s*", rest)
        if not mt:
            raise ParseError(f"expected '{{ s ... }}' block, got {rest!r}", line=lineno)
        members = mt.group(1).split()
        if not members:
            raise ModelError(f"line {lineno}: empty block")
        for s in members:
            if s not in states:
                raise ModelError(f"line {lineno}: unknown state {s!r}")
            if s in seen:
                raise ModelError(f"line {lineno}: state in two blocks: {s!r}")
            seen.add(s)
        blocks.append(members)
        rest = rest[mt.end():]
    return blocks


def format_model(m: Model) -> str:
    """Canonical writer; ``parse_model(format_model(m)) == m``."""
    out = [f"agents: {' '.join(m.agents)}"]
    for i in m.agents:
        out.append(f"actions[{i}]: {' '.join(m.actions_of[i])}".rstrip())
    out.append(f"states: {' '.join(m.states)}")
    for i in m.agents:
        blocks = [b for b in m.epistemic[i] if len(b) > 1]
        if blocks:
            out.append(f"obs[{i}]: " + " ".join("{ " + " ".join(m.ordered(b)) + " }"
                                                for b in blocks))
    act_index = {a: n for n, a in enumerate(m.actions)}
    edges = sorted(((s, a, t) for a, pairs in m.transitions.items() for s, t in pairs),
                   key=lambda e: (m._index[e[0]], act_index[e[1]], m._index[e[2]]))
    out += [f"trans: {s} -{a}-> {t}" for s, a, t in edges]
    order = {p: n for n, p in enumerate(m.props)}
    for s in m.states:
        if m.valuation[s]:
            out.append(f"val[{s}]: " + " ".join(sorted(m.valuation[s], key=order.__getitem__)))
    return "\n".join(out) + "\n"


def load_model(path) -> Model:
    return parse_model(Path(path).read_text(encoding="utf-8"))


def bundled_text(name: str) -> str:
    return resources.files("khow.data").joinpath(name).read_text(encoding="utf-8")


def clinic() -> Model:
    """The bundled ``clinic.ets`` model (six states, two agents)."""
    return parse_model(bundled_text("clinic.ets"))

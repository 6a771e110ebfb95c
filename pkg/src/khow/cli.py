"""``khow`` command line.

Exit codes: 0 true/ok, 1 false/unsat, 2 invalid model, 3 usage or parse
error, 4 oracle budget exceeded.  With ``--json`` stdout carries a single
object ``{"command", "inputs", "result", "diagnostics"}``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import harness
from .bisim import distinguishing_formula, largest_bisimulation
from .eal import Evaluator
from .errors import BudgetExceededError, FragmentError, KhowError, ModelError
from .kbp import check_plan, execute_plan, strongly_executable, tree_from_plan, tree_to_dot
from .model import belief_state, check_perfect_recall, format_model, load_model, validate_model
from .planner import Checker, quotient_system, quotient_to_dot, synthesize_plan
from .syntax import Fragment, fragment_of, parse_formula, parse_plan, print_formula

OK, FALSE, INVALID, USAGE, BUDGET = 0, 1, 2, 3, 4


class UsageError(KhowError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Outcome:
    """What a subcommand produced: exit code, text lines and a JSON result."""

    def __init__(self, code, lines, result, diagnostics=()):
        self.code = code
        self.lines = lines
        self.result = result
        self.diagnostics = list(diagnostics)


def _evaluator(m, f, force):
    frag = fragment_of(f)
    if frag is Fragment.NEITHER:
        raise FragmentError("formula mixes Kh with action modalities")
    return Checker(m, force) if frag is Fragment.ELKH else Evaluator(m)


def _force_note(m, force):
    if force and not check_perfect_recall(m).ok:
        return ["semantics not guaranteed: model lacks perfect recall"]
    return []


def cmd_validate(args):
    m = load_model(args.model)
    structural = validate_model(m)
    pr = check_perfect_recall(m)
    violations = [(v.kind, list(v.witness)) for v in structural.violations + pr.violations]
    if not violations:
        return Outcome(OK, ["ok: equivalences, ownership, perfect-recall"],
                       {"ok": True, "violations": []})
    lines = [f"{kind}: {' '.join(map(str, w))}" for kind, w in violations]
    return Outcome(INVALID, lines, {"ok": False, "violations": violations})


def cmd_check(args):
    m = load_model(args.model)
    m.index(args.state)
    f = parse_formula(args.formula)
    value = args.state in _evaluator(m, f, args.force).extension(f)
    return Outcome(OK if value else FALSE, [str(value).lower()], value,
                   _force_note(m, args.force))


def cmd_label(args):
    m = load_model(args.model)
    f = parse_formula(args.formula)
    ext = m.ordered(_evaluator(m, f, args.force).extension(f))
    return Outcome(OK, ext, ext, _force_note(m, args.force))


def cmd_synth(args):
    m = load_model(args.model)
    m.require_agent(args.agent)
    goal = parse_formula(args.goal)
    plan = synthesize_plan(m, args.agent, belief_state(m, args.state, args.agent), goal,
                           force=args.force)
    if plan is None:
        return Outcome(FALSE, ["UNSAT"], None, _force_note(m, args.force))
    return Outcome(OK, [str(plan)], str(plan), _force_note(m, args.force))


def cmd_exec(args):
    m = load_model(args.model)
    m.require_agent(args.agent)
    plan = parse_plan(args.plan)
    check_plan(m, plan, args.agent)
    out = m.ordered(execute_plan(m, plan, args.start))
    strong = strongly_executable(m, plan, args.start)
    result = {"terminal": out, "strongly_executable": strong}
    lines = ["{" + ",".join(out) + "}", f"strongly executable: {str(strong).lower()}"]
    if args.tree:
        tree = tree_from_plan(m, args.agent, plan, belief_state(m, args.start, args.agent))
        dot = tree_to_dot(m, tree)
        lines = dot.rstrip("\n").split("\n")
        result["tree"] = dot
    return Outcome(OK if strong else FALSE, lines, result)


def cmd_bisim(args):
    m = load_model(args.model)
    bp = largest_bisimulation(m)
    classes = [m.ordered(c) for c in sorted(bp.classes, key=lambda c: min(map(m.index, c)))]
    return Outcome(OK, ["{" + ",".join(c) + "}" for c in classes], classes)


def cmd_distinguish(args):
    m = load_model(args.model)
    f = distinguishing_formula(m, args.s, args.t)
    if f is None:
        return Outcome(FALSE, ["bisimilar"], None)
    return Outcome(OK, [print_formula(f)], print_formula(f))


def cmd_quotient(args):
    m = load_model(args.model)
    bts = quotient_system(m, args.agent)
    edges = [[m.ordered(b.block), a, m.ordered(c.block)] for b, a, c in bts.edges()]
    if args.dot:
        lines = quotient_to_dot(m, bts).rstrip("\n").split("\n")
    else:
        lines = [f"{m.fmt(b)} -{a}-> {m.fmt(c)}" for b, a, c in edges]
    return Outcome(OK, lines, {"domain": [m.ordered(b.block) for b in bts.domain],
                               "edges": edges})


def cmd_oracle(args):
    m = load_model(args.model)
    f = parse_formula(args.formula)
    if fragment_of(f) not in (Fragment.ELKH, Fragment.BOTH):
        raise FragmentError("oracle needs a know-how formula")
    fast = Checker(m).extension(f)
    slow = harness.brute_force_extension(m, f, harness.budget_from_env())
    rows = []
    for s in m.states:
        a, b = s in fast, s in slow
        rows.append({"state": s, "check": a, "oracle": b, "verdict": "AGREE" if a == b else
                     "DISAGREE"})
    lines = [f"{'state':<8} {'check':<6} {'oracle':<6} verdict"]
    lines += [f"{r['state']:<8} {str(r['check']).lower():<6} {str(r['oracle']).lower():<6} "
              f"{r['verdict']}" for r in rows]
    agree = all(r["verdict"] == "AGREE" for r in rows)
    return Outcome(OK if agree else FALSE, lines, rows)


def cmd_fuzz(args):
    params = harness.ModelParams(args.states, args.agents, args.actions, args.density, args.props)
    budget = harness.budget_from_env()
    first = None
    triples = axioms = 0
    start = time.perf_counter()
    for k in range(args.models):
        seed = args.seed + k
        m = harness.random_pr_model(params, seed)
        fast, slow = Checker(m), harness.Oracle(m, budget)
        for goal in harness.goal_battery(m, seed):
            a, b = fast.extension(goal), slow.extension(goal)
            triples += len(m.states)
            if a != b and first is None:
                s = m.ordered(a ^ b)[0]
                first = {"kind": "oracle disagreement", "seed": seed, "state": s,
                         "formula": print_formula(goal), "model": format_model(m)}
        report = harness.axiom_suite(m)
        axioms += report.checked
        if report.counterexamples and first is None:
            name, _, text, s = report.counterexamples[0]
            first = {"kind": f"axiom {name}", "seed": seed, "state": s, "formula": text,
                     "model": format_model(m)}
    elapsed = time.perf_counter() - start
    summary = {"models": args.models, "triples": triples, "axiom_instances": axioms,
               "counterexample": first, "seconds": round(elapsed, 3)}
    lines = [f"models: {args.models}  (model, state, goal) triples: {triples}  "
             f"axiom instances: {axioms}  time: {elapsed:.2f}s"]
    if first is None:
        lines.append("no counterexample")
    else:
        lines += [f"counterexample ({first['kind']}) seed={first['seed']} "
                  f"state={first['state']}", f"formula: {first['formula']}",
                  "model:", first["model"].rstrip("\n")]
    return Outcome(OK if first is None else FALSE, lines, summary)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON envelope")
    p = _Parser(prog="khow", description=__doc__.split("\n")[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help):
        sp = sub.add_parser(name, help=help, parents=[common])
        sp.set_defaults(fn=fn)
        return sp

    sp = add("validate", cmd_validate, "check model well-formedness and perfect recall")
    sp.add_argument("model")
    for name, fn, help in (("check", cmd_check, "evaluate a formula at a state"),
                           ("label", cmd_label, "list the states satisfying a formula")):
        sp = add(name, fn, help)
        sp.add_argument("model")
        if name == "check":
            sp.add_argument("--state", required=True)
        sp.add_argument("--formula", required=True)
        sp.add_argument("--force", action="store_true",
                        help="evaluate Kh even without perfect recall")
    sp = add("synth", cmd_synth, "synthesize a witness plan for Kh_i goal")
    sp.add_argument("model")
    sp.add_argument("--agent", required=True)
    sp.add_argument("--state", required=True)
    sp.add_argument("--goal", required=True)
    sp.add_argument("--force", action="store_true")
    sp = add("exec", cmd_exec, "run a plan from a state")
    sp.add_argument("model")
    sp.add_argument("--agent", required=True)
    sp.add_argument("--plan", required=True)
    sp.add_argument("--from", dest="start", required=True)
    sp.add_argument("--tree", action="store_true", help="print the execution tree as DOT")
    sp = add("bisim", cmd_bisim, "print bisimilarity classes")
    sp.add_argument("model")
    sp = add("distinguish", cmd_distinguish, "formula true at s and false at t")
    sp.add_argument("model")
    sp.add_argument("s")
    sp.add_argument("t")
    sp = add("quotient", cmd_quotient, "belief quotient of an agent")
    sp.add_argument("model")
    sp.add_argument("--agent", required=True)
    sp.add_argument("--dot", action="store_true")
    sp = add("fuzz", cmd_fuzz, "random perfect-recall models vs. oracle and axioms")
    sp.add_argument("--models", type=int, default=50)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--states", type=int, default=5)
    sp.add_argument("--agents", type=int, default=2)
    sp.add_argument("--actions", type=int, default=2)
    sp.add_argument("--props", type=int, default=2)
    sp.add_argument("--density", type=float, default=0.3)
    sp = add("oracle", cmd_oracle, "compare the checker against brute force")
    sp.add_argument("model")
    sp.add_argument("--formula", required=True)
    return p


def _error_code(exc):
    if isinstance(exc, BudgetExceededError):
        return BUDGET
    if isinstance(exc, ModelError):
        return INVALID
    # parse errors, unknown identifiers, wrong fragment, bad plans, unreadable files
    return USAGE


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    want_json = "--json" in argv
    args = None
    try:
        args = build_parser().parse_args(argv)
        out = args.fn(args)
    except (KhowError, OSError) as exc:
        code = _error_code(exc)
        print(f"khow: {exc}", file=stderr)
        if want_json:
            command = getattr(args, "command", None)
            inputs = _inputs(args) if args else {}
            print(json.dumps({"command": command, "inputs": inputs, "result": None,
                              "diagnostics": [str(exc)]}), file=stdout)
        return code
    for note in out.diagnostics:
        print(f"khow: {note}", file=stderr)
    if want_json:
        print(json.dumps({"command": args.command, "inputs": _inputs(args),
                          "result": out.result, "diagnostics": out.diagnostics}),
              file=stdout)
    else:
        for line in out.lines:
            print(line, file=stdout)
    return out.code


def _inputs(args):
    return {k: v for k, v in vars(args).items() if k not in ("fn", "json", "command")}


if __name__ == "__main__":
    sys.exit(main())

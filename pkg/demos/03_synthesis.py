"""From a know-how claim to an executable plan, and back through an execution tree."""

from khow import (belief_state, clinic, execute_on_belief_state, parse_formula, parse_plan,
                  plan_from_tree, print_plan, synthesize_plan, tree_from_plan)
from khow.kbp import tree_to_dot
from khow.planner import quotient_system

m = clinic()

# Agent 2's view of the world as a transition system over its belief states.
for b, a, c in quotient_system(m, "2").edges():
    print(f"{m.fmt(b.block)} -{a}-> {m.fmt(c.block)}")

# Plans witnessing Kh claims; None means no plan exists.
cases = [("1", "s1", "(K{2}q | K{2}~q) & Kh{2}~p"), ("2", "s3", "~p"), ("2", "s4", "~p"),
         ("2", "s1", "~p")]
for i, s, goal in cases:
    plan = synthesize_plan(m, i, s, parse_formula(goal))
    shown = "none" if plan is None else print_plan(plan)
    print(f"agent {i} from {s} to {goal!r}: {shown}")

# A hand-written joint plan, run from agent 1's initial uncertainty.
plan = parse_plan("a ; if K{2} q then { c } else { b }")
print("joint plan ends in", m.ordered(execute_on_belief_state(m, plan, belief_state(m, "s1", "1"))))

# Execution tree of agent 1's part, and the plan read back from it.
tree = tree_from_plan(m, "1", parse_plan("a"), belief_state(m, "s1", "1"))
print(tree_to_dot(m, tree), end="")
print("read back:", print_plan(plan_from_tree(m, "1", tree)))

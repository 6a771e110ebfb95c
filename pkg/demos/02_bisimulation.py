"""Bisimulation classes and formulas that tell states apart."""

from khow import (bisimilar, clinic, distinguishing_formula, largest_bisimulation, parse_model,
                  print_formula)
from khow.eal import Evaluator

m = clinic()
bp = largest_bisimulation(m)
print(f"clinic: {len(bp.classes)} classes after {bp.rounds} refinement rounds")

ev = Evaluator(m)
for s, t in [("s5", "s6"), ("s1", "s2"), ("s1", "s3"), ("s3", "s4")]:
    f = distinguishing_formula(m, s, t)
    ext = ev.extension(f)
    print(f"{s} vs {t}: {print_formula(f):<20} true at {s}: {s in ext}, at {t}: {t in ext}")

# Two copies of the same situation cannot be told apart by any formula.
twins = parse_model("""
agents: 1
actions[1]: a
states: u v w
trans: u -a-> w
trans: v -a-> w
val[u]: p
val[v]: p
""")
print("u ~ v:", bisimilar(twins, "u", "v"), "| formula:", distinguishing_formula(twins, "u", "v"))

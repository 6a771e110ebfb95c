"""Time the know-how checker on growing chain models."""

import time

from khow import check, parse_formula
from khow.harness import chain_model

goal = parse_formula("Kh{1}p")
for n in [100, 300, 1000, 3000]:
    m = chain_model(n)
    start = time.perf_counter()
    verdict = check(m, "s0", goal)
    print(f"n={n:>5}  Kh{{1}}p at s0: {verdict}  {time.perf_counter() - start:.4f}s")

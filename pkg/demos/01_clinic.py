"""Walk through the bundled clinic model.

Six states and two agents.  Agent 1 owns action ``a``; agent 2 owns ``b``
and ``c``.  The target is ``~p``, and ``q`` tells two cases apart that only
agent 2 can see after ``a`` has run.
"""

from khow import belief_partition, check, clinic, extension, format_model, parse_formula

m = clinic()
print(format_model(m))

# What each agent can tell apart.
for i in m.agents:
    print(f"agent {i} blocks:", [m.fmt(b.block) for b in belief_partition(m, i)])

# From s1 neither agent can force ~p on its own.
for text in ["Kh{1}~p", "Kh{2}~p"]:
    print(f"{text:<10} at s1: {check(m, 's1', parse_formula(text))}")

# Agent 1 can, however, force a state where agent 2 knows q's value
# and can force ~p from there.
goal = parse_formula("Kh{1}((K{2}q | K{2}~q) & Kh{2}~p)")
print("hand-off goal at s1:", check(m, "s1", goal))

# Extensions answer the same question for every state at once.
for text in ["p", "K{1}p", "Kh{2}~p", "Kh{1}~p"]:
    print(f"{text:<8} holds at", m.ordered(extension(m, parse_formula(text))))

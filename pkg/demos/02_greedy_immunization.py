"""Greedy immunization: nodes, hesitant groups, and repeated offers.

The saved-utility objective is famously neither submodular nor supermodular,
so the usual greedy intuition needs care. This demo first walks the two tiny
certainty-1 networks that witness both failures, then runs greedy on a random
graph with vaccine-hesitant groups and a multiset budget (several offers to
the same group).

Run: python demos/02_greedy_immunization.py
"""

import numpy as np

from immunet import GenConfig, generate
from immunet.cascade import IC, estimate_pi
from immunet.immunize import (
    ExactEvaluator,
    Group,
    Independent,
    MonteCarloEstimator,
    greedy,
    singleton_groups,
)
from immunet.oracle import counterexample_a, counterexample_b, exact_pi

print("-- why this objective is awkward ---------------------------------")
ga = counterexample_a()
vals = {s: exact_pi(ga, s).value for s in [(), (1,), (2,), (1, 2)]}
print(f"diamond graph: pi({{}})={vals[()]}, pi({{1}})={vals[(1,)]}, "
      f"pi({{2}})={vals[(2,)]}, pi({{1,2}})={vals[(1, 2)]}")
print("  adding node 2 to {1} gains 3 > gain of 2 alone (1): complementarity,")
print("  so pi is not submodular; greedy still lands on {1, 2} here:")
sel = greedy(ga, singleton_groups(ga), 2, IC, ExactEvaluator())
print(f"  greedy chose {sel.chosen} with gains {[g.mean for g in sel.gains]}")

gb = counterexample_b(3)
print(f"\npath graph: pi({{1}})={exact_pi(gb, {1}).value}, "
      f"pi({{2}})={exact_pi(gb, {2}).value}, pi({{1,2}})={exact_pi(gb, {1, 2}).value}")
print("  pi({1}) + pi({2}) > pi({1,2}) + pi({}): not supermodular either.")

print("\n-- greedy on a random network ------------------------------------")
g = generate(GenConfig("ws", 300, 6, r0=1.5, rng_seed=8)).with_seeds([0, 1, 2])
estimator = MonteCarloEstimator(replicates=600, master_seed=17)
sel = greedy(g, singleton_groups(g), 5, IC, estimator)
print("pick  node  est. gain    stderr")
for i, (gid, gain) in enumerate(zip(sel.chosen, sel.gains)):
    print(f"{i:4d}  {gid:4d}  {gain.mean:9.2f}  {gain.stderr:8.2f}")

print("\n-- hesitant groups and repeated offers ---------------------------")
# Three community groups with different acceptance rates; the budget may
# revisit a group: l offers are accepted with probability 1 - (1-q)^l.
members = np.array_split(np.arange(3, g.n), 3)
groups = [
    Group(i, tuple(int(u) for u in part), Independent(q))
    for i, (part, q) in enumerate(zip(members, (0.9, 0.5, 0.2)))
]
sel = greedy(g, groups, 4, IC, MonteCarloEstimator(400, 23), allow_multiset=True)
print(f"chosen groups in order: {sel.chosen} -> offers {sel.multiplicities()}")
final = estimate_pi(g, IC, groups=sel.plan(groups), replicates=4000, master_seed=29)
print(f"expected saved utility of the plan: {final.mean:.1f} +/- {final.stderr:.1f}")

"""
Finding thresholds from attack labels
=====================================

Writing decide and change thresholds by hand is error prone.  Given only
what each participant is willing to tolerate, ``synthesize`` looks for
thresholds that satisfy every requirement, or proves none exist.
"""

# %%
from hetquorum.config import homogeneous_config
from hetquorum.requirements import check_all
from hetquorum.scenario import bundled
from hetquorum.search import synthesize

# %%
# Start from the five-participant example with its thresholds stripped.
full = bundled("alice_eve").trust
attack_only = type(full)(full.participants, full.attack_A, full.attack_I)
res = synthesize(attack_only)
print("feasible:", res.feasible, " candidates explored:", res.explored)
for p in res.config.participants:
    print(f"  {p} decides on {res.config.decide[p]}")
print("checker agrees:", all(r.passed for r in check_all(res.config)))

# %%
# Classic bounds fall out of the same search.  Three participants cannot
# tolerate a Byzantine failure; four can tolerate one crash.
for n, c, b in [(3, 1, 1), (4, 1, 1), (4, 1, 0), (6, 1, 1)]:
    r = synthesize(homogeneous_config(n, c, b))
    verdict = "feasible" if r.feasible else ("infeasible" if r.exhaustive else "unknown")
    print(f"n={n} crash={c} byzantine={b}: {verdict}   (n > 3c+2b: {n > 3 * c + 2 * b})")

"""
Labels, trust and the five-participant example
==============================================

Alice (``a``) trusts the three servers ``c``, ``d`` and ``e`` and nobody
else; Bob and the servers tolerate any one of the four non-Alice
participants failing.  This script builds that configuration, runs the
requirement checks and asks who is still a guru once things go wrong.
"""

# %%
# Principals are monotone formulas over participants; ``&`` needs both,
# ``|`` needs either.  ``acts_for(p, q)`` holds when every coalition holding
# ``p`` also holds ``q``.
from hetquorum.principal import acts_for, parse_principal

p = parse_principal("c & d | d & e")
q = parse_principal("d")
print(f"{p}  acts for  {q}:", acts_for(p, q))
print(f"{q}  acts for  {p}:", acts_for(q, p))

# %%
# A label is a set of policies ``owner <-kind trustee``.  Joining two labels
# makes data trusted by whoever either side trusts; the result sits above
# both in the flow order.
from hetquorum.label import flows_to, join, meet, parse_label

l1 = parse_label("{ a <-I c }")
l2 = parse_label("{ a <-I d }")
print("join:", join(l1, l2), " meet:", meet(l1, l2))
print("l1 flows to the join:", flows_to(l1, join(l1, l2)))

# %%
# The bundled scenario carries the full configuration.
from hetquorum.scenario import bundled

cfg = bundled("alice_eve").trust
print("\nAlice decides on", cfg.decide["a"])
print("Alice's availability threshold", cfg.sys_A["a"])

# %%
# Six checks guard agreement and progress.  All of them pass here.
from hetquorum.requirements import FailureAssignment, check_all, classify

for report in check_all(cfg):
    print(f"  {report.name:<20} {'pass' if report.passed else 'FAIL'}")

# %%
# Who keeps their guarantees?  With Alice lying and Bob crashed the three
# servers remain gurus.  A single lying server turns every correct
# participant into a chump: Alice only planned for Bob to lie, and the
# others only for Alice.
for fa in (FailureAssignment(crashed=["b"], byzantine=["a"]),
           FailureAssignment(byzantine=["c"])):
    roles = classify(cfg, fa)
    print(fa.crashed or "-", fa.byzantine or "-", {p: r.value for p, r in roles.items()})

"""
How fast do participants decide?
================================

Each trial shuffles message delivery, and every undecided participant that
cannot settle on a value picks one at random.  The decision curve is the
mean fraction of gurus decided by each round.
"""

# %%
from hetquorum.scenario import bundled
from hetquorum.simnet import run_experiment

TRIALS, SEED = 1000, 1


def show(name):
    curve = run_experiment(bundled(name).sim_config(trials=TRIALS, seed=SEED))
    bar = "".join("#" if f >= 0.5 else ("+" if f >= 0.05 else ".")
                  for f in curve.fraction[:32])
    print(f"{name:<20} median {curve.median!s:>3}  p95 {curve.p95!s:>3}  "
          f"unsafe runs {len(curve.violations)}  {bar}")
    return curve


# %%
# Without failures the heterogeneous configuration needs fewer messages per
# round than a nine-node counting configuration, and it finishes earlier.
show("alice_eve")
show("bosco9")

# %%
# With Alice equivocating and Bob crashed the gap widens: the counting rule
# now waits for the one arrival order in which the liar is heard last.
show("alice_eve_failures")
show("bosco9_failures")

# %%
# Curves export to CSV for plotting elsewhere.
print(run_experiment(bundled("crash4").sim_config(trials=200)).to_csv().splitlines()[:4])

"""
Ordered reliable broadcast with echoes
======================================

A designated sender numbers its messages; every echoer relays what it sees
and delivers a message once enough matching relays arrive, strictly in
sequence order.  A sender caught signing two values for one slot is
exposed and correct echoers stop.
"""

# %%
from hetquorum.oarcast import (EchoerState, EchoMessage, check_oarcast_liveness,
                               check_oarcast_safety, homogeneous_oarcast,
                               run_oarcast_experiment)

cfg = homogeneous_oarcast(4, 1)
print("threshold for echoer 1:", cfg.threshold["1"])
print("safety:", check_oarcast_safety(cfg).passed, " liveness:", check_oarcast_liveness(cfg).passed)

# %%
# Step one echoer by hand.  The sender's own copy and one more relay make
# three matching votes, counting the echoer itself.
st = EchoerState("1", cfg)
for msg in (EchoMessage("0", "0", 0, "hello"), EchoMessage("0", "2", 0, "hello")):
    print(msg.relayer, "->", st.receive(msg))

# %%
# A conflicting value for the same slot makes the echoer cease.
st = EchoerState("3", cfg)
st.receive(EchoMessage("0", "0", 0, "x"))
print(st.receive(EchoMessage("0", "2", 0, "y")))

# %%
# Randomized runs with one misbehaving echoer or an equivocating sender.
s = run_oarcast_experiment(cfg, trials=2000, seed=3)
print(f"divergent {s.divergent}, order violations {s.order_violations}, "
      f"missed cease {s.missed_cease}, equivocations seen {s.equivocations}")

import numpy as np
import pytest

from hetquorum.config import homogeneous_config
from hetquorum.engine import (Broadcast, CountingPredicates, Decide, Deliver, EnterNextRound,
                              FirstInFixedOrder, InvariantViolation, LabelPredicates, Message,
                              ParticipantState, Propose, UniformRandom, sufficient_to_change,
                              sufficient_to_decide, sufficiently_available)

import configs


def _state(cfg, pid, **kw):
    return ParticipantState(pid, LabelPredicates(cfg), **kw)


def _feed(state, rnd, values):
    out = []
    for sender, v in values.items():
        out += state.step(Deliver(Message(0, rnd, sender, v)))
    return out


def test_propose_broadcasts_round_one():
    s = _state(homogeneous_config(4, 1, 0), "0")
    assert s.step(Propose("v")) == [Broadcast(Message(0, 1, "0", "v"))]
    with pytest.raises(InvariantViolation):
        s.step(Propose("w"))


def test_unanimous_proposals_decide_in_round_one():
    cfg = homogeneous_config(4, 1, 0)
    s = _state(cfg, "0")
    s.step(Propose("v"))
    acts = _feed(s, 1, {p: "v" for p in cfg.participants})
    assert Decide("v", 1) in acts
    assert s.decided == ("v", 1)
    assert EnterNextRound("v", 2) in acts


def test_waits_until_sufficiently_available():
    cfg = homogeneous_config(4, 1, 0)
    s = _state(cfg, "0")
    s.step(Propose("v"))
    assert _feed(s, 1, {"0": "v", "1": "v"}) == []
    assert _feed(s, 1, {"2": "w"})  # three of four completes the round


def test_counting_matches_labels_bosco_nine():
    cfg = homogeneous_config(9, 2, 1)
    lab, cnt = LabelPredicates(cfg), CountingPredicates(9, 2, 1)
    for r in range(9):
        for m in range(1 << 9):
            assert lab.avail(r, m) == cnt.avail(r, m)
            assert lab.decide(r, m) == cnt.decide(r, m)
            assert lab.change(r, m) == cnt.change(r, m)


def test_fall_through_to_selection():
    cfg = homogeneous_config(4, 1, 0)
    s = _state(cfg, "0")
    s.step(Propose("x"))
    # split 2/1: "a" has two senders, enough to change (> 1.5) but not decide
    acts = _feed(s, 1, {"0": "b", "1": "a", "2": "a"})
    assert EnterNextRound("a", 2) in acts
    s = _state(homogeneous_config(7, 2, 0), "0")
    s.step(Propose("x"))
    # no value reaches the change threshold of three
    acts = _feed(s, 1, {"0": "c", "1": "b", "2": "a", "3": "a", "4": "b"})
    assert EnterNextRound("a", 2) in acts


def test_uniform_selection_distribution():
    sel = UniformRandom(0)
    draws = [sel(["v1", "v1", "v2"]) for _ in range(100_000)]
    k = draws.count("v1")
    expected = 100_000 * 2 / 3
    chi2 = (k - expected) ** 2 / expected + (k - expected) ** 2 / (100_000 - expected)
    assert chi2 < 10.83  # p = 0.001 with one degree of freedom
    with pytest.raises(ValueError):
        sel([])


def test_first_in_fixed_order():
    assert FirstInFixedOrder()(["b", "a", "c"]) == "a"
    with pytest.raises(ValueError):
        FirstInFixedOrder()([])


def test_selection_seed_accepts_generator():
    seeded = UniformRandom(3)
    shared = UniformRandom(np.random.default_rng(3))
    assert [seeded(range(10)) for _ in range(20)] == [shared(range(10)) for _ in range(20)]


def test_alice_eve_predicates():
    cfg = configs.alice_eve()
    alice, bob = _state(cfg, "a"), _state(cfg, "b")
    assert sufficiently_available(alice, "acde")
    assert not sufficiently_available(alice, "acd")
    assert sufficient_to_decide(bob, "bcd")
    assert sufficient_to_change(bob, "cd") and not sufficient_to_decide(bob, "cd")
    for s in (alice, bob):
        assert not sufficient_to_decide(s, "") and not sufficient_to_change(s, "")


def test_later_rounds_buffered_earlier_dropped():
    cfg = homogeneous_config(4, 1, 0)
    s = _state(cfg, "0")
    s.step(Propose("v"))
    assert _feed(s, 2, {p: "v" for p in "123"}) == []
    acts = _feed(s, 1, {p: "v" for p in "012"})
    # round 1 decides, and the buffered round-2 messages complete round 2 at once
    assert Decide("v", 1) in acts
    assert EnterNextRound("v", 3) in acts
    assert s.round == 3
    assert _feed(s, 1, {"3": "w"}) == []


def test_duplicates_and_foreign_messages_ignored():
    s = _state(homogeneous_config(4, 1, 0), "0")
    s.step(Propose("v"))
    assert _feed(s, 1, {"1": "v"}) == []
    assert s.step(Deliver(Message(0, 1, "1", "w"))) == []
    assert s.received[1]["1"].value == "v"
    assert s.step(Deliver(Message(9, 1, "2", "v"))) == []
    assert s.step(Deliver(Message(0, 1, "zz", "v"))) == []


def test_decision_pins_value():
    cfg = homogeneous_config(4, 1, 0)
    s = _state(cfg, "0")
    s.step(Propose("a"))
    _feed(s, 1, {p: "a" for p in "012"})
    # "b" would be adopted by an undecided participant
    acts = _feed(s, 2, {"1": "b", "2": "b", "3": "a"})
    assert EnterNextRound("a", 3) in acts


def test_conflicting_decision_detected():
    # deciding on a single vote lets a later round contradict the first decision
    cnt = CountingPredicates(3, 0, 0)
    cnt.decide = lambda r, m: m != 0
    s = ParticipantState("0", cnt)
    s.step(Propose("a"))
    _feed(s, 1, {p: "a" for p in "012"})
    with pytest.raises(InvariantViolation):
        _feed(s, 2, {p: "0" for p in "012"})
    lax = ParticipantState("0", cnt, strict=False)
    lax.step(Propose("a"))
    _feed(lax, 1, {p: "a" for p in "012"})
    _feed(lax, 2, {p: "0" for p in "012"})
    assert lax.conflicts == [("0", 2)] and lax.decided == ("a", 1)


def test_unknown_event():
    s = _state(homogeneous_config(4, 1, 0), "0")
    with pytest.raises(TypeError):
        s.step("nope")

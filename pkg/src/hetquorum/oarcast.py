"""Ordered asynchronous reliable broadcast with label thresholds.

A designated sender numbers its messages.  Every echoer relays each new
sender-signed message to all echoers once; an echoer that sees two
different sender-signed values for one sequence number ceases.  An echoer
delivers sequence number ``k`` after delivering ``0..k-1`` once the
relayers of one value reach its integrity threshold ``T_e``.

An echoer ``e`` tolerates an attacker set ``A`` when the integrity meet of
``A``'s relays to ``e`` does not reach ``I^e_a``, the same test as a liar set.
Passing ``literal=True`` to the checkers uses the strict order
``I^e_a ⊏ meet`` instead, which over single-participant message labels
only ever admits sets inside the intersection of ``I^e_a``'s clauses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .config import (check_capacity, flows_table, maximal_masks, minimal_masks,
                     standard_messages)
from .label import (AVAILABILITY, INTEGRITY, Label, Policy, flows_to, join_all,
                    meet, project, strictly_flows_to)
from .principal import Principal, conj_of, disj_of, threshold
from .requirements import Report, _report

__all__ = [
    "EchoMessage", "Echo", "Deliver", "Cease", "EchoerState", "on_receive",
    "OarcastConfig", "homogeneous_oarcast", "check_oarcast_safety",
    "check_oarcast_liveness", "OarcastTrace", "run_oarcast_trial",
    "run_oarcast_experiment", "OarcastSummary",
]


@dataclass(frozen=True, order=True)
class EchoMessage:
    author: str
    relayer: str
    seq: int
    value: object


@dataclass(frozen=True)
class Echo:
    message: EchoMessage


@dataclass(frozen=True)
class Deliver:
    seq: int
    value: object
    label: Label


@dataclass(frozen=True)
class Cease:
    seq: int
    values: Tuple[object, object]


@dataclass(frozen=True)
class OarcastConfig:
    """Echoers, the designated sender, and per-echoer labels.

    ``threshold[e]`` is ``T_e`` and ``attack[e]`` is ``I^e_a`` (integrity
    labels owned by ``e``); ``sender_availability`` is ``A_s``.
    """

    echoers: Tuple[str, ...]
    sender: str
    threshold: Mapping[str, Label]
    attack: Mapping[str, Label]
    sender_availability: Label = field(default_factory=Label)
    messages: Mapping[Tuple[str, str], Label] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "echoers", tuple(self.echoers))
        if self.sender not in self.echoers:
            raise ValueError("the designated sender must be an echoer")
        for e in self.echoers:
            if e not in self.threshold or e not in self.attack:
                raise ValueError(f"echoer {e!r} lacks a threshold or attack label")
        if not self.messages:
            object.__setattr__(self, "messages", standard_messages(self.echoers))
        check_capacity(len(self.echoers))

    @property
    def n(self) -> int:
        return len(self.echoers)

    def index(self, e: str) -> int:
        return self.echoers.index(e)

    def _integrity(self, e: str) -> List[Label]:
        return [project(self.messages[(q, e)], INTEGRITY) for q in self.echoers]

    @cached_property
    def deliver_tables(self) -> List[List[bool]]:
        return [flows_table(e, self._integrity(e), self.threshold[e]).tolist()
                for e in self.echoers]

    @cached_property
    def tolerated_tables(self) -> List[np.ndarray]:
        return [~flows_table(e, self._integrity(e), self.attack[e])
                for e in self.echoers]

    def strict_tables(self) -> List[np.ndarray]:
        """``I^e_a ⊏ meet`` read literally, by enumeration."""
        out = []
        for e in self.echoers:
            labs = self._integrity(e)
            row = np.zeros(1 << self.n, dtype=bool)
            for m in range(1 << self.n):
                mt = meet(*(labs[i] for i in range(self.n) if m >> i & 1))
                row[m] = strictly_flows_to(self.attack[e], mt,
                                           viewers=[Principal.atom(e)])
            out.append(row)
        return out

    def delivered_label(self, e: str) -> Label:
        """Integrity ``I^e_a``; availability ``A_s`` met with the join, over
        sender sets whose integrity reaches ``I^e_a``, of their availability."""
        n = self.n
        fits = ~self.tolerated_tables[self.index(e)]
        avail = [project(self.messages[(q, e)], AVAILABILITY) for q in self.echoers]
        owner = Principal.atom(e)
        single = all(p.owner == owner for lab in avail for p in lab.policies)
        if single:
            views = [lab.view(AVAILABILITY, owner) for lab in avail]
            clauses = []
            for m in np.flatnonzero(fits):
                clauses.append(conj_of(views[i] for i in range(n) if int(m) >> i & 1))
            joined = Label([Policy(owner, AVAILABILITY, disj_of(clauses))])
        else:
            joined = join_all(meet(*(avail[i] for i in range(n) if int(m) >> i & 1))
                              for m in np.flatnonzero(fits))
        return meet(project(self.attack[e], INTEGRITY), self.sender_availability, joined)


def homogeneous_oarcast(n_or_echoers, byzantine: int, sender: Optional[str] = None
                        ) -> OarcastConfig:
    """Each echoer tolerates any ``byzantine`` others and delivers on
    ``⌊(n+b)/2⌋+1`` matching relays."""
    E = (tuple(str(i) for i in range(n_or_echoers)) if isinstance(n_or_echoers, int)
         else tuple(n_or_echoers))
    n, b = len(E), byzantine
    k = (n + b) // 2 + 1
    T, IA = {}, {}
    for e in E:
        o = Principal.atom(e)
        T[e] = Label([Policy(o, INTEGRITY, threshold(k, E))])
        IA[e] = Label([Policy(o, INTEGRITY, o | threshold(b + 1, E))])
    s = sender or E[0]
    return OarcastConfig(E, s, T, IA, Label([Policy(Principal.atom(x), AVAILABILITY, Principal.atom(s)) for x in E]))


# -- static conditions ------------------------------------------------------

def _tolerated(cfg: OarcastConfig, literal: bool) -> List[List[int]]:
    rows = cfg.strict_tables() if literal else cfg.tolerated_tables
    return [maximal_masks(np.flatnonzero(r).tolist()) for r in rows]


def _names(cfg: OarcastConfig, mask: int) -> List[str]:
    return [e for i, e in enumerate(cfg.echoers) if mask >> i & 1]


def check_oarcast_safety(cfg: OarcastConfig, limit: Optional[int] = None,
                         literal: bool = False) -> Report:
    """No tolerated attacker ``A`` plus ``B`` can reach ``T_e`` while
    ``A`` plus a set ``C`` disjoint from ``B`` reaches ``T_e'``.

    Thresholds are upward closed, so it suffices to take maximal ``A``,
    minimal ``B`` and ``C`` the complement of ``B``.
    """
    full = (1 << cfg.n) - 1
    deliver = cfg.deliver_tables
    bad = []
    for ei, e in enumerate(cfg.echoers):
        reach = minimal_masks(m for m in range(1 << cfg.n) if deliver[ei][m])
        for A in _tolerated(cfg, literal)[ei]:
            Bs = minimal_masks(X & ~A for X in reach)
            for fi, f in enumerate(cfg.echoers):
                for B in Bs:
                    AC = full & ~B
                    if deliver[fi][AC]:
                        bad.append({"e": e, "e_prime": f, "A": _names(cfg, A),
                                    "B": _names(cfg, B), "C": _names(cfg, AC & ~A)})
    return _report("oarcast_safety", bad, limit)


def check_oarcast_liveness(cfg: OarcastConfig, limit: Optional[int] = None,
                           literal: bool = False) -> Report:
    """Whatever attacker ``e`` tolerates, the rest reach ``T_e``."""
    full = (1 << cfg.n) - 1
    bad = []
    for ei, e in enumerate(cfg.echoers):
        for A in _tolerated(cfg, literal)[ei]:
            if not cfg.deliver_tables[ei][full & ~A]:
                bad.append({"e": e, "A": _names(cfg, A), "B": _names(cfg, full & ~A)})
    return _report("oarcast_liveness", bad, limit)


# -- echoer state machine ---------------------------------------------------

@dataclass
class EchoerState:
    id: str
    cfg: OarcastConfig
    next_seq: int = 0
    pools: Dict[int, Dict[object, Set[str]]] = field(default_factory=dict)
    ceased: bool = False
    delivered: List[Tuple[int, object, Label]] = field(default_factory=list)

    def __post_init__(self):
        self.index = self.cfg.index(self.id)
        self._bit = {e: 1 << i for i, e in enumerate(self.cfg.echoers)}
        self._table = self.cfg.deliver_tables[self.index]
        self._label = None

    @property
    def sender(self) -> str:
        return self.cfg.sender

    def label(self) -> Label:
        if self._label is None:
            self._label = self.cfg.delivered_label(self.id)
        return self._label

    def receive(self, m: EchoMessage) -> List[Union[Echo, Deliver, Cease]]:
        if self.ceased or m.author != self.sender or m.relayer not in self._bit:
            return []
        pool = self.pools.setdefault(m.seq, {})
        others = [v for v in pool if v != m.value]
        if others or (m.seq < self.next_seq and self._delivered_value(m.seq) != m.value):
            self.ceased = True
            first = others[0] if others else self._delivered_value(m.seq)
            return [Cease(m.seq, (first, m.value))]
        actions: List[Union[Echo, Deliver, Cease]] = []
        relayers = pool.get(m.value)
        if relayers is None:
            relayers = pool[m.value] = set()
            # first sight of this sender-signed value: relay it, count ourselves
            relayers.add(self.id)
            actions.append(Echo(EchoMessage(m.author, self.id, m.seq, m.value)))
        relayers.add(m.relayer)
        actions.extend(self._try_deliver())
        return actions

    def _delivered_value(self, seq: int):
        for s, v, _ in self.delivered:
            if s == seq:
                return v
        return None

    def _try_deliver(self) -> List[Deliver]:
        out = []
        while self.next_seq in self.pools:
            pool = self.pools[self.next_seq]
            ready = None
            for v, rs in pool.items():
                m = 0
                for r in rs:
                    m |= self._bit[r]
                if self._table[m]:
                    ready = v
                    break
            if ready is None:
                break
            d = Deliver(self.next_seq, ready, self.label())
            self.delivered.append((d.seq, d.value, d.label))
            out.append(d)
            self.next_seq += 1
        return out


def on_receive(state: EchoerState, m: EchoMessage):
    return state.receive(m)


# -- simulation -------------------------------------------------------------

SENDER_MODES = ("correct", "equivocate", "partial")
ECHOER_MODES = ("silent", "selective", "split")


@dataclass
class OarcastTrace:
    sent: List[object]
    delivered: Dict[str, List[Tuple[int, object]]]
    ceased: Dict[str, bool]
    saw_conflict: Dict[str, bool]
    gurus: List[str]
    faulty: List[str]
    sender_correct: bool

    def divergent(self) -> List[str]:
        out = []
        by_seq: Dict[int, Dict[object, str]] = {}
        for e in self.gurus:
            for s, v in self.delivered[e]:
                seen = by_seq.setdefault(s, {})
                seen.setdefault(v, e)
        for s, vals in by_seq.items():
            if len(vals) > 1:
                out.append(f"seq {s}: gurus delivered {sorted(map(str, vals))}")
        return out

    def order_faithful(self) -> bool:
        if not self.sender_correct:
            return True
        for e, ds in self.delivered.items():
            if e in self.faulty:
                continue
            if [v for _, v in ds] != self.sent[:len(ds)]:
                return False
        return True

    def ceased_on_conflict(self) -> bool:
        return all(self.ceased[e] for e, saw in self.saw_conflict.items()
                   if saw and e not in self.faulty)

    def complete(self) -> bool:
        return all(len(self.delivered[e]) == len(self.sent) for e in self.gurus)


def run_oarcast_trial(cfg: OarcastConfig, seed: int, trial: int, messages: int = 3,
                      faulty: Optional[str] = None, sender_mode: str = "correct",
                      echoer_mode: str = "silent") -> OarcastTrace:
    """One run with every delivery order drawn uniformly from the messages
    in flight.  ``faulty`` names at most one Byzantine echoer (possibly the
    sender)."""
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(trial,))))
    E = cfg.echoers
    s = cfg.sender
    if sender_mode != "correct":
        faulty = s
    bad = {faulty} if faulty else set()
    sent = [f"m{k}" for k in range(messages)]
    states = {e: EchoerState(e, cfg) for e in E if e not in bad}
    saw: Dict[str, Dict[int, set]] = {e: {} for e in E}
    flight: List[Tuple[str, EchoMessage]] = []

    def post(msg: EchoMessage, to: Sequence[str]):
        for r in to:
            flight.append((r, msg))

    others_of = {e: [x for x in E if x != e] for e in E}
    if sender_mode == "correct":
        for k, v in enumerate(sent):
            post(EchoMessage(s, s, k, v), others_of[s])
            if s in states:
                for a in states[s].receive(EchoMessage(s, s, k, v)):
                    if isinstance(a, Echo):
                        post(a.message, others_of[s])
    else:
        for k, v in enumerate(sent):
            for r in others_of[s]:
                if sender_mode == "equivocate":
                    val = v if rng.random() < 0.5 else f"{v}'"
                    post(EchoMessage(s, s, k, val), [r])
                elif rng.random() < 0.5:
                    post(EchoMessage(s, s, k, v), [r])

    # Byzantine relays: what the faulty echoer has seen, resent selectively
    while flight:
        i = int(rng.integers(len(flight)))
        flight[i], flight[-1] = flight[-1], flight[i]
        to, msg = flight.pop()
        saw[to].setdefault(msg.seq, set()).add(msg.value)
        if to in bad:
            if msg.relayer == to or sender_mode != "correct" and to == s:
                continue
            if echoer_mode == "selective":
                post(EchoMessage(msg.author, to, msg.seq, msg.value),
                     [x for x in others_of[to] if rng.random() < 0.5])
            elif echoer_mode == "split":
                half = [x for x in others_of[to] if (cfg.index(x) + msg.seq) & 1]
                post(EchoMessage(msg.author, to, msg.seq, msg.value), half)
            continue
        st = states[to]
        for a in st.receive(msg):
            if isinstance(a, Echo):
                post(a.message, others_of[to])

    correct = [e for e in E if e not in bad]
    fmask = 0
    for i, e in enumerate(E):
        if e in bad:
            fmask |= 1 << i
    gurus = [e for e in correct if cfg.tolerated_tables[cfg.index(e)][fmask]]
    return OarcastTrace(
        sent=sent,
        delivered={e: [(sq, v) for sq, v, _ in states[e].delivered] if e in states else []
                   for e in E},
        ceased={e: (states[e].ceased if e in states else False) for e in E},
        saw_conflict={e: any(len(v) > 1 for v in saw[e].values()) for e in E},
        gurus=gurus,
        faulty=sorted(bad),
        sender_correct=sender_mode == "correct",
    )


@dataclass
class OarcastSummary:
    trials: int
    divergent: int = 0
    order_violations: int = 0
    missed_cease: int = 0
    incomplete: int = 0
    equivocations: int = 0
    details: List[str] = field(default_factory=list)

    def ok(self) -> bool:
        return not (self.divergent or self.order_violations or self.missed_cease
                    or self.incomplete)


def run_oarcast_experiment(cfg: OarcastConfig, trials: int = 1000, seed: int = 0,
                           messages: int = 3) -> OarcastSummary:
    """Randomized adversaries within one tolerated Byzantine echoer."""
    out = OarcastSummary(trials)
    pick = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1 << 30,)))
    E = cfg.echoers
    for t in range(trials):
        sender_mode = SENDER_MODES[int(pick.integers(len(SENDER_MODES)))]
        echoer_mode = ECHOER_MODES[int(pick.integers(len(ECHOER_MODES)))]
        faulty = None
        if sender_mode == "correct":
            choice = int(pick.integers(len(E) + 1))
            faulty = E[choice] if choice < len(E) and E[choice] != cfg.sender else None
        tr = run_oarcast_trial(cfg, seed, t, messages, faulty, sender_mode, echoer_mode)
        div = tr.divergent()
        if div:
            out.divergent += 1
            out.details.extend(f"trial {t}: {d}" for d in div)
        if not tr.order_faithful():
            out.order_violations += 1
            out.details.append(f"trial {t}: delivery order differs from the sender's")
        if not tr.ceased_on_conflict():
            out.missed_cease += 1
            out.details.append(f"trial {t}: an echoer saw an equivocation and kept going")
        if sender_mode == "equivocate" and any(tr.saw_conflict.values()):
            out.equivocations += 1
        if tr.sender_correct and not tr.complete():
            out.incomplete += 1
            out.details.append(f"trial {t}: a guru missed a correct sender's message")
    return out

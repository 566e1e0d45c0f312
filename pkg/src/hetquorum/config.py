"""Trust configurations and their compiled per-participant predicates."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .label import (AVAILABILITY, INTEGRITY, KINDS, Label, Policy, meet,
                    project)
from .principal import (NO_DELEGATIONS, Delegations, Principal, acts_for,
                        threshold)

DEFAULT_CAPACITY = 12


class CapacityError(RuntimeError):
    """Raised when a subset enumeration would exceed the configured cap."""


def capacity(default: int = DEFAULT_CAPACITY) -> int:
    env = os.environ.get("HETQUORUM_CAPACITY")
    return int(env) if env else default


def check_capacity(n: int, limit: Optional[int] = None) -> None:
    limit = capacity() if limit is None else limit
    if n > limit:
        raise CapacityError(
            f"{n} participants exceeds enumeration capacity {limit} "
            "(set HETQUORUM_CAPACITY to raise it)")


def standard_messages(participants: Sequence[str]) -> Dict[Tuple[str, str], Label]:
    """``l(m^p_q) = {q <-A p ; q <-I p}``: the receiver trusts the sender alone."""
    out = {}
    for p in participants:
        for q in participants:
            rp, sp = Principal.atom(q), Principal.atom(p)
            out[(p, q)] = Label([Policy(rp, AVAILABILITY, sp),
                                 Policy(rp, INTEGRITY, sp)])
    return out


@dataclass(frozen=True)
class TrustConfig:
    """Per-participant attack labels and thresholds plus per-edge message labels.

    ``messages`` is keyed ``(sender, receiver)``.  Threshold maps may be
    empty for an attack-only configuration (the input to synthesis).
    """

    participants: Tuple[str, ...]
    attack_A: Mapping[str, Label]
    attack_I: Mapping[str, Label]
    sys_A: Mapping[str, Label] = field(default_factory=dict)
    change: Mapping[str, Label] = field(default_factory=dict)
    decide: Mapping[str, Label] = field(default_factory=dict)
    messages: Mapping[Tuple[str, str], Label] = field(default_factory=dict)
    delegations: Delegations = NO_DELEGATIONS

    def __post_init__(self):
        object.__setattr__(self, "participants", tuple(self.participants))
        if not self.participants:
            raise ValueError("a trust configuration needs participants")
        if len(set(self.participants)) != len(self.participants):
            raise ValueError("duplicate participant ids")
        if not self.messages:
            object.__setattr__(self, "messages", standard_messages(self.participants))
        for p in self.participants:
            for name in ("attack_A", "attack_I", "sys_A", "change", "decide"):
                table = getattr(self, name)
                if name.startswith("attack") and p not in table:
                    raise ValueError(f"{name} missing for participant {p!r}")
                lab = table.get(p)
                if lab is None:
                    continue
                for pol in lab.policies:
                    if pol.owner != Principal.atom(p):
                        raise ValueError(
                            f"{name}[{p}] contains policy {pol} not owned by {p}")
        for p in self.participants:
            for q in self.participants:
                if (p, q) not in self.messages:
                    raise ValueError(f"message label for {p}->{q} missing")

    @property
    def n(self) -> int:
        return len(self.participants)

    @property
    def has_thresholds(self) -> bool:
        return all(p in self.sys_A and p in self.change and p in self.decide
                   for p in self.participants)

    def index(self, p: str) -> int:
        return self.participants.index(p)

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for x in names:
            m |= 1 << self.index(x)
        return m

    def names(self, mask: int) -> FrozenSet[str]:
        return frozenset(p for i, p in enumerate(self.participants) if mask >> i & 1)

    def msg(self, sender: str, receiver: str) -> Label:
        return self.messages[(sender, receiver)]

    # aggregates are recomputed from the per-participant maps on first use
    @cached_property
    def A_sys(self) -> Label:
        return meet(*self.sys_A.values())

    @cached_property
    def C(self) -> Label:
        return meet(*self.change.values())

    @cached_property
    def D(self) -> Label:
        return meet(*self.decide.values())

    @cached_property
    def A_attack(self) -> Label:
        return meet(*self.attack_A.values())

    @cached_property
    def I_attack(self) -> Label:
        return meet(*self.attack_I.values())

    @cached_property
    def tables(self) -> "Tables":
        return Tables(self)

    def with_thresholds(self, sys_A, change, decide) -> "TrustConfig":
        return TrustConfig(self.participants, self.attack_A, self.attack_I,
                           dict(sys_A), dict(change), dict(decide),
                           self.messages, self.delegations)

    def with_attack(self, attack_A, attack_I) -> "TrustConfig":
        return TrustConfig(self.participants, dict(attack_A), dict(attack_I),
                           self.sys_A, self.change, self.decide,
                           self.messages, self.delegations)


def _views_by_mask(views: List[Principal]) -> List[Principal]:
    """Conjunction of ``views[i]`` over the members of every mask."""
    out = [None] * (1 << len(views))
    out[0] = Principal([[]])
    for mask in range(1, len(out)):
        low = mask & -mask
        out[mask] = out[mask ^ low] & views[low.bit_length() - 1]
    return out


def flows_table(viewer: str, per_member: Sequence[Label], bound: Label,
                d: Delegations = NO_DELEGATIONS) -> np.ndarray:
    """``T[S] = (meet of per_member[i] for i in S) ⊑ bound``, judged by ``viewer``.

    The view of a meet is the conjunction of views, so the table is filled
    by one conjunction per mask.
    """
    x = Principal.atom(viewer)
    out = np.ones(1 << len(per_member), dtype=bool)
    for kind in KINDS:
        target = bound.view(kind, x, d)
        cum = _views_by_mask([lab.view(kind, x, d) for lab in per_member])
        out &= np.fromiter((acts_for(v, target, d) for v in cum),
                           dtype=bool, count=len(cum))
    return out


class Tables:
    """Boolean tables over sender masks, one row per participant."""

    def __init__(self, cfg: TrustConfig):
        check_capacity(cfg.n)
        self.cfg = cfg
        self.n = cfg.n
        self.full = (1 << cfg.n) - 1
        P = cfg.participants
        d = cfg.delegations
        self.liar = np.zeros((self.n, 1 << self.n), dtype=bool)
        self.crash = np.zeros_like(self.liar)
        for i, p in enumerate(P):
            own = Principal.atom(p)
            integ = [Label([Policy(own, INTEGRITY, Principal.atom(x))]) for x in P]
            avail = [Label([Policy(own, AVAILABILITY, Principal.atom(x))]) for x in P]
            self.liar[i] = ~flows_table(p, integ, cfg.I_attack, d)
            self.crash[i] = ~flows_table(p, avail, cfg.A_attack, d)
        if cfg.has_thresholds:
            self.avail = np.zeros_like(self.liar)
            self.change = np.zeros_like(self.liar)
            self.decide = np.zeros_like(self.liar)
            for i, p in enumerate(P):
                full = [cfg.msg(x, p) for x in P]
                avail = [project(l, AVAILABILITY) for l in full]
                self.avail[i] = flows_table(p, avail, cfg.A_sys, d)
                self.change[i] = flows_table(p, full, cfg.C, d)
                self.decide[i] = flows_table(p, full, cfg.D, d)

    def family(self, table: np.ndarray) -> List[int]:
        return [int(m) for m in np.flatnonzero(table)]


def minimal_masks(masks: Iterable[int]) -> List[int]:
    ms = sorted(set(masks), key=lambda m: (bin(m).count("1"), m))
    out: List[int] = []
    for m in ms:
        if not any(k & m == k for k in out):
            out.append(m)
    return out


def maximal_masks(masks: Iterable[int]) -> List[int]:
    ms = sorted(set(masks), key=lambda m: (-bin(m).count("1"), m))
    out: List[int] = []
    for m in ms:
        if not any(k & m == m for k in out):
            out.append(m)
    return out


def down_closure_table(n: int, generators: Iterable[int]) -> np.ndarray:
    masks = np.arange(1 << n)
    out = np.zeros(1 << n, dtype=bool)
    for g in generators:
        out |= (masks & ~g) == 0
    return out


def up_closure_table(n: int, generators: Iterable[int]) -> np.ndarray:
    masks = np.arange(1 << n)
    out = np.zeros(1 << n, dtype=bool)
    for g in generators:
        out |= (masks & g) == g
    return out


def homogeneous_config(n_or_participants, crash: int, byzantine: int,
                       self_tolerant: bool = True) -> TrustConfig:
    """Bosco-style configuration for ``n`` participants tolerating ``crash``
    total failures of which ``byzantine`` may lie.

    Attack and availability labels come from the survivor-set construction;
    decide/change thresholds encode the counting rules
    ``|S| > (n+c)/2 + b`` and ``|S| > (n-c)/2`` on both kinds.
    """
    from .trust import FailureModel

    if isinstance(n_or_participants, int):
        P = tuple(str(i) for i in range(n_or_participants))
    else:
        P = tuple(n_or_participants)
    n, c, b = len(P), crash, byzantine
    if not 0 <= b <= c <= n:
        raise ValueError("need 0 <= byzantine <= crash <= n")
    crash_model = FailureModel.threshold(P, c, "crash")
    byz_model = FailureModel.threshold(P, b, "byzantine")
    k_decide = (n + c + 2 * b) // 2 + 1
    k_change = (n - c) // 2 + 1
    dec_p = threshold(k_decide, P) if k_decide <= n else Principal([])
    chg_p = threshold(k_change, P)
    attack_A, attack_I, sys_A, change, decide = {}, {}, {}, {}, {}
    for p in P:
        o = Principal.atom(p)
        a_att = crash_model.p_attack()
        i_att = byz_model.p_attack()
        if self_tolerant:
            a_att, i_att = o | a_att, o | i_att
        attack_A[p] = Label([Policy(o, AVAILABILITY, a_att)])
        attack_I[p] = Label([Policy(o, INTEGRITY, i_att)])
        sys_A[p] = Label([Policy(o, AVAILABILITY, crash_model.p_sys())])
        decide[p] = Label([Policy(o, INTEGRITY, dec_p), Policy(o, AVAILABILITY, dec_p)])
        change[p] = Label([Policy(o, INTEGRITY, chg_p), Policy(o, AVAILABILITY, chg_p)])
    return TrustConfig(P, attack_A, attack_I, sys_A, change, decide)

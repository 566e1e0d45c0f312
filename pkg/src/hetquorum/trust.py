"""Failure models as principals, message synthesizers, and the derived
liar/crash/decider/wrong set families of a trust configuration."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import FrozenSet, Iterable, List, Optional, Sequence

import numpy as np

from .config import (TrustConfig, down_closure_table, minimal_masks,
                     check_capacity)
from .label import (AVAILABILITY, INTEGRITY, Label, flows_to, join_all, meet,
                    project)
from .principal import Principal, conj_of, disj_of

CRASH = "crash"
BYZANTINE = "byzantine"


@dataclass(frozen=True)
class FailureModel:
    participants: tuple
    failure_prone: FrozenSet[FrozenSet[str]]
    mode: str = CRASH

    def __post_init__(self):
        object.__setattr__(self, "participants", tuple(self.participants))
        fp = frozenset(frozenset(s) for s in self.failure_prone)
        universe = set(self.participants)
        for s in fp:
            if not s <= universe:
                raise ValueError(f"failure-prone set {sorted(s)} names unknown participants")
        object.__setattr__(self, "failure_prone", fp)
        if self.mode not in (CRASH, BYZANTINE):
            raise ValueError(f"unknown failure mode {self.mode!r}")

    @classmethod
    def threshold(cls, participants: Sequence[str], f: int, mode: str = CRASH) -> "FailureModel":
        """Any ``f`` participants may fail."""
        if f < 0 or f > len(participants):
            raise ValueError("f must lie in [0, n]")
        return cls(tuple(participants),
                   frozenset(frozenset(c) for c in combinations(participants, f)), mode)

    def maximal_failure_prone(self) -> List[FrozenSet[str]]:
        return [s for s in self.failure_prone
                if not any(s < t for t in self.failure_prone)]

    def survivor_sets(self) -> List[FrozenSet[str]]:
        if not self.failure_prone:
            raise ValueError("degenerate model: no failure-prone sets, hence no survivor sets")
        everyone = frozenset(self.participants)
        return sorted((everyone - s for s in self.maximal_failure_prone()), key=sorted)

    def p_sys(self) -> Principal:
        """Disjunction over survivor sets of their members' conjunction."""
        return disj_of(conj_of(sorted(s)) for s in self.survivor_sets())

    def p_attack(self) -> Principal:
        """Held exactly by coalitions meeting every survivor set, i.e. those
        no tolerated failure can contain."""
        return conj_of(disj_of(sorted(s)) for s in self.survivor_sets())

    def label(self, owner: str, of: str = "attack") -> Label:
        kind = AVAILABILITY if self.mode == CRASH else INTEGRITY
        p = self.p_attack() if of == "attack" else self.p_sys()
        from .label import Policy
        return Label([Policy(Principal.atom(owner), kind, p)])


def failure_model_from_principal(participants: Sequence[str], attack: Principal,
                                 mode: str = CRASH) -> FailureModel:
    """Inverse of the survivor-set encoding: failure-prone sets are the
    coalitions that cannot act for ``attack``."""
    check_capacity(len(participants))
    P = list(participants)
    fp = []
    for r in range(len(P) + 1):
        for c in combinations(P, r):
            if not attack.held_by(c):
                fp.append(frozenset(c))
    return FailureModel(tuple(P), frozenset(fp), mode)


# -- synthesizers -----------------------------------------------------------

class _NoneValue:
    """The detectably unavailable value."""
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "NONE"


NONE = _NoneValue()


@dataclass(frozen=True)
class SynthesizedValue:
    value: object
    label: Label

    @property
    def unavailable(self) -> bool:
        return self.value is NONE


FASTEST = "fastest"
ALL_IDENTICAL = "all_identical"


@dataclass(frozen=True)
class Threshold:
    """Synthesize once a subset of inputs reaches ``bound``.  The result
    carries the weakest guarantee among qualifying subsets."""
    bound: Label


def synth_label(inputs: Sequence[Label], policy) -> Label:
    """Label of the value a synthesizer produces from ``inputs``.

    ``FASTEST`` takes whichever message arrives first: availability is the
    meet of the inputs', integrity their join.  ``ALL_IDENTICAL`` waits for
    every input to agree, so the roles swap.
    """
    if not inputs:
        raise ValueError("synthesizer needs at least one input")
    if len(inputs) == 1 and policy in (FASTEST, ALL_IDENTICAL):
        return inputs[0]
    avail = [project(l, AVAILABILITY) for l in inputs]
    integ = [project(l, INTEGRITY) for l in inputs]
    if policy == FASTEST:
        return meet(meet(*avail), join_all(integ))
    if policy == ALL_IDENTICAL:
        return meet(join_all(avail), meet(*integ))
    if isinstance(policy, Threshold):
        n = len(inputs)
        check_capacity(n)
        qualifying = []
        for mask in range(1, 1 << n):
            m = meet(*(inputs[i] for i in range(n) if mask >> i & 1))
            if flows_to(m, policy.bound):
                qualifying.append(m)
        if not qualifying:
            raise ValueError("no subset of inputs reaches the threshold")
        return join_all(qualifying)
    raise ValueError(f"unknown synthesizer policy {policy!r}")


# -- set families -----------------------------------------------------------

def _sets(cfg: TrustConfig, table: np.ndarray) -> List[FrozenSet[str]]:
    return [cfg.names(int(m)) for m in np.flatnonzero(table)]


def liar_sets(cfg: TrustConfig, p: str) -> List[FrozenSet[str]]:
    """Sets whose joint Byzantine failure ``p`` tolerates."""
    return _sets(cfg, cfg.tables.liar[cfg.index(p)])


def crash_sets(cfg: TrustConfig, p: str) -> List[FrozenSet[str]]:
    """Sets whose joint crash ``p`` tolerates."""
    return _sets(cfg, cfg.tables.crash[cfg.index(p)])


def decider_sets(cfg: TrustConfig, p: str) -> List[FrozenSet[str]]:
    return _sets(cfg, cfg.tables.decide[cfg.index(p)])


def minimal_decider_masks(cfg: TrustConfig, p: str) -> List[int]:
    return minimal_masks(np.flatnonzero(cfg.tables.decide[cfg.index(p)]).tolist())


def wrong_table(cfg: TrustConfig, p: str) -> np.ndarray:
    """Subsets of complements of ``p``'s minimal decider sets."""
    full = (1 << cfg.n) - 1
    return down_closure_table(cfg.n, [full & ~m for m in minimal_decider_masks(cfg, p)])


def wrong_sets(cfg: TrustConfig, p: str) -> List[FrozenSet[str]]:
    return _sets(cfg, wrong_table(cfg, p))

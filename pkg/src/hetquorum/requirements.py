"""Checks a trust configuration against the fast-consensus requirements and
classifies correct participants as gurus or chumps.

Every check is a pure function of the configuration and returns a
:class:`Report` whose violations are machine-readable witnesses (participant
names and sets), so callers such as the threshold search can prune on them.

Set-quantified conditions are evaluated over the per-participant tables of
:class:`~hetquorum.config.Tables`; each participant judges labels on
messages it receives from its own point of view.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .config import TrustConfig, maximal_masks, minimal_masks
from .label import AVAILABILITY, PERFECT_INTEGRITY, Label, Policy, flows_to, meet, project
from .principal import Principal
from .trust import minimal_decider_masks, wrong_table

__all__ = [
    "Report", "FailureAssignment", "Role", "TrustConfig",
    "check_msg_avail_limit", "check_viability", "check_progress",
    "check_threshold_order", "check_wrong_liar_change", "check_decide_change",
    "check_all", "classify", "CHECKS",
]


@dataclass(frozen=True)
class Report:
    name: str
    passed: bool
    violations: Tuple[dict, ...] = ()

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {"check": self.name, "passed": self.passed,
                "violations": [dict(v) for v in self.violations]}


def _report(name: str, violations: List[dict], limit: Optional[int]) -> Report:
    if limit is not None:
        violations = violations[:limit]
    return Report(name, not violations, tuple(violations))


def _sorted(names) -> List[str]:
    return sorted(names)


def _need_thresholds(cfg: TrustConfig) -> None:
    if not cfg.has_thresholds:
        raise ValueError("configuration has no threshold labels to check")


def check_msg_avail_limit(cfg: TrustConfig, limit: Optional[int] = None) -> Report:
    """A message's availability is capped by its sender's."""
    bad = []
    for p in cfg.participants:
        for q in cfg.participants:
            own = Label([Policy(Principal.atom(q), AVAILABILITY, Principal.atom(p))])
            if not flows_to(own, project(cfg.msg(p, q), AVAILABILITY), cfg.delegations):
                bad.append({"sender": p, "receiver": q})
    return _report("msg_avail_limit", bad, limit)


def _masks(n: int) -> np.ndarray:
    return np.arange(1 << n)


def check_viability(cfg: TrustConfig, limit: Optional[int] = None) -> Report:
    """No tolerated crash set may keep a sufficiently available set from
    arriving."""
    _need_thresholds(cfg)
    t = cfg.tables
    masks = _masks(cfg.n)
    bad = []
    for i, q in enumerate(cfg.participants):
        tolerated = t.crash[i] & ((masks >> i & 1) == 0)
        survivors_ok = t.avail[i][t.full ^ masks]
        for f in np.flatnonzero(tolerated & ~survivors_ok):
            bad.append({"participant": q, "crashed": _sorted(cfg.names(int(f)))})
    return _report("viability", bad, limit)


def check_progress(cfg: TrustConfig, limit: Optional[int] = None) -> Report:
    """If a set lets ``r`` finish a round but not ``q``, it must still let
    ``r`` finish without ``q``."""
    _need_thresholds(cfg)
    t = cfg.tables
    masks = _masks(cfg.n)
    bad = []
    for ri, r in enumerate(cfg.participants):
        for qi, q in enumerate(cfg.participants):
            bit = 1 << qi
            hit = t.avail[ri] & ~t.avail[qi] & ~t.avail[ri][masks & ~bit]
            for s in np.flatnonzero(hit):
                bad.append({"r": r, "q": q, "set": _sorted(cfg.names(int(s)))})
    return _report("progress", bad, limit)


def check_threshold_order(cfg: TrustConfig, limit: Optional[int] = None) -> Report:
    """``(A_sys ⊓ {top <-I top}) ⊑ D ⊑ C``."""
    _need_thresholds(cfg)
    d = cfg.delegations
    bad = []
    if not flows_to(meet(cfg.A_sys, PERFECT_INTEGRITY), cfg.D, d):
        bad.append({"relation": "A_sys ⊓ {top <-I top} ⊑ D"})
    if not flows_to(cfg.D, cfg.C, d):
        bad.append({"relation": "D ⊑ C"})
    return _report("threshold_order", bad, limit)


def _shared_liars(cfg: TrustConfig, pi: int, qi: int, literal: bool) -> List[int]:
    """Maximal liar sets relevant to the pair ``(p, q)``.

    Literally that is every liar set of ``p``.  By default a liar set must
    also be tolerated by ``q`` and exclude both: agreement only binds pairs
    of gurus, and a participant outside its own liar sets is correct.
    """
    t = cfg.tables
    fam = t.liar[pi].copy()
    if not literal:
        masks = _masks(cfg.n)
        fam &= t.liar[qi]
        fam &= (masks & ((1 << pi) | (1 << qi))) == 0
    return maximal_masks(np.flatnonzero(fam).tolist())


def check_wrong_liar_change(cfg: TrustConfig, limit: Optional[int] = None,
                            literal: bool = False) -> Report:
    """No liar set together with a wrong set of ``p`` can change the vote
    of another participant ``q``."""
    _need_thresholds(cfg)
    t = cfg.tables
    bad = []
    for pi, p in enumerate(cfg.participants):
        wrongs = maximal_masks(np.flatnonzero(wrong_table(cfg, p)).tolist())
        for qi, q in enumerate(cfg.participants):
            if qi == pi and not literal:
                continue
            for L in _shared_liars(cfg, pi, qi, literal):
                for H in wrongs:
                    if t.change[qi][L | H]:
                        bad.append({"p": p, "q": q,
                                    "liars": _sorted(cfg.names(L)),
                                    "wrong": _sorted(cfg.names(H))})
    return _report("wrong_liar_change", bad, limit)


def check_decide_change(cfg: TrustConfig, limit: Optional[int] = None,
                        literal: bool = False) -> Report:
    """Whatever lets a guru decide, the part of it sure to reach another
    correct participant must make that participant change to the value.

    Deciding is upward closed and changing is upward closed, so it suffices
    to take minimal decider sets and maximal liar and crash sets.
    """
    _need_thresholds(cfg)
    t = cfg.tables
    bad = []
    for pi, p in enumerate(cfg.participants):
        deciders = minimal_decider_masks(cfg, p)
        for qi, q in enumerate(cfg.participants):
            if qi == pi and not literal:
                continue
            crashes = maximal_masks(np.flatnonzero(t.crash[qi]).tolist())
            for X in deciders:
                for L in _shared_liars(cfg, pi, qi, literal):
                    for H in crashes:
                        J = X & ~(L | H)
                        if not t.change[qi][J]:
                            bad.append({"p": p, "q": q,
                                        "liars": _sorted(cfg.names(L & X)),
                                        "crashed": _sorted(cfg.names(H & X)),
                                        "rest": _sorted(cfg.names(J))})
    return _report("decide_change", bad, limit)


CHECKS = (
    check_msg_avail_limit,
    check_viability,
    check_progress,
    check_threshold_order,
    check_wrong_liar_change,
    check_decide_change,
)


def check_all(cfg: TrustConfig, limit: Optional[int] = None,
              stop_early: bool = False, literal: bool = False) -> List[Report]:
    out = []
    for check in CHECKS:
        if check in (check_wrong_liar_change, check_decide_change):
            rep = check(cfg, limit, literal=literal)
        else:
            rep = check(cfg, limit)
        out.append(rep)
        if stop_early and not rep.passed:
            break
    return out


def passes(cfg: TrustConfig) -> bool:
    return all(r.passed for r in check_all(cfg, limit=1, stop_early=True))


# -- gurus and chumps -------------------------------------------------------

class Role(str, enum.Enum):
    GURU = "guru"
    CHUMP = "chump"
    FAULTY = "faulty"


@dataclass(frozen=True)
class FailureAssignment:
    """Which participants fail and how.

    ``crashed`` maps a participant to the round from which it sends nothing;
    ``byzantine`` maps a participant to a strategy name.
    """
    crashed: Mapping[str, int] = field(default_factory=dict)
    byzantine: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        crashed = self.crashed
        if not isinstance(crashed, Mapping):
            crashed = {p: 0 for p in crashed}
        byz = self.byzantine
        if not isinstance(byz, Mapping):
            byz = {p: "equivocator" for p in byz}
        overlap = set(crashed) & set(byz)
        if overlap:
            raise ValueError(f"participants both crashed and Byzantine: {sorted(overlap)}")
        object.__setattr__(self, "crashed", dict(crashed))
        object.__setattr__(self, "byzantine", dict(byz))

    @property
    def faulty(self) -> frozenset:
        return frozenset(self.crashed) | frozenset(self.byzantine)

    def validate(self, cfg: TrustConfig) -> None:
        unknown = self.faulty - set(cfg.participants)
        if unknown:
            raise ValueError(f"failure assignment names unknown participants {sorted(unknown)}")


NO_FAILURES = FailureAssignment()


def classify(cfg: TrustConfig, fa: FailureAssignment) -> Dict[str, Role]:
    """A correct participant is a guru when the Byzantine participants form
    one of its liar sets and all faulty ones form one of its crash sets."""
    fa.validate(cfg)
    t = cfg.tables
    byz = cfg.mask(fa.byzantine)
    faulty = cfg.mask(fa.faulty)
    out = {}
    for i, p in enumerate(cfg.participants):
        if p in fa.faulty:
            out[p] = Role.FAULTY
        elif t.liar[i][byz] and t.crash[i][faulty]:
            out[p] = Role.GURU
        else:
            out[p] = Role.CHUMP
    return out


def gurus(cfg: TrustConfig, fa: FailureAssignment) -> frozenset:
    return frozenset(p for p, r in classify(cfg, fa).items() if r is Role.GURU)

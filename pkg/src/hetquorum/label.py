"""Integrity/availability labels and their ordering.

A policy ``o <-I p`` says owner ``o`` trusts only ``p`` with the integrity
of the labeled data; ``o <-A p`` says the same for availability.  A label is
a set of policies.

Each principal ``x`` of the universe holds a *view* of a label per kind: the
conjunction of the trustees of policies whose owner acts for ``x``.  A policy
owned by ``top`` is therefore believed by everyone, one owned by ``bottom``
only by ``bottom``.  A view with no visible policy is ``bottom`` (anyone may
have affected the data).  ``l1 ⊑ l2`` holds when every view of ``l1`` acts
for the corresponding view of ``l2``.

With this visibility rule meet (policy union) is the exact greatest lower
bound and the pairwise join ``(u1 | u2) <- (p1 | p2)`` the exact least upper
bound.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import FrozenSet, Iterable, Optional, Tuple

from .principal import (BOTTOM, NO_DELEGATIONS, TOP, Delegations, Principal,
                        acts_for, conj_of, parse_principal)

INTEGRITY = "I"
AVAILABILITY = "A"
KINDS = (INTEGRITY, AVAILABILITY)


@dataclass(frozen=True)
class Policy:
    owner: Principal
    kind: str
    trustee: Principal

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"policy kind must be 'I' or 'A', got {self.kind!r}")

    def __str__(self) -> str:
        return f"{_fmt(self.owner)} <-{self.kind} {_fmt(self.trustee)}"


def _fmt(p: Principal) -> str:
    s = str(p)
    return f"({s})" if "|" in s and len(p.clauses) > 1 else s


class Label:
    """Immutable set of policies.  Equality is syntactic; use
    :func:`equivalent` for the semantic equality the lattice works with."""

    __slots__ = ("policies", "_hash")

    def __init__(self, policies: Iterable[Policy] = ()):
        object.__setattr__(self, "policies", frozenset(policies))
        object.__setattr__(self, "_hash", hash(self.policies))

    def __setattr__(self, name, value):
        raise AttributeError("Label is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, Label) and self.policies == other.policies

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Label, (tuple(self.policies),))

    def __iter__(self):
        return iter(self.policies)

    def __len__(self) -> int:
        return len(self.policies)

    def atoms(self) -> FrozenSet[str]:
        out = set()
        for pol in self.policies:
            out |= pol.owner.atoms() | pol.trustee.atoms()
        return frozenset(out)

    def owners(self) -> FrozenSet[Principal]:
        return frozenset(p.owner for p in self.policies)

    def kinds(self) -> FrozenSet[str]:
        return frozenset(p.kind for p in self.policies)

    def __str__(self) -> str:
        body = " ; ".join(sorted(str(p) for p in self.policies))
        return "{ " + body + " }" if body else "{}"

    def __repr__(self) -> str:
        return f"Label({str(self)!r})"

    def view(self, kind: str, viewer: Principal,
             d: Optional[Delegations] = None) -> Principal:
        return _view(self, kind, viewer, d if d is not None else NO_DELEGATIONS)


def policy(owner, kind: str, trustee) -> Label:
    """Single-policy label; principals may be given as text."""
    if isinstance(owner, str):
        owner = parse_principal(owner)
    if isinstance(trustee, str):
        trustee = parse_principal(trustee)
    return Label([Policy(owner, kind, trustee)])


EMPTY = Label()


@lru_cache(maxsize=1 << 18)
def _view(label: Label, kind: str, viewer: Principal, d: Delegations) -> Principal:
    trustees = [p.trustee for p in label.policies
                if p.kind == kind and acts_for(p.owner, viewer, d)]
    return conj_of(trustees)


def project(label: Label, kind: str) -> Label:
    return Label(p for p in label.policies if p.kind == kind)


def split(label: Label) -> Tuple[Label, Label]:
    """``(I(l), A(l))``."""
    return project(label, INTEGRITY), project(label, AVAILABILITY)


def meet(*labels: Label) -> Label:
    return Label(frozenset().union(*(l.policies for l in labels)))


def join(l1: Label, l2: Label) -> Label:
    out = []
    for p1 in l1.policies:
        for p2 in l2.policies:
            if p1.kind == p2.kind:
                out.append(Policy(p1.owner | p2.owner, p1.kind,
                                  p1.trustee | p2.trustee))
    return Label(out)


def join_all(labels: Iterable[Label]) -> Label:
    labels = list(labels)
    if not labels:
        return BOTTOM_LABEL
    return reduce(join, labels)


def universe(*labels: Label, d: Optional[Delegations] = None) -> Tuple[Principal, ...]:
    """Viewers quantified over by the ordering: mentioned atoms, top, bottom."""
    atoms = set()
    for l in labels:
        atoms |= l.atoms()
    if d is not None:
        atoms |= d.atoms()
    return tuple([TOP, BOTTOM] + [Principal.atom(a) for a in sorted(atoms)])


def flows_to(l1: Label, l2: Label, d: Optional[Delegations] = None,
             viewers: Optional[Iterable[Principal]] = None) -> bool:
    """``l1 ⊑ l2``: ``l1`` is no more restrictive than ``l2``.

    ``viewers`` restricts the judgement to particular principals; a
    participant checking its own thresholds judges from its own view.
    """
    d = d if d is not None else NO_DELEGATIONS
    if viewers is None:
        viewers = universe(l1, l2, d=d)
    for x in viewers:
        if isinstance(x, str):
            x = Principal.atom(x)
        for kind in KINDS:
            if not acts_for(_view(l1, kind, x, d), _view(l2, kind, x, d), d):
                return False
    return True


def strictly_flows_to(l1: Label, l2: Label, d: Optional[Delegations] = None,
                      viewers=None) -> bool:
    return (flows_to(l1, l2, d, viewers)
            and not flows_to(l2, l1, d, viewers))


def equivalent(l1: Label, l2: Label, d: Optional[Delegations] = None) -> bool:
    return flows_to(l1, l2, d) and flows_to(l2, l1, d)


# Extremes of the lattice.
BOTTOM_LABEL = Label([Policy(TOP, INTEGRITY, TOP), Policy(TOP, AVAILABILITY, TOP)])
TOP_LABEL = Label([Policy(BOTTOM, INTEGRITY, BOTTOM),
                   Policy(BOTTOM, AVAILABILITY, BOTTOM)])
PERFECT_INTEGRITY = Label([Policy(TOP, INTEGRITY, TOP)])


# -- text syntax ------------------------------------------------------------

_POLICY = re.compile(r"^\s*(?P<owner>.+?)\s*<-\s*(?P<kind>[IA])\s+(?P<trustee>.+?)\s*$")


class LabelSyntaxError(ValueError):
    pass


def parse_label(text: str) -> Label:
    """Parse ``{ o <-I p ; o <-A q }``."""
    s = text.strip()
    if not (s.startswith("{") and s.endswith("}")):
        raise LabelSyntaxError(f"label must be enclosed in braces: {text!r}")
    body = s[1:-1].strip()
    if not body:
        return EMPTY
    pols = []
    for i, part in enumerate(body.split(";")):
        m = _POLICY.match(part)
        if not m:
            raise LabelSyntaxError(f"policy {i} malformed: {part.strip()!r}")
        try:
            pols.append(Policy(parse_principal(m.group("owner")), m.group("kind"),
                               parse_principal(m.group("trustee"))))
        except ValueError as e:
            raise LabelSyntaxError(f"policy {i}: {e}") from e
    return Label(pols)

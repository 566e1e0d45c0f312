"""The fast-consensus participant as an event-driven state machine.

A participant broadcasts its value, collects same-round messages until the
set is sufficiently available, then scans the distinct values in a fixed
order: the first value whose senders are sufficient to decide is decided,
the first sufficient to change becomes the next round's value, and failing
both the selection function picks one.  The next round is another round of
the same protocol.

Predicates are evaluated on sender bitmasks (bit ``i`` is
``participants[i]``), either from label tables or from plain counting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import TrustConfig

__all__ = [
    "Message", "Propose", "Deliver", "Broadcast", "Decide", "EnterNextRound",
    "InvariantViolation", "Predicates", "LabelPredicates", "CountingPredicates",
    "UniformRandom", "FirstInFixedOrder", "ParticipantState",
    "sufficiently_available", "sufficient_to_decide", "sufficient_to_change",
]


class InvariantViolation(AssertionError):
    """A state the protocol rules out was reached."""


@dataclass(frozen=True, order=True)
class Message:
    instance: Hashable
    round: int
    sender: str
    value: object


@dataclass(frozen=True)
class Propose:
    value: object


@dataclass(frozen=True)
class Deliver:
    message: Message


@dataclass(frozen=True)
class Broadcast:
    message: Message


@dataclass(frozen=True)
class Decide:
    value: object
    round: int


@dataclass(frozen=True)
class EnterNextRound:
    value: object
    round: int


Event = Union[Propose, Deliver]
Action = Union[Broadcast, Decide, EnterNextRound]


# -- predicates -------------------------------------------------------------

class Predicates:
    """Threshold predicates over sender masks, one row per receiver."""

    participants: Tuple[str, ...]

    def avail(self, receiver: int, mask: int) -> bool:
        raise NotImplementedError

    def decide(self, receiver: int, mask: int) -> bool:
        raise NotImplementedError

    def change(self, receiver: int, mask: int) -> bool:
        raise NotImplementedError


class LabelPredicates(Predicates):
    """Predicates read off a configuration's compiled label tables."""

    def __init__(self, cfg: TrustConfig):
        if not cfg.has_thresholds:
            raise ValueError("configuration lacks threshold labels")
        self.participants = cfg.participants
        t = cfg.tables
        # plain lists index faster than numpy rows in the hot loop
        self._avail = [row.tolist() for row in t.avail]
        self._decide = [row.tolist() for row in t.decide]
        self._change = [row.tolist() for row in t.change]

    def avail(self, receiver, mask):
        return self._avail[receiver][mask]

    def decide(self, receiver, mask):
        return self._decide[receiver][mask]

    def change(self, receiver, mask):
        return self._change[receiver][mask]


class CountingPredicates(Predicates):
    """Homogeneous rules: ``|R| >= n-c``, ``|S| > (n+c)/2 + b``,
    ``|S| > (n-c)/2``."""

    def __init__(self, n_or_participants, c: int, b: int):
        if isinstance(n_or_participants, int):
            self.participants = tuple(str(i) for i in range(n_or_participants))
        else:
            self.participants = tuple(n_or_participants)
        self.n, self.c, self.b = len(self.participants), c, b

    def avail(self, receiver, mask):
        return mask.bit_count() >= self.n - self.c

    def decide(self, receiver, mask):
        return 2 * mask.bit_count() > self.n + self.c + 2 * self.b

    def change(self, receiver, mask):
        return 2 * mask.bit_count() > self.n - self.c


# -- selection --------------------------------------------------------------

class UniformRandom:
    """Uniform draw over the multiset of received values."""

    def __init__(self, seed=None):
        self.rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    def __call__(self, values: Sequence[object]) -> object:
        if not values:
            raise ValueError("selection over an empty message set")
        return values[int(self.rng.integers(len(values)))]


class FirstInFixedOrder:
    """Least value in the payload order."""

    def __call__(self, values: Sequence[object]) -> object:
        if not values:
            raise ValueError("selection over an empty message set")
        return min(values)


# -- participant ------------------------------------------------------------

@dataclass
class ParticipantState:
    """One participant of one consensus instance.

    Messages for later rounds are buffered; messages for earlier rounds are
    dropped, as are repeats from a sender within a round.  Having decided, a
    participant keeps running with its value pinned to the decision.  With
    ``strict`` set, reaching a decision on a different value raises
    :class:`InvariantViolation`; otherwise it is recorded in ``conflicts``.
    """

    id: str
    predicates: Predicates
    selection: object = field(default_factory=FirstInFixedOrder)
    instance: Hashable = 0
    strict: bool = True
    round: int = 0
    value: object = None
    decided: Optional[Tuple[object, int]] = None
    conflicts: List[Tuple[object, int]] = field(default_factory=list)
    received: Dict[int, Dict[str, Message]] = field(default_factory=dict)

    def __post_init__(self):
        self.index = self.predicates.participants.index(self.id)
        self._bit = {p: 1 << i for i, p in enumerate(self.predicates.participants)}

    # convenience views of the three predicates on participant names
    def mask_of(self, senders) -> int:
        m = 0
        for s in senders:
            m |= self._bit[s]
        return m

    def step(self, event: Event) -> List[Action]:
        if isinstance(event, Propose):
            if self.round != 0:
                raise InvariantViolation(f"{self.id} proposed twice")
            return self._enter(1, event.value)
        if isinstance(event, Deliver):
            return self._deliver(event.message)
        raise TypeError(f"unknown event {event!r}")

    def _deliver(self, m: Message) -> List[Action]:
        if m.instance != self.instance or m.sender not in self._bit:
            return []
        if m.round < self.round:
            return []
        box = self.received.setdefault(m.round, {})
        if m.sender in box:
            return []
        box[m.sender] = m
        if m.round > self.round or self.round == 0:
            return []
        return self._evaluate()

    def _enter(self, rnd: int, value) -> List[Action]:
        self.received.pop(self.round, None)
        self.round, self.value = rnd, value
        actions: List[Action] = [
            Broadcast(Message(self.instance, rnd, self.id, value))]
        if rnd > 1:
            actions.insert(0, EnterNextRound(value, rnd))
        # buffered messages may already complete the new round
        if self.round in self.received:
            actions.extend(self._evaluate())
        return actions

    def _evaluate(self) -> List[Action]:
        box = self.received.get(self.round, {})
        R = self.mask_of(box)
        pred = self.predicates
        if not pred.avail(self.index, R):
            return []
        by_value: Dict[object, int] = {}
        for s, m in box.items():
            by_value[m.value] = by_value.get(m.value, 0) | self._bit[s]
        chosen = None
        actions: List[Action] = []
        for v in sorted(by_value):
            S = by_value[v]
            if pred.decide(self.index, S):
                actions.extend(self._decide(v))
                chosen = v
                break
            if pred.change(self.index, S):
                chosen = v
                break
        if chosen is None:
            chosen = self.selection([m.value for _, m in sorted(box.items())])
        if self.decided is not None:
            chosen = self.decided[0]
        return actions + self._enter(self.round + 1, chosen)

    def _decide(self, v) -> List[Action]:
        if self.decided is None:
            self.decided = (v, self.round)
            return [Decide(v, self.round)]
        if v != self.decided[0]:
            if self.strict:
                raise InvariantViolation(
                    f"{self.id} decided {self.decided[0]!r} in round "
                    f"{self.decided[1]} and {v!r} in round {self.round}")
            self.conflicts.append((v, self.round))
        return []


def _mask(pred: Predicates, senders) -> int:
    idx = {p: i for i, p in enumerate(pred.participants)}
    m = 0
    for s in senders:
        m |= 1 << idx[s]
    return m


def sufficiently_available(state: ParticipantState, senders) -> bool:
    return state.predicates.avail(state.index, _mask(state.predicates, senders))


def sufficient_to_decide(state: ParticipantState, senders) -> bool:
    m = _mask(state.predicates, senders)
    return m != 0 and state.predicates.decide(state.index, m)


def sufficient_to_change(state: ParticipantState, senders) -> bool:
    m = _mask(state.predicates, senders)
    return m != 0 and state.predicates.change(state.index, m)

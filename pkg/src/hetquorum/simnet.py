"""Seeded simulation of fast consensus over a reliable asynchronous network.

Within each round every receiver gets that round's messages in an
independent, uniformly random order.  A round-``r`` message depends only on
what its sender did in round ``r-1``, so stepping rounds in lock step while
permuting per receiver yields exactly the runs of the asynchronous model in
which round-``r`` traffic reaches each receiver in random order.  Every
message between correct participants is handed to the engine exactly once;
those for a round the receiver has already left are dropped by the engine.

Randomness: one ``numpy.random.SeedSequence(seed, spawn_key=(trial,))`` per
trial, spawned into ``1 + n`` PCG64 streams.  Stream 0 draws delivery
orders, stream ``1 + i`` feeds participant ``i``'s selection function.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .config import TrustConfig
from .engine import (Broadcast, CountingPredicates, Decide, Deliver,
                     FirstInFixedOrder, LabelPredicates, Message,
                     ParticipantState, Predicates, Propose, UniformRandom)
from .requirements import NO_FAILURES, FailureAssignment, Role, classify

__all__ = [
    "Equivocator", "PerReceiverEquivocator", "Silent", "Custom", "strategy",
    "SimConfig", "SimTrace", "run_trial", "run_experiment", "read_curve_csv", "DecisionCurve",
    "summarize", "trial_streams", "initial_values", "CSV_COLUMNS",
]


# -- Byzantine strategies ---------------------------------------------------

class ByzantineStrategy:
    name = "custom"

    def send(self, node: str, rnd: int, receiver: str,
             rng: np.random.Generator) -> Optional[object]:
        """Value ``node`` sends ``receiver`` in round ``rnd``; ``None`` sends nothing."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class Equivocator(ByzantineStrategy):
    """A fresh, never-seen value each round, the same for every receiver."""
    name = "equivocator"

    def send(self, node, rnd, receiver, rng):
        return f"~{node}:{rnd}"


class PerReceiverEquivocator(ByzantineStrategy):
    """A fresh value per round and per receiver."""
    name = "per_receiver_equivocator"

    def send(self, node, rnd, receiver, rng):
        return f"~{node}:{rnd}:{receiver}"


class Silent(ByzantineStrategy):
    name = "silent"

    def send(self, node, rnd, receiver, rng):
        return None


class Custom(ByzantineStrategy):
    """Wraps ``fn(node, round, receiver, rng) -> value | None``."""

    def __init__(self, fn: Callable, name: str = "custom"):
        self.fn, self.name = fn, name

    def send(self, node, rnd, receiver, rng):
        return self.fn(node, rnd, receiver, rng)


_STRATEGIES = {cls.name: cls for cls in (Equivocator, PerReceiverEquivocator, Silent)}


def strategy(name: str) -> ByzantineStrategy:
    try:
        return _STRATEGIES[name]()
    except KeyError:
        raise ValueError(f"unknown Byzantine strategy {name!r}; "
                         f"known: {sorted(_STRATEGIES)}") from None


# -- configuration and traces -----------------------------------------------

def initial_values(participants: Sequence[str]) -> Dict[str, str]:
    """Pairwise distinct proposals, ordered like the participants."""
    width = len(str(len(participants)))
    return {p: f"v{i:0{width}d}" for i, p in enumerate(participants)}


@dataclass(frozen=True)
class SimConfig:
    cfg: Optional[TrustConfig]
    fa: FailureAssignment = NO_FAILURES
    strategies: Mapping[str, ByzantineStrategy] = field(default_factory=dict)
    seed: int = 0
    max_rounds: int = 64
    trials: int = 1000
    selection: str = "uniform"
    proposals: Optional[Mapping[str, object]] = None
    predicates: Optional[Predicates] = None
    name: str = "scenario"
    record_deliveries: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.selection not in ("uniform", "first"):
            raise ValueError("selection must be 'uniform' or 'first'")
        if self.cfg is None and self.predicates is None:
            raise ValueError("need a trust configuration or predicates")

    @property
    def participants(self) -> Tuple[str, ...]:
        return self.predicates.participants if self.predicates else self.cfg.participants

    def strategy_for(self, p: str) -> ByzantineStrategy:
        s = self.strategies.get(p)
        if s is None:
            s = strategy(self.fa.byzantine.get(p, "equivocator"))
        return s

    def roles(self) -> Dict[str, Role]:
        if self.cfg is None:
            return {p: (Role.FAULTY if p in self.fa.faulty else Role.GURU)
                    for p in self.participants}
        return classify(self.cfg, self.fa)


@dataclass
class SimTrace:
    participants: Tuple[str, ...]
    proposals: Dict[str, object]
    roles: Dict[str, Role]
    decisions: Dict[str, Optional[Tuple[object, int]]]
    conflicts: Dict[str, List[Tuple[object, int]]]
    rounds_run: int
    terminated: bool
    deliveries: List[Dict[str, List[str]]] = field(default_factory=list)

    @property
    def gurus(self) -> List[str]:
        return [p for p in self.participants if self.roles[p] is Role.GURU]

    def decision_round(self, p: str) -> Optional[int]:
        d = self.decisions.get(p)
        return None if d is None else d[1]

    def violations(self) -> List[str]:
        """Agreement, unanimity and validity failures among gurus."""
        out = []
        gurus = self.gurus
        decided = {p: self.decisions[p][0] for p in gurus if self.decisions[p]}
        for p in gurus:
            if self.conflicts[p]:
                out.append(f"agreement: {p} decided more than one value")
        if len(set(decided.values())) > 1:
            out.append(f"agreement: gurus decided {sorted(map(str, set(decided.values())))}")
        correct = [p for p in self.participants if self.roles[p] is not Role.FAULTY]
        inputs = {self.proposals[p] for p in correct}
        everyone_correct = len(correct) == len(self.participants)
        if everyone_correct and len(inputs) == 1:
            (v,) = inputs
            for p, d in decided.items():
                if d != v:
                    out.append(f"unanimity: {p} decided {d!r}, all proposed {v!r}")
        if everyone_correct:
            proposed = set(self.proposals.values())
            for p, d in decided.items():
                if d not in proposed:
                    out.append(f"validity: {p} decided unproposed {d!r}")
        return out


def trial_streams(seed: int, trial: int, n: int) -> List[np.random.Generator]:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return [np.random.Generator(np.random.PCG64(s)) for s in ss.spawn(1 + n)]


def _predicates(sc: SimConfig) -> Predicates:
    return sc.predicates if sc.predicates is not None else LabelPredicates(sc.cfg)


def run_trial(sc: SimConfig, trial: int = 0, predicates: Optional[Predicates] = None,
              roles: Optional[Dict[str, Role]] = None) -> SimTrace:
    pred = predicates or _predicates(sc)
    roles = roles or sc.roles()
    P = pred.participants
    n = len(P)
    streams = trial_streams(sc.seed, trial, n)
    net = streams[0]
    proposals = dict(sc.proposals) if sc.proposals else initial_values(P)

    byz = {p: sc.strategy_for(p) for p in sc.fa.byzantine}
    crash_round = dict(sc.fa.crashed)
    states: Dict[str, ParticipantState] = {}
    for i, p in enumerate(P):
        if p in byz:
            continue
        sel = (UniformRandom(streams[1 + i]) if sc.selection == "uniform"
               else FirstInFixedOrder())
        states[p] = ParticipantState(p, pred, sel, strict=False)

    # outbox[p] = value p broadcasts in the current round (correct senders)
    outbox: Dict[str, object] = {}
    for p, st in states.items():
        for a in st.step(Propose(proposals[p])):
            if isinstance(a, Broadcast):
                outbox[p] = a.message.value

    waiting = [p for p in P if roles.get(p) is Role.GURU] or list(states)
    deliveries: List[Dict[str, List[str]]] = []
    rnd = 0
    terminated = False
    for rnd in range(1, sc.max_rounds + 1):
        nxt: Dict[str, object] = {}
        per_round: Dict[str, List[str]] = {}
        alive = [s for s in P if s in outbox and crash_round.get(s, math.inf) > rnd]
        for q in P:
            st = states.get(q)
            if st is None:
                continue
            inbox = [Message(0, rnd, s, outbox[s]) for s in alive]
            for s, strat in byz.items():
                v = strat.send(s, rnd, q, net)
                if v is not None:
                    inbox.append(Message(0, rnd, s, v))
            order = net.permutation(len(inbox))
            if sc.record_deliveries:
                per_round[q] = [inbox[k].sender for k in order]
            for k in order:
                for a in st.step(Deliver(inbox[k])):
                    if isinstance(a, Broadcast):
                        nxt[q] = a.message.value
        if sc.record_deliveries:
            deliveries.append(per_round)
        outbox = nxt
        if all(states[p].decided is not None for p in waiting if p in states):
            terminated = bool(waiting)
            break
        if not outbox:
            break

    return SimTrace(
        participants=P,
        proposals=proposals,
        roles=dict(roles),
        decisions={p: (states[p].decided if p in states else None) for p in P},
        conflicts={p: (list(states[p].conflicts) if p in states else []) for p in P},
        rounds_run=rnd,
        terminated=terminated,
        deliveries=deliveries,
    )


# -- experiments ------------------------------------------------------------

CSV_COLUMNS = ("round", "fraction_decided", "stderr", "scenario", "trials", "seed")


@dataclass
class DecisionCurve:
    """Mean fraction of gurus decided by each round, over trials."""
    scenario: str
    trials: int
    seed: int
    fraction: np.ndarray        # index r-1 holds round r
    stderr: np.ndarray
    decision_rounds: np.ndarray  # pooled per-guru rounds; 0 = undecided
    terminated: int = 0
    violations: List[str] = field(default_factory=list)

    @property
    def max_rounds(self) -> int:
        return len(self.fraction)

    def percentile(self, q: float) -> Optional[int]:
        """Smallest round whose cumulative decided fraction reaches ``q``."""
        hit = np.flatnonzero(self.fraction >= q - 1e-12)
        return int(hit[0]) + 1 if hit.size else None

    @property
    def median(self) -> Optional[int]:
        return self.percentile(0.5)

    @property
    def p95(self) -> Optional[int]:
        return self.percentile(0.95)

    def rows(self):
        for r in range(self.max_rounds):
            yield (r + 1, f"{self.fraction[r]:.6f}", f"{self.stderr[r]:.6f}",
                   self.scenario, self.trials, self.seed)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        w.writerows(self.rows())
        return buf.getvalue()


def _run_chunk(sc: SimConfig, start: int, stop: int, check: bool):
    pred = _predicates(sc)
    roles = sc.roles()
    per_trial = np.zeros((stop - start, sc.max_rounds))
    pooled: List[int] = []
    terminated = 0
    violations: List[str] = []
    for t in range(start, stop):
        tr = run_trial(sc, t, pred, roles)
        gurus = tr.gurus
        terminated += tr.terminated
        if check:
            violations.extend(f"trial {t}: {v}" for v in tr.violations())
        if not gurus:
            continue
        counts = np.zeros(sc.max_rounds + 1)
        for p in gurus:
            r = tr.decision_round(p)
            pooled.append(r or 0)
            if r is not None:
                counts[r - 1] += 1
        per_trial[t - start] = np.cumsum(counts)[:sc.max_rounds] / len(gurus)
    return per_trial, pooled, terminated, violations


def run_experiment(sc: SimConfig, check: bool = True, jobs: int = 1) -> DecisionCurve:
    """Run ``sc.trials`` trials.  With ``jobs > 1`` contiguous blocks of
    trials run in worker processes; each trial draws from its own seed
    stream, so the result does not depend on ``jobs``."""
    if jobs <= 1 or sc.trials < 2 * jobs:
        parts = [_run_chunk(sc, 0, sc.trials, check)]
    else:
        from concurrent.futures import ProcessPoolExecutor
        bounds = np.linspace(0, sc.trials, jobs + 1).astype(int)
        with ProcessPoolExecutor(jobs) as ex:
            futs = [ex.submit(_run_chunk, sc, int(a), int(b), check)
                    for a, b in zip(bounds[:-1], bounds[1:])]
            parts = [f.result() for f in futs]
    per_trial = np.concatenate([p[0] for p in parts])
    pooled = [r for p in parts for r in p[1]]
    terminated = sum(p[2] for p in parts)
    violations = [v for p in parts for v in p[3]]
    mean = per_trial.mean(axis=0)
    if sc.trials > 1:
        se = per_trial.std(axis=0, ddof=1) / math.sqrt(sc.trials)
    else:
        se = np.zeros(sc.max_rounds)
    return DecisionCurve(sc.name, sc.trials, sc.seed, mean, se,
                         np.asarray(pooled, dtype=int), terminated, violations)


def read_curve_csv(text: str) -> DecisionCurve:
    """Inverse of :meth:`DecisionCurve.to_csv` (pooled rounds are not kept)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"expected CSV header {','.join(CSV_COLUMNS)}")
    body = rows[1:]
    if not body:
        raise ValueError("curve has no rows")
    for i, r in enumerate(body, start=1):
        if len(r) != len(CSV_COLUMNS) or int(r[0]) != i:
            raise ValueError(f"row {i + 1}: malformed curve row")
    frac = np.array([float(r[1]) for r in body])
    se = np.array([float(r[2]) for r in body])
    first = body[0]
    return DecisionCurve(first[3], int(first[4]), int(first[5]), frac, se,
                         np.zeros(0, dtype=int))


def summarize(curves: Sequence[DecisionCurve]) -> List[dict]:
    if not curves:
        raise ValueError("need at least one curve")
    out = []
    for c in curves:
        out.append({
            "scenario": c.scenario, "trials": c.trials, "seed": c.seed,
            "median": c.median, "p95": c.p95,
            "terminated": c.terminated,
            "violations": len(c.violations),
            "per_round": [round(float(x), 6) for x in c.fraction],
        })
    return out

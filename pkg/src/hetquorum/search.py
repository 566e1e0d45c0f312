"""Synthesis of per-participant threshold labels from attack labels.

Labels owned by one participant over the standard message labels are
monotone boolean functions of the sender set, held here as truth tables
(:class:`MonotoneFn`).  Writing ``a``, ``c``, ``d`` for the tables of
``A^p_sys``, ``C^p`` and ``D^p``, the requirements become:

* every complement of a tolerated crash set is in ``a`` (viability);
* the progress condition, a property of ``a`` alone;
* ``a ⊆ d ⊆ c`` (threshold order);
* ``c`` avoids every liar-plus-wrong set and contains every decider set
  minus a liar and a crash set.

The last two only get harder as ``d`` grows, and ``c`` is best taken as
the least table satisfying its lower bounds.  So for a fixed ``a`` the
choice ``d = a`` is feasible whenever anything is.  The search therefore
walks availability tables: it starts from the least tables viability
allows and branches on the two ways of repairing each progress violation.
Every feasible ``a`` lies above some branch, so exhausting the tree proves
infeasibility.  A feasible ``d`` is then grown greedily toward the
⊑-least decide threshold.  The requirement checker re-runs on every
result.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .config import (CapacityError, TrustConfig, check_capacity, maximal_masks, minimal_masks,
                     standard_messages)
from .label import AVAILABILITY, INTEGRITY, KINDS, Label, Policy, equivalent
from .principal import BOTTOM, TOP, Principal, conj_of, disj_of
from .requirements import check_all

__all__ = ["MonotoneFn", "encode", "decode", "synthesize", "SearchResult",
           "SEARCH_CAPACITY", "EncodingError"]

SEARCH_CAPACITY = 6
EXHAUSTIVE_LIMIT = 2_000_000


class EncodingError(ValueError):
    pass


def _up_close(t: np.ndarray, n: int) -> np.ndarray:
    t = t.copy()
    masks = np.arange(1 << n)
    for i in range(n):
        lo = masks[(masks >> i & 1) == 0]
        t[lo | (1 << i)] |= t[lo]
    return t


@dataclass(frozen=True)
class MonotoneFn:
    """Upward-closed set family over ``participants``, as a truth table."""

    participants: Tuple[str, ...]
    table: bytes

    @classmethod
    def from_table(cls, participants: Sequence[str], table) -> "MonotoneFn":
        arr = np.asarray(table, dtype=bool)
        n = len(participants)
        if arr.shape != (1 << n,):
            raise ValueError(f"table needs {1 << n} entries")
        if not np.array_equal(_up_close(arr, n), arr):
            raise ValueError("table is not monotone")
        return cls(tuple(participants), arr.tobytes())

    @classmethod
    def from_principal(cls, participants: Sequence[str], p: Principal) -> "MonotoneFn":
        P = tuple(participants)
        extra = p.atoms() - set(P)
        if extra:
            raise EncodingError(f"principal mentions non-participants {sorted(extra)}")
        idx = {x: i for i, x in enumerate(P)}
        t = np.zeros(1 << len(P), dtype=bool)
        for clause in p.clauses:
            m = 0
            for x in clause:
                m |= 1 << idx[x]
            t[m] = True
        return cls(P, _up_close(t, len(P)).tobytes())

    @property
    def n(self) -> int:
        return len(self.participants)

    @property
    def array(self) -> np.ndarray:
        return np.frombuffer(self.table, dtype=bool)

    def __call__(self, mask: int) -> bool:
        return bool(self.table[mask])

    def minimal_sets(self) -> List[int]:
        return minimal_masks(np.flatnonzero(self.array).tolist())

    def to_principal(self) -> Principal:
        clauses = []
        for m in self.minimal_sets():
            clauses.append([x for i, x in enumerate(self.participants) if m >> i & 1])
        return Principal(clauses)


def encode(label: Label, owner: str, participants: Sequence[str],
           kind: Optional[str] = None) -> MonotoneFn:
    """Truth table of the sets of senders whose standard messages reach
    ``label`` in ``owner``'s view."""
    o = Principal.atom(owner)
    pols = [p for p in label.policies if kind is None or p.kind == kind]
    if any(p.owner != o for p in pols):
        raise EncodingError("search labels must be owned by a single participant")
    kinds = {p.kind for p in pols}
    if kind is None and len(kinds) > 1:
        raise EncodingError("label mixes kinds; pass kind=")
    return MonotoneFn.from_principal(participants, conj_of(p.trustee for p in pols))


def decode(f: MonotoneFn, owner: str, kind) -> Label:
    """Single-owner label for ``f``; ``kind`` may be one kind or several."""
    kinds = (kind,) if isinstance(kind, str) else tuple(kind)
    p = f.to_principal()
    o = Principal.atom(owner)
    return Label([Policy(o, k, p) for k in kinds])


# -- search -----------------------------------------------------------------

@dataclass
class SearchResult:
    config: Optional[TrustConfig]
    exhaustive: bool
    explored: int = 0

    @property
    def feasible(self) -> bool:
        return self.config is not None


class _Problem:
    """Table-level view of the requirements for one attack configuration."""

    def __init__(self, cfg: TrustConfig):
        self.cfg = cfg
        self.n = n = cfg.n
        self.full = (1 << n) - 1
        self.masks = np.arange(1 << n)
        t = cfg.tables
        self.crash_max = [maximal_masks(np.flatnonzero(t.crash[i]).tolist()) for i in range(n)]
        self.shared = {}
        for p in range(n):
            for q in range(n):
                if p == q:
                    continue
                fam = t.liar[p] & t.liar[q] & ((self.masks & ((1 << p) | (1 << q))) == 0)
                self.shared[p, q] = maximal_masks(np.flatnonzero(fam).tolist())
        self.a0 = []
        for i in range(n):
            need = np.zeros(1 << n, dtype=bool)
            tolerated = t.crash[i] & ((self.masks >> i & 1) == 0)
            need[self.full ^ self.masks[tolerated]] = True
            self.a0.append(_up_close(need, n))

    # progress: a_r(S) and not a_q(S) imply a_r(S - q)
    def progress_violation(self, a) -> Optional[Tuple[int, int, int]]:
        for r in range(self.n):
            for q in range(self.n):
                bit = 1 << q
                hit = a[r] & ~a[q] & ~a[r][self.masks & ~bit]
                idx = np.flatnonzero(hit)
                if idx.size:
                    return r, q, int(idx[0])
        return None

    def derive_change(self, d) -> Optional[List[np.ndarray]]:
        """Least change tables for decide tables ``d``, or None when the
        liar-plus-wrong condition cannot hold."""
        n = self.n
        mins = [minimal_masks(np.flatnonzero(d[p]).tolist()) for p in range(n)]
        wrongs = []
        for p in range(n):
            wrongs.append(maximal_masks(self.full & ~x for x in mins[p]))
        out = []
        for q in range(n):
            c = d[q].copy()
            for p in range(n):
                if p == q:
                    continue
                for L in self.shared[p, q]:
                    for X in mins[p]:
                        for H in self.crash_max[q]:
                            c[X & ~(L | H)] = True
            c = _up_close(c, n)
            for p in range(n):
                if p == q:
                    continue
                for L in self.shared[p, q]:
                    for H in wrongs[p]:
                        if c[L | H]:
                            return None
            out.append(c)
        return out

    def grow_decide(self, d) -> List[np.ndarray]:
        """Add sets to each decide table while a change table still exists."""
        d = [x.copy() for x in d]
        order = sorted(range(1 << self.n), key=lambda m: (-bin(m).count("1"), m))
        for p in range(self.n):
            for m in order:
                if d[p][m]:
                    continue
                trial = d[p].copy()
                trial[m] = True
                trial = _up_close(trial, self.n)
                cand = d[:p] + [trial] + d[p + 1:]
                if self.derive_change(cand) is not None:
                    d = cand
        return d

    def build(self, a, c, d) -> TrustConfig:
        P = self.cfg.participants
        sys_A, change, decide = {}, {}, {}
        for i, p in enumerate(P):
            sys_A[p] = decode(MonotoneFn(P, a[i].tobytes()), p, AVAILABILITY)
            change[p] = decode(MonotoneFn(P, c[i].tobytes()), p, KINDS)
            decide[p] = decode(MonotoneFn(P, d[i].tobytes()), p, KINDS)
        return self.cfg.with_thresholds(sys_A, change, decide)


def _key(a) -> bytes:
    return b"".join(x.tobytes() for x in a)


def synthesize(cfg: TrustConfig, exhaustive: bool = False,
               capacity: Optional[int] = None, node_limit: int = 200_000,
               optimize: bool = True) -> SearchResult:
    """Find thresholds meeting every requirement for ``cfg``'s attack labels.

    ``exhaustive`` enumerates every availability table family above the
    viability lower bound instead of following progress repairs; it is a
    cross-check for small instances.
    """
    check_capacity(cfg.n, SEARCH_CAPACITY if capacity is None else capacity)
    if dict(cfg.messages) != standard_messages(cfg.participants):
        raise ValueError("threshold search supports the standard message labels only")
    prob = _Problem(cfg)
    candidates = _exhaustive(prob) if exhaustive else _dfs(prob, node_limit)
    explored = 0
    complete = True
    for a in candidates:
        if a is None:
            complete = False
            break
        explored += 1
        c = prob.derive_change(a)
        if c is None:
            continue
        d = prob.grow_decide(a) if optimize else [x.copy() for x in a]
        c = prob.derive_change(d)
        out = prob.build(a, c, d)
        if all(r.passed for r in check_all(out, limit=1)):
            return SearchResult(out, complete, explored)
    return SearchResult(None, complete, explored)


def _dfs(prob: _Problem, node_limit: int) -> Iterator[Optional[list]]:
    """Progress-consistent availability tables, least first.  Yields
    ``None`` if the node limit cuts the search short."""
    seen = set()
    stack = [prob.a0]
    nodes = 0
    while stack:
        a = stack.pop()
        k = _key(a)
        if k in seen:
            continue
        seen.add(k)
        nodes += 1
        if nodes > node_limit:
            yield None
            return
        # change feasibility only gets harder as a grows
        if prob.derive_change(a) is None:
            continue
        v = prob.progress_violation(a)
        if v is None:
            yield a
            continue
        r, q, S = v
        grow_q = list(a)
        t = a[q].copy()
        t[S] = True
        grow_q[q] = _up_close(t, prob.n)
        grow_r = list(a)
        t = a[r].copy()
        t[S & ~(1 << q)] = True
        grow_r[r] = _up_close(t, prob.n)
        stack.append(grow_q)
        stack.append(grow_r)


def _monotone_supersets(base: np.ndarray, n: int) -> List[np.ndarray]:
    """All upward-closed tables containing ``base``."""
    out = []
    free = [m for m in range(1 << n) if not base[m]]
    seen = set()
    for bits in product((False, True), repeat=len(free)):
        t = base.copy()
        t[[m for m, b in zip(free, bits) if b]] = True
        if not np.array_equal(_up_close(t, n), t):
            continue
        k = t.tobytes()
        if k not in seen:
            seen.add(k)
            out.append(t)
    return out


def _exhaustive(prob: _Problem) -> Iterator[list]:
    if prob.n > 4:
        raise ValueError("exhaustive enumeration is limited to 4 participants")
    per = [_monotone_supersets(prob.a0[i], prob.n) for i in range(prob.n)]
    total = int(np.prod([len(x) for x in per], dtype=float))
    if total > EXHAUSTIVE_LIMIT:
        raise CapacityError(f"exhaustive search would visit {total} table families")
    for combo in product(*per):
        a = list(combo)
        if prob.progress_violation(a) is None:
            yield a

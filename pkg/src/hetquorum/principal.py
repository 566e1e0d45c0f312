"""Principals: the free distributive lattice over participant atoms.

A principal is stored as an antichain of atom sets (disjunctive normal
form).  Read a clause as a coalition: a set of participants that, acting
together, holds the principal's authority.  The principal ``a & b`` is held
only by coalitions containing both ``a`` and ``b``; ``a | b`` by coalitions
containing either.

Under this reading ``p`` acts for ``q`` exactly when every coalition
holding ``p`` also holds ``q``.  The universally trusted ``top`` is held by
no coalition (empty DNF) and ``bottom`` by every coalition, including the
empty one (DNF with a single empty clause).
"""

from __future__ import annotations

import re
from functools import lru_cache, reduce
from typing import FrozenSet, Iterable, Iterator, Optional, Tuple

Clause = FrozenSet[str]


def _minimize(clauses: Iterable[Clause]) -> FrozenSet[Clause]:
    ordered = sorted(set(clauses), key=len)
    kept: list = []
    for c in ordered:
        if not any(k <= c for k in kept):
            kept.append(c)
    return frozenset(kept)


class Principal:
    """Immutable principal in canonical antichain-DNF form."""

    __slots__ = ("clauses", "_hash")

    def __init__(self, clauses: Iterable[Iterable[str]] = ()):
        object.__setattr__(
            self, "clauses", _minimize(frozenset(c) for c in clauses))
        object.__setattr__(self, "_hash", hash(self.clauses))

    def __setattr__(self, name, value):
        raise AttributeError("Principal is immutable")

    # construction helpers
    @classmethod
    def atom(cls, name: str) -> "Principal":
        if not isinstance(name, str) or not name:
            raise ValueError(f"invalid atom id {name!r}")
        return cls([[name]])

    def __and__(self, other: "Principal") -> "Principal":
        return _and(self, other)

    def __or__(self, other: "Principal") -> "Principal":
        return _or(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, Principal) and self.clauses == other.clauses

    def __hash__(self) -> int:
        return self._hash

    def __reduce__(self):
        return (Principal, ([sorted(c) for c in self.clauses],))

    @property
    def is_top(self) -> bool:
        return not self.clauses

    @property
    def is_bottom(self) -> bool:
        return frozenset() in self.clauses

    def atoms(self) -> FrozenSet[str]:
        return frozenset().union(*self.clauses) if self.clauses else frozenset()

    def held_by(self, coalition: Iterable[str]) -> bool:
        """True if the coalition holds this principal's authority."""
        s = frozenset(coalition)
        return any(c <= s for c in self.clauses)

    def sorted_clauses(self) -> list:
        return sorted((sorted(c) for c in self.clauses),
                      key=lambda c: (len(c), c))

    def __str__(self) -> str:
        if self.is_top:
            return "top"
        if self.is_bottom:
            return "bottom"
        return " | ".join(" & ".join(c) for c in self.sorted_clauses())

    def __repr__(self) -> str:
        return f"Principal({str(self)!r})"


@lru_cache(maxsize=1 << 16)
def _and(p: Principal, q: Principal) -> Principal:
    return Principal(a | b for a in p.clauses for b in q.clauses)


@lru_cache(maxsize=1 << 16)
def _or(p: Principal, q: Principal) -> Principal:
    if p.clauses == q.clauses:
        return p
    return Principal(p.clauses | q.clauses)


TOP = Principal([])
BOTTOM = Principal([[]])


def canonicalize(p: Principal) -> Principal:
    """Return the antichain-DNF form of ``p``.

    Principals are canonical from construction, so this is the identity on
    values; it exists for callers holding a principal from elsewhere.
    """
    return Principal(p.clauses)


def conj_of(atoms: Iterable) -> Principal:
    """Conjunction of atoms (or principals).  The empty conjunction is
    ``bottom``: the least upper bound of nothing is the least element."""
    parts = [Principal.atom(a) if isinstance(a, str) else a for a in atoms]
    return reduce(lambda x, y: x & y, parts, BOTTOM)


def disj_of(atoms: Iterable) -> Principal:
    """Disjunction of atoms (or principals); empty disjunction is ``top``."""
    parts = [Principal.atom(a) if isinstance(a, str) else a for a in atoms]
    return reduce(lambda x, y: x | y, parts, TOP)


def threshold(k: int, atoms: Iterable[str]) -> Principal:
    """Principal held by any ``k`` of ``atoms``."""
    from itertools import combinations
    atoms = sorted(set(atoms))
    if k <= 0:
        return BOTTOM
    return Principal(combinations(atoms, k))


class Delegations:
    """Static atom-to-atom acts-for facts, transitively closed."""

    __slots__ = ("pairs", "_implied", "_hash")

    def __init__(self, pairs: Iterable[Tuple[str, str]] = ()):
        pairs = frozenset(pairs)
        for sup, inf in pairs:
            if not (isinstance(sup, str) and isinstance(inf, str)):
                raise TypeError("delegations relate atoms only")
        implied: dict = {}
        for sup, inf in pairs:
            implied.setdefault(sup, set()).add(inf)
        changed = True
        while changed:
            changed = False
            for s, infs in implied.items():
                extra = set()
                for i in infs:
                    extra |= implied.get(i, set())
                if not extra <= infs:
                    infs |= extra
                    changed = True
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(
            self, "_implied", {k: frozenset(v) for k, v in implied.items()})
        object.__setattr__(self, "_hash", hash(pairs))

    def __setattr__(self, name, value):
        raise AttributeError("Delegations is immutable")

    def __reduce__(self):
        return (Delegations, (tuple(sorted(self.pairs)),))

    def __eq__(self, other) -> bool:
        return isinstance(other, Delegations) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.pairs)

    def atoms(self) -> FrozenSet[str]:
        return frozenset(a for pair in self.pairs for a in pair)

    def close(self, clause: Clause) -> Clause:
        out = set(clause)
        for a in clause:
            out |= self._implied.get(a, frozenset())
        return frozenset(out)

    def __repr__(self) -> str:
        return f"Delegations({sorted(self.pairs)!r})"


NO_DELEGATIONS = Delegations()


@lru_cache(maxsize=1 << 18)
def _acts_for(p: Principal, q: Principal, d: Delegations) -> bool:
    for c in p.clauses:
        closed = d.close(c) if d else c
        if not any(k <= closed for k in q.clauses):
            return False
    return True


def acts_for(p: Principal, q: Principal,
             d: Optional[Delegations] = None) -> bool:
    """Decide ``p ≽ q`` under optional atom delegations."""
    return _acts_for(p, q, d if d is not None else NO_DELEGATIONS)


# -- text syntax ------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z0-9_][A-Za-z0-9_.-]*)|(?P<op>[&|()]))")


class PrincipalSyntaxError(ValueError):
    def __init__(self, text: str, pos: int, msg: str):
        super().__init__(f"{msg} at column {pos}: {text!r}")
        self.text = text
        self.pos = pos


def _tokens(text: str) -> Iterator[Tuple[str, str, int]]:
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PrincipalSyntaxError(text, pos, "unexpected character")
        kind = "id" if m.group("id") else "op"
        yield kind, m.group(kind), m.start(kind)
        pos = m.end()


def parse_principal(text: str) -> Principal:
    """Parse ``a & (b | c)``, ``top``, ``bottom``.  ``&`` binds tighter."""
    toks = list(_tokens(text))
    i = 0

    def peek():
        return toks[i] if i < len(toks) else (None, None, len(text))

    def expr():
        nonlocal i
        left = term()
        while peek()[1] == "|":
            i += 1
            left = left | term()
        return left

    def term():
        nonlocal i
        left = factor()
        while peek()[1] == "&":
            i += 1
            left = left & factor()
        return left

    def factor():
        nonlocal i
        kind, val, pos = peek()
        if kind == "id":
            i += 1
            if val == "top":
                return TOP
            if val == "bottom":
                return BOTTOM
            return Principal.atom(val)
        if val == "(":
            i += 1
            inner = expr()
            if peek()[1] != ")":
                raise PrincipalSyntaxError(text, peek()[2], "expected ')'")
            i += 1
            return inner
        raise PrincipalSyntaxError(text, pos, "expected principal")

    if not toks:
        raise PrincipalSyntaxError(text, 0, "empty principal")
    result = expr()
    if i != len(toks):
        raise PrincipalSyntaxError(text, toks[i][2], "trailing input")
    return result


def parse_delegation(text: str) -> Tuple[str, str]:
    """Parse ``sup >= inf``; compound principals are rejected."""
    parts = [s.strip() for s in text.split(">=")]
    if len(parts) != 2:
        raise ValueError(f"delegation must be 'sup >= inf': {text!r}")
    for s in parts:
        if not re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_.-]*", s) or s in ("top", "bottom"):
            raise ValueError(f"delegations relate atoms only: {text!r}")
    return parts[0], parts[1]

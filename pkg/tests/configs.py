"""Trust configurations written out by hand for the tests."""

import itertools

from hetquorum.config import TrustConfig
from hetquorum.label import parse_label

PARTICIPANTS = tuple("abcde")
PAIRS = "(b&c|b&d|b&e|c&d|c&e|d&e)"
TRIPLES = "(b&c&d|b&c&e|b&d&e|c&d&e)"


def alice_eve_attack():
    aA = {"a": parse_label("{a <-A a|c|d|e}")}
    aI = {"a": parse_label("{a <-I a|c|d|e}")}
    for p in "bcde":
        aA[p] = parse_label(f"{{{p} <-A {p}|{PAIRS}}}")
        aI[p] = parse_label(f"{{{p} <-I b|c|d|e}}")
    return aA, aI


def alice_eve() -> TrustConfig:
    aA, aI = alice_eve_attack()
    sys_A = {"a": parse_label("{a <-A a&c&d&e}")}
    for p in "bcde":
        sys_A[p] = parse_label(f"{{{p} <-A {p}&{TRIPLES}}}")
    change = {p: parse_label(f"{{{p} <-I {PAIRS}}}") for p in PARTICIPANTS}
    decide = {p: parse_label(f"{{{p} <-I {TRIPLES}}}") for p in PARTICIPANTS}
    return TrustConfig(PARTICIPANTS, aA, aI, sys_A, change, decide)


def alice_eve_attack_only() -> TrustConfig:
    aA, aI = alice_eve_attack()
    return TrustConfig(PARTICIPANTS, aA, aI)


def threshold_text(k, atoms):
    return " | ".join("&".join(c) for c in itertools.combinations(atoms, k))


def crash_four() -> TrustConfig:
    """Four participants, any one crash, with availability-only thresholds."""
    P = tuple("0123")
    aA, aI, sysA, C, D = {}, {}, {}, {}, {}
    for p in P:
        aA[p] = parse_label(f"{{{p} <-A {p} | {threshold_text(2, P)}}}")
        aI[p] = parse_label(f"{{{p} <-I 0|1|2|3}}")
        sysA[p] = parse_label(f"{{{p} <-A {threshold_text(3, P)}}}")
        C[p] = parse_label(f"{{{p} <-A {threshold_text(2, P)}}}")
        D[p] = parse_label(f"{{{p} <-A {threshold_text(3, P)}}}")
    return TrustConfig(P, aA, aI, sysA, C, D)


def byzantine_six() -> TrustConfig:
    """Six participants, any one Byzantine failure; attack pairs range over
    all six participants."""
    P = tuple("012345")
    aA, aI, sysA, C, D = {}, {}, {}, {}, {}
    for p in P:
        aA[p] = parse_label(f"{{{p} <-A {p} | {threshold_text(2, P)}}}")
        aI[p] = parse_label(f"{{{p} <-I {p} | {threshold_text(2, P)}}}")
        sysA[p] = parse_label(f"{{{p} <-A {threshold_text(5, P)}}}")
        C[p] = parse_label(f"{{{p} <-I {threshold_text(3, P)}}}")
        D[p] = parse_label(f"{{{p} <-I {threshold_text(5, P)}}}")
    return TrustConfig(P, aA, aI, sysA, C, D)

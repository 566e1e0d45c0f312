import numpy as np
import pytest

from hetquorum.label import (AVAILABILITY, BOTTOM_LABEL, EMPTY, INTEGRITY, PERFECT_INTEGRITY,
                             TOP_LABEL, Label, LabelSyntaxError, Policy, equivalent,
                             flows_to, join, join_all, meet, parse_label, policy,
                             project, split, strictly_flows_to)
from hetquorum.principal import BOTTOM, TOP, Principal, parse_principal

import lattice_laws
import oracles

P = parse_principal


def L(text):
    return parse_label(text)


def test_project():
    lab = L("{ o <-I p ; o <-A q }")
    assert project(lab, INTEGRITY) == L("{ o <-I p }")
    assert project(EMPTY, AVAILABILITY) == EMPTY


def test_project_commutes_with_join():
    l1 = L("{ o <-I p ; o <-A q }")
    l2 = L("{ r <-I s ; o <-A t }")
    assert project(join(l1, l2), INTEGRITY) == join(project(l1, INTEGRITY), project(l2, INTEGRITY))


def test_join_same_owner_is_disjunction():
    assert join(L("{ o <-I p }"), L("{ o <-I q }")) == L("{ o <-I p | q }")


def test_join_idempotent_semantically():
    lab = L("{ o <-I p & q ; r <-A p ; o <-A s }")
    assert equivalent(join(lab, lab), lab)


def test_join_different_owners():
    assert join(L("{ o <-I p }"), L("{ u <-I q }")) == L("{ o | u <-I p | q }")


def test_meet_same_owner_is_conjunction():
    assert equivalent(meet(L("{ o <-I p }"), L("{ o <-I q }")), L("{ o <-I p & q }"))


def test_meet_is_union():
    m = meet(L("{ o <-A p }"), L("{ o <-A q }"))
    assert m == L("{ o <-A p ; o <-A q }")
    assert equivalent(m, L("{ o <-A p & q }"))


def test_meet_with_empty_label():
    lab = L("{ o <-I p ; o <-A q }")
    assert meet(lab, EMPTY) == lab


def test_flows_examples():
    assert flows_to(L("{ o <-I p }"), L("{ o <-I p | q }"))
    assert not flows_to(L("{ o <-I p | q }"), L("{ o <-I p }"))
    lab = L("{ o <-I p ; u <-A q & r }")
    assert flows_to(lab, lab)


def test_most_and_least_restrictive_integrity():
    lo = Label([Policy(TOP, INTEGRITY, TOP)])
    hi = Label([Policy(BOTTOM, INTEGRITY, BOTTOM)])
    assert flows_to(lo, hi)
    assert not flows_to(hi, lo)
    assert lo == PERFECT_INTEGRITY


def test_bottom_and_top_labels_bound_everything():
    rng = np.random.default_rng(3)
    for _ in range(200):
        lab = lattice_laws.random_label(rng, "abcd")
        assert flows_to(BOTTOM_LABEL, lab)
        assert flows_to(lab, TOP_LABEL)


def test_split():
    assert split(L("{ o <-I p ; o <-A q }")) == (L("{ o <-I p }"), L("{ o <-A q }"))
    assert split(EMPTY) == (EMPTY, EMPTY)


def test_flows_decomposes_by_kind():
    rng = np.random.default_rng(8)
    for _ in range(500):
        l1, l2 = (lattice_laws.random_label(rng, "abcd") for _ in range(2))
        i1, a1 = split(l1)
        i2, a2 = split(l2)
        assert flows_to(l1, l2) == (flows_to(i1, i2) and flows_to(a1, a2))


def test_strict_and_equivalence():
    assert strictly_flows_to(L("{ o <-I p }"), L("{ o <-I p | q }"))
    assert not strictly_flows_to(L("{ o <-I p }"), L("{ o <-I p }"))
    assert equivalent(L("{ o <-I p ; o <-I p | q }"), L("{ o <-I p }"))


def test_join_all_and_policy_helper():
    labs = [policy("o", INTEGRITY, x) for x in "pqr"]
    assert join_all(labs) == L("{ o <-I p | q | r }")
    assert join_all([]) == BOTTOM_LABEL


def test_views():
    lab = L("{ a <-I b ; top <-A c }")
    assert lab.view(INTEGRITY, Principal.atom("a")) == P("b")
    assert lab.view(INTEGRITY, Principal.atom("c")) == BOTTOM
    assert lab.view(AVAILABILITY, Principal.atom("z")) == P("c")


def test_label_family_laws_three_atoms():
    # a subset of the exhaustive acceptance check: owners a and b, integrity
    labs = lattice_laws.small_labels("ab", ("a", "b"), ("I", "A"))
    assert lattice_laws.label_family_laws(labs, "ab") == []


def test_random_laws():
    assert lattice_laws.random_laws(1000, seed=21) == []


@pytest.mark.parametrize("text", [
    "{ o <-I p ; o <-A q }",
    "{}",
    "{ a | b <-I c & d | e }",
    "{ top <-A bottom }",
])
def test_parse_round_trip(text):
    lab = L(text)
    assert L(str(lab)) == lab


@pytest.mark.parametrize("text", ["{ o <-X p }", "o <-I p", "{ o <- p }", "{ o <-I }", "{ ; }"])
def test_parse_errors(text):
    with pytest.raises((LabelSyntaxError, ValueError)):
        L(text)


def test_oracle_agrees_on_view_definition():
    lab = L("{ a <-I b & c ; a | b <-I c ; b <-A a }")
    pols = [(p.owner, p.kind, p.trustee) for p in lab.policies]
    for x in oracles.viewers("abc"):
        for kind in "IA":
            assert np.array_equal(oracles.view_table(pols, kind, x, "abc"),
                                  oracles.table(lab.view(kind, x), "abc"))

import itertools

import numpy as np
import pytest

from posetkit import CycleError, UnknownIdError, CapExceeded
from posetkit.construct import generate_P
from posetkit.enumerate import (
    KNOWN_CONNECTED_COUNTS,
    KNOWN_POSET_COUNTS,
    connected_posets_up_to_iso,
    posets_up_to_iso,
)
from posetkit.poset import (
    antichain,
    chain,
    disjoint_union,
    down_set,
    find_isomorphism,
    from_json,
    from_relation,
    interval,
    is_order_isomorphism,
    order_components,
    up_set,
)


def abc():
    return from_relation(["a", "b", "c"], [("a", "b"), ("b", "c")])


# -- construction --------------------------------------------------------

def test_chain_closure():
    P = abc()
    assert int(P.le.sum()) == 6
    assert P.leq("a", "c")
    assert not P.leq("c", "a")


def test_single_point():
    P = from_relation(["a"], [])
    assert len(P) == 1 and P.leq("a", "a")


def test_cycle_rejected():
    with pytest.raises(CycleError):
        from_relation(["a", "b"], [("a", "b"), ("b", "a")])


def test_unknown_id_in_pair():
    with pytest.raises(UnknownIdError):
        from_relation(["a"], [("a", "z")])


def test_cap():
    with pytest.raises(CapExceeded):
        from_relation([str(i) for i in range(10)], [], cap=5)


def test_json_round_trip():
    P = generate_P(2, 2)
    Q = from_json(P.to_json())
    assert Q == P
    assert from_json(P.dumps()) == P


# -- cones ---------------------------------------------------------------

def test_down_set_chain():
    assert down_set(abc(), ["b"]) == ("a", "b")


def test_down_set_p03():
    P = generate_P(0, 3)
    assert set(down_set(P, ["p[1]"])) == {"p", "p[2]", "p[1]"}


def test_empty_cones():
    P = generate_P(1, 2)
    assert down_set(P, []) == ()
    assert up_set(P, []) == ()


def test_up_set_chain():
    assert up_set(abc(), ["b"]) == ("b", "c")


def test_up_set_p12():
    P = generate_P(1, 2)
    assert set(up_set(P, ["p[0,0]"])) == {"p[0,0]", "p[0,1]", "p[0]"}


def test_up_set_everything():
    P = generate_P(1, 2)
    assert set(up_set(P, P.elements)) == set(P.elements)


def test_interval():
    P = abc()
    assert interval(P, "a", "c") == ("a", "b", "c")
    assert interval(P, "c", "a") == ()


def test_interval_p12():
    P = generate_P(1, 2)
    assert set(interval(P, "p[1,0]", "p[0]")) == {"p[1,0]", "p[1,1]", "p[1]", "p[0]"}


def test_cones_match_brute_force():
    P = generate_P(2, 2)
    for x in P.elements:
        assert set(down_set(P, [x])) == {y for y in P.elements if P.leq(y, x)}
        assert set(up_set(P, [x])) == {y for y in P.elements if P.leq(x, y)}


# -- components and unions ----------------------------------------------

def test_components_antichain():
    part = order_components(antichain(4))
    assert len(part) == 4
    assert all(len(b) == 1 for b in part.blocks)


def test_components_two_chains():
    U = disjoint_union([chain(2), chain(2)])
    part = order_components(U)
    assert len(U) == 4
    assert sorted(len(b) for b in part.blocks) == [2, 2]


def test_p22_connected():
    assert len(order_components(generate_P(2, 2))) == 1


def test_empty_union():
    assert len(disjoint_union([])) == 0


def test_union_with_p12():
    U = disjoint_union([generate_P(1, 2), from_relation(["s"], [])])
    assert len(U) == 8
    assert len(order_components(U)) == 2


def _brute_components(P):
    ids = list(P.elements)
    parent = {x: x for x in ids}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for x, y in itertools.product(ids, ids):
        if P.leq(x, y):
            parent[find(x)] = find(y)
    return len({find(x) for x in ids})


@pytest.mark.parametrize("n", range(1, 6))
def test_components_vs_union_find(n):
    for P in posets_up_to_iso(n):
        assert len(order_components(P)) == _brute_components(P)


# -- isomorphism ---------------------------------------------------------

def test_iso_renamed_chain():
    A = chain(2, "a")
    B = chain(2, "b")
    m = find_isomorphism(A, B)
    assert m == {"a0": "b0", "a1": "b1"}


def test_iso_chain_vs_antichain():
    assert find_isomorphism(chain(2), antichain(2)) is None


def test_p03_is_a_4_chain():
    m = find_isomorphism(generate_P(0, 3), chain(4))
    assert m is not None and is_order_isomorphism(generate_P(0, 3), chain(4), m)


@pytest.mark.parametrize("seed", [0, 1, 7])
def test_iso_under_random_relabelling(seed):
    rng = np.random.default_rng(seed)
    P = generate_P(2, 2)
    perm = rng.permutation(len(P))
    names = [f"q{i}" for i in range(len(P))]
    ren = {P.elements[i]: names[perm[i]] for i in range(len(P))}
    Q = from_relation(sorted(names), [(ren[a], ren[b]) for a, b in P.covers()])
    m = find_isomorphism(P, Q, seed=seed)
    assert m is not None and is_order_isomorphism(P, Q, m)


# -- enumeration oracle --------------------------------------------------

def _brute_unlabelled_count(n):
    """Count posets on n points up to isomorphism by raw canonical forms.

    Every poset has a linear extension, so it suffices to enumerate the
    transitive relations contained in the strict upper triangle.
    """
    cells = [(i, j) for i in range(n) for j in range(i + 1, n)]
    perms = list(itertools.permutations(range(n)))
    seen = set()
    for bits in range(1 << len(cells)):
        rel = {cells[k] for k in range(len(cells)) if bits >> k & 1}
        if any((i, k) not in rel for (i, j) in rel for (j2, k) in rel if j == j2):
            continue
        canon = min(tuple(sorted((p[i], p[j]) for i, j in rel)) for p in perms)
        seen.add(canon)
    return len(seen)


@pytest.mark.parametrize("n", range(0, 6))
def test_enumeration_counts_vs_brute_force(n):
    assert len(posets_up_to_iso(n)) == _brute_unlabelled_count(n) == KNOWN_POSET_COUNTS[n]


def test_enumeration_classes_are_distinct():
    reps = posets_up_to_iso(4)
    for A, B in itertools.combinations(reps, 2):
        assert find_isomorphism(A, B) is None


@pytest.mark.parametrize("n", range(1, 7))
def test_connected_counts(n):
    assert len(connected_posets_up_to_iso(n)) == KNOWN_CONNECTED_COUNTS[n]

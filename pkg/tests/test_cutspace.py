import itertools
from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posetkit import InfeasiblePlacement, NotSeparablePrecondition, UndecidableAtDepth
from posetkit.construct import generate_P
from posetkit.cutspace import (
    ClopenSet,
    block,
    build_fragment,
    check_invariants,
    empty_point,
    explain_witness,
    fragment_from_json,
    full_point,
    gap_point,
    is_decreasing,
    jump_closed,
    jump_open,
    membership,
    order_iso_check,
    parse_point,
    separation_witness,
    sweep,
)
from posetkit.exact import QSqrt2
from posetkit.poset import find_isomorphism


# -- membership ------------------------------------------------------------

def test_jump_membership_examples():
    U = block(Fr(1, 2), Fr(3, 4))
    assert membership(jump_closed(Fr(1, 2)), U)
    assert not membership(jump_open(Fr(1, 2)), U)
    assert membership(jump_open(Fr(3, 4)), U)
    assert not membership(jump_closed(Fr(3, 4)), U)


def test_gap_with_bounds_only():
    g = gap_point(bounds=[(Fr(30, 100), Fr(31, 100))])
    assert membership(g, block(Fr(1, 4), Fr(1, 3)))
    assert not membership(g, block(Fr(1, 3), Fr(1, 2)))


def test_gap_straddling_block_is_undecidable():
    g = gap_point(bounds=[(Fr(1, 4), Fr(1, 2))])
    with pytest.raises(UndecidableAtDepth):
        membership(g, block(Fr(1, 3), Fr(3, 4)))


def test_gap_refines_when_position_known():
    g = gap_point(QSqrt2(0, Fr(1, 2)))  # 1/sqrt2 ≈ 0.70711
    assert membership(g, block(Fr(7071, 10000), Fr(7072, 10000)))
    assert not membership(g, block(Fr(70711, 100000), Fr(3, 4)))


def test_extreme_points():
    U = block(None, Fr(1, 2))
    assert membership(empty_point(), U) and not membership(full_point(), U)
    assert membership(full_point(), U.complement())


_rat = st.fractions(min_value=Fr(1, 60), max_value=Fr(59, 60), max_denominator=60)
_end = st.one_of(st.none(), _rat)


@st.composite
def clopens(draw):
    blocks = []
    for lo, hi in draw(st.lists(st.tuples(_end, _end), max_size=4)):
        if lo is not None and hi is not None and not lo < hi:
            continue
        blocks.append((lo, hi))
    return ClopenSet(tuple(blocks))


@st.composite
def points(draw):
    kind = draw(st.sampled_from(["empty", "full", "open", "closed", "gap"]))
    if kind == "empty":
        return empty_point()
    if kind == "full":
        return full_point()
    if kind == "gap":
        a = draw(st.fractions(min_value=Fr(-1, 2), max_value=Fr(1, 2), max_denominator=30))
        b = draw(st.fractions(min_value=Fr(1, 30), max_value=Fr(1, 3), max_denominator=30))
        x = QSqrt2(a, b)
        if not (0 < x < 1):
            x = QSqrt2(Fr(1, 2), Fr(1, 7))
        return gap_point(x)
    r = draw(_rat)
    return jump_open(r) if kind == "open" else jump_closed(r)


def _naive_member(pt, U):
    """Direct reading of [(0,lo], (0,hi)) on the sort keys."""
    k = pt.key
    for lo, hi in U.blocks:
        low_ok = lo is None or k >= (lo, 1)
        high_ok = hi is None or k <= (hi, 0)
        if low_ok and high_ok:
            return True
    return False


@settings(max_examples=300, deadline=None)
@given(points(), clopens())
def test_membership_vs_keys(pt, U):
    assert membership(pt, U) == _naive_member(pt, U) == U.contains_key(pt.key)


@settings(max_examples=300, deadline=None)
@given(points(), clopens(), clopens())
def test_boolean_algebra(pt, U, V):
    assert membership(pt, U.complement()) != membership(pt, U)
    assert membership(pt, U.union(V)) == (membership(pt, U) or membership(pt, V))
    assert U.complement().complement() == U


def test_everything_nothing():
    assert ClopenSet.everything().complement() == ClopenSet.nothing()
    assert ClopenSet.nothing().complement() == ClopenSet.everything()


def test_blocks_normalised():
    U = ClopenSet(((Fr(1, 2), Fr(3, 4)), (Fr(1, 4), Fr(1, 2)), (Fr(7, 8), None)))
    assert U.blocks == ((Fr(1, 4), Fr(3, 4)), (Fr(7, 8), None))
    assert ClopenSet.from_json(U.to_json()) == U


def test_bad_blocks():
    with pytest.raises(ValueError):
        block(Fr(1, 2), Fr(1, 3))
    with pytest.raises(ValueError):
        block(Fr(0), Fr(1, 3))


# -- fragments -----------------------------------------------------------

def test_fragment_p12():
    F = build_fragment(1, 2, [Fr(1, 2), Fr(1, 3)])
    assert len(F.points) == 7
    assert check_invariants(F) == []
    assert find_isomorphism(F.poset, generate_P(1, 2)) is not None
    rep = order_iso_check(F)
    assert rep.ok and rep.components == 1 and rep.compatible


def test_fragment_two_points():
    F = build_fragment(0, 1)
    assert len(F.points) == 2
    assert F.precedes(F.point(()), F.point((0,)))
    assert order_iso_check(F).ok


def test_fragment_p22_lengths():
    F = build_fragment(2, 2)
    assert len(F.points) == 15
    for p, (lo, hi) in F.intervals.items():
        assert hi - lo <= Fr(1, 2 ** len(p))
        if len(p) == 2:
            assert hi - lo <= Fr(1, 4)
        if len(p) == 3:
            assert hi - lo <= Fr(1, 8)
    assert order_iso_check(F).ok


def test_excluded_jumps():
    rats = [Fr(1, 2), Fr(2, 3), Fr(3, 5)]
    F = build_fragment(2, 3, rats)
    for p, (lo, hi) in F.intervals.items():
        assert not lo <= rats[len(p) - 1] <= hi


@pytest.mark.parametrize("n,w", [(1, 2), (2, 3), (3, 2)])
def test_sibling_intervals_disjoint(n, w):
    F = build_fragment(n, w)
    for p in F.paths:
        if len(p) > n:
            continue
        kids = sorted(F.intervals[p + (i,)] for i in range(w))
        assert all(a[1] < b[0] for a, b in zip(kids, kids[1:]))
        if p:
            plo, phi = F.intervals[p]
            assert all(plo <= lo and hi <= phi for lo, hi in kids)


def test_seed_changes_gaps_not_order():
    A, B = build_fragment(1, 2, seed=0), build_fragment(1, 2, seed=5)
    assert A.gaps != B.gaps
    assert A.poset == B.poset
    assert build_fragment(1, 2, seed=5) == B


def test_build_errors():
    with pytest.raises(ValueError):
        build_fragment(2, 2, [Fr(1, 2)])
    with pytest.raises(ValueError):
        build_fragment(1, 2, [Fr(1, 2), Fr(1, 2)])
    with pytest.raises(ValueError):
        build_fragment(-1, 2)


def test_fragment_json_round_trip():
    F = build_fragment(2, 2, seed=3)
    G = fragment_from_json(F.to_json())
    assert G == F and G.gaps == F.gaps


def test_fragment_json_tampered():
    data = build_fragment(1, 2).to_json()
    data["intervals"]["x[0]"] = ["1/100", "99/100"]
    with pytest.raises(InfeasiblePlacement):
        fragment_from_json(data)


# -- decreasing sets and witnesses ----------------------------------------

def test_is_decreasing_examples():
    F = build_fragment(1, 2, [Fr(1, 2), Fr(1, 3)])
    x, x0 = F.point(()), F.point((0,))
    assert is_decreasing(F, block(None, Fr(1, 100)))
    lo, hi = F.intervals[(0,)]
    U = block(lo, hi)
    assert membership(x0, U) and not membership(x, U)
    assert not is_decreasing(F, U)


def test_witness_cut_order_case():
    F = build_fragment(1, 2, [Fr(1, 2), Fr(1, 3)])
    u, v = jump_closed(Fr(1, 10)), F.point(())
    U, case = explain_witness(F, u, v)
    assert case == "cut-order"
    assert U.blocks[0][0] is None and len(U.blocks) == 1
    s = U.blocks[0][1]
    assert Fr(1, 10) < s and jump_closed(s).key < v.key
    assert membership(u, U) and not membership(v, U)


def test_witness_deep_u_above_root():
    F = build_fragment(2, 3)
    u, v = F.point((1, 2, 0)), F.point(())
    U, case = explain_witness(F, u, v)
    assert case == "root-v"
    assert U == F.sibling_union((1,), 2)
    assert membership(u, U) and not membership(v, U) and is_decreasing(F, U)


def test_witness_prefix_branch():
    F = build_fragment(2, 2)
    u, v = F.point((0,)), F.point((0, 1, 0))
    U, case = explain_witness(F, u, v)
    assert case == "prefix-u"
    assert U == F.sibling_union((0, 1), 0).complement()
    assert membership(u, U) and not membership(v, U) and is_decreasing(F, U)


def test_witness_precondition():
    F = build_fragment(1, 2)
    with pytest.raises(NotSeparablePrecondition):
        separation_witness(F, F.point((0,)), F.point(()))


def test_witness_canonical():
    F = build_fragment(2, 2)
    pairs = [(a, b) for a, b in itertools.permutations(F.probes[:20], 2) if not F.precedes(b, a)]
    first = [separation_witness(F, a, b).to_json() for a, b in pairs]
    G = build_fragment(2, 2)
    again = [separation_witness(G, a, b).to_json() for a, b in pairs]
    assert first == again


@pytest.mark.parametrize("n,w", [(0, 1), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (3, 1)])
def test_small_sweeps(n, w):
    rep = sweep(build_fragment(n, w))
    assert rep.ok, rep.failures[:3]
    assert rep.passed == rep.pairs > 0


def test_sweep_uses_every_kind_of_probe():
    F = build_fragment(2, 2)
    kinds = {p.kind for p in F.probes}
    assert kinds == {"empty", "full", "jump-open", "jump-closed", "gap"}
    assert len(F.probes) > len(F.points)


def test_sweep_case_coverage_p32():
    rep = sweep(build_fragment(3, 2))
    assert rep.ok
    for case in ("cut-order", "deep-u", "deep-v", "isolated-u", "isolated-v", "root-v"):
        assert rep.cases.get(case, 0) > 0, case


# -- parsing ---------------------------------------------------------------

def test_parse_point():
    F = build_fragment(1, 2)
    assert parse_point("(0,1/2]") == jump_closed(Fr(1, 2))
    assert parse_point("(0,1/2)") == jump_open(Fr(1, 2))
    assert parse_point("empty") == empty_point()
    assert parse_point("full") == full_point()
    assert parse_point("gap:1/2|1/10").alpha == QSqrt2(Fr(1, 2), Fr(1, 10))
    assert parse_point("x[0,1]", F) == F.point((0, 1))
    for bad in ("(0,3/2]", "x[9]", "gap:1/2|0", "nonsense"):
        with pytest.raises(ValueError):
            parse_point(bad, F)

"""Finite bounded distributive lattices and the finite Priestley/Birkhoff duality.

``downset_lattice`` sends a finite poset to its lattice of down-sets (in the
discrete topology every down-set is clopen); ``prime_spectrum_poset`` sends a
lattice to its prime ideals ordered by inclusion.  The two round trips return
explicit isomorphisms built from the natural maps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _kernels
from .errors import CapExceeded, NotALattice, NotDistributive, RoundTripFailure
from .poset import (
    DEFAULT_UNIVERSE_CAP,
    FinitePoset,
    from_closed_matrix,
    from_json as poset_from_json,
    is_order_isomorphism,
    iter_bits,
)

DOWNSET_CAP = 1 << 20


@dataclass(frozen=True, eq=False)
class FiniteLattice:
    poset: FinitePoset
    meet: np.ndarray = field(repr=False)
    join: np.ndarray = field(repr=False)
    bottom: int
    top: int

    def __post_init__(self):
        self.meet.setflags(write=False)
        self.join.setflags(write=False)

    def __len__(self):
        return len(self.poset)

    def __eq__(self, other):
        if not isinstance(other, FiniteLattice):
            return NotImplemented
        return self.poset == other.poset

    def __hash__(self):
        return hash(self.poset)

    @property
    def carrier(self) -> tuple[str, ...]:
        return self.poset.elements

    def to_json(self) -> dict:
        return {"poset": self.poset.to_json()}


def lattice_from_poset(P: FinitePoset) -> FiniteLattice:
    """Derive meet and join tables from the order, rejecting non-lattices."""
    n = len(P)
    if n == 0:
        raise NotALattice("the empty poset has no bounds")
    order = P.linear_extension()
    rank = [0] * n
    for r, i in enumerate(order):
        rank[i] = r
    # masks re-indexed along the linear extension: the least member of a set
    # with a minimum is its lowest bit, the greatest its highest bit
    def relabel(mask: int) -> int:
        out = 0
        for i in iter_bits(mask):
            out |= 1 << rank[i]
        return out

    up = [relabel(m) for m in P.up_masks]
    down = [relabel(m) for m in P.down_masks]
    up_r = [0] * n
    down_r = [0] * n
    for i in range(n):
        up_r[rank[i]] = up[i]
        down_r[rank[i]] = down[i]
    join = np.empty((n, n), dtype=np.int32)
    meet = np.empty((n, n), dtype=np.int32)
    for a in range(n):
        for b in range(a, n):
            ub = up[a] & up[b]
            if not ub:
                raise NotALattice(f"{P.elements[a]!r} and {P.elements[b]!r} have no upper bound")
            lo = (ub & -ub).bit_length() - 1
            if up_r[lo] != ub:
                raise NotALattice(f"{P.elements[a]!r} and {P.elements[b]!r} have no least upper bound")
            lb = down[a] & down[b]
            if not lb:
                raise NotALattice(f"{P.elements[a]!r} and {P.elements[b]!r} have no lower bound")
            hi = lb.bit_length() - 1
            if down_r[hi] != lb:
                raise NotALattice(f"{P.elements[a]!r} and {P.elements[b]!r} have no greatest lower bound")
            join[a, b] = join[b, a] = order[lo]
            meet[a, b] = meet[b, a] = order[hi]
    bottom = order[0]
    top = order[-1]
    if P.up_masks[bottom] != P.full_mask or P.down_masks[top] != P.full_mask:
        raise NotALattice("missing bottom or top")
    return FiniteLattice(P, meet, join, bottom, top)


def lattice_from_json(data: Mapping | str, cap: int = DEFAULT_UNIVERSE_CAP) -> FiniteLattice:
    if isinstance(data, str):
        data = json.loads(data)
    return lattice_from_poset(poset_from_json(data["poset"], cap=cap))


# ---------------------------------------------------------------------------
# down-sets


def _downsets_python(pred: list[int], cap: int) -> list[int] | None:
    out: list[int] = []
    n = len(pred)

    def rec(pos: int, mask: int) -> bool:
        if pos == n:
            out.append(mask)
            return len(out) <= cap
        if not rec(pos + 1, mask):
            return False
        if pred[pos] & ~mask == 0:
            return rec(pos + 1, mask | (1 << pos))
        return True

    if not rec(0, 0):
        return None
    return sorted(out)


def downset_masks(X: FinitePoset, cap: int = DOWNSET_CAP) -> list[int]:
    """All down-sets of X as masks over X's canonical indices (unsorted order)."""
    n = len(X)
    order = X.linear_extension()
    rank = {i: r for r, i in enumerate(order)}
    pred = []
    for i in order:
        m = 0
        for j in iter_bits(X.down_masks[i] & ~(1 << i)):
            m |= 1 << rank[j]
        pred.append(m)
    if n <= _kernels.MAX_MASK_BITS:
        found = _kernels.enumerate_downsets(np.array(pred, dtype=np.int64), cap)
        ranked = None if found is None else [int(v) for v in found]
    else:
        ranked = _downsets_python(pred, cap)
    if ranked is None:
        raise CapExceeded(f"more than {cap} down-sets")
    out = []
    for m in ranked:
        c = 0
        for r in iter_bits(m):
            c |= 1 << order[r]
        out.append(c)
    return out


def _canonical_key(mask: int) -> tuple:
    return (mask.bit_count(), tuple(iter_bits(mask)))


def set_name(P: FinitePoset, mask: int) -> str:
    return "[" + ",".join(P.ids_of(mask)) + "]"


def _subset_lattice(
    names: list[str], masks: list[int], cap: int
) -> FiniteLattice:
    """Lattice of a family of sets closed under union and intersection."""
    n = len(masks)
    if n > cap:
        raise CapExceeded(f"{n} lattice elements exceeds universe cap {cap}")
    if max(masks, default=0).bit_length() <= 63:
        arr = np.array(masks, dtype=np.int64)
        order = np.argsort(arr)
        sorted_arr = arr[order]
        meet_m = np.bitwise_and.outer(arr, arr)
        join_m = np.bitwise_or.outer(arr, arr)
        meet = order[np.searchsorted(sorted_arr, meet_m)].astype(np.int32)
        join = order[np.searchsorted(sorted_arr, join_m)].astype(np.int32)
        le = (arr[:, None] & ~arr[None, :]) == 0
    else:
        pos = {m: i for i, m in enumerate(masks)}
        meet = np.array([[pos[a & b] for b in masks] for a in masks], dtype=np.int32)
        join = np.array([[pos[a | b] for b in masks] for a in masks], dtype=np.int32)
        le = np.array([[a & ~b == 0 for b in masks] for a in masks], dtype=bool)
    bottom = masks.index(min(masks, key=int.bit_count))
    top = masks.index(max(masks, key=int.bit_count))
    return FiniteLattice(from_closed_matrix(names, le), meet, join, bottom, top)


def _downset_lattice(
    X: FinitePoset, cap: int, universe_cap: int
) -> tuple[FiniteLattice, list[int]]:
    masks = sorted(downset_masks(X, cap), key=_canonical_key)
    names = [set_name(X, m) for m in masks]
    return _subset_lattice(names, masks, universe_cap), masks


def downset_lattice(
    X: FinitePoset, cap: int = DOWNSET_CAP, universe_cap: int = DEFAULT_UNIVERSE_CAP
) -> FiniteLattice:
    """All decreasing subsets of X under inclusion; meet is ∩ and join ∪."""
    return _downset_lattice(X, cap, universe_cap)[0]


# ---------------------------------------------------------------------------
# distributivity


@dataclass
class DistributivityReport:
    ok: bool
    axiom_failures: list[str]
    violations: list[tuple[str, str, str]]

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "axiom_failures": self.axiom_failures,
            "violations": [list(t) for t in self.violations],
        }


def check_bounded_distributive(L: FiniteLattice) -> DistributivityReport:
    """Full scan of the lattice axioms, bounds and x∧(y∨z) = (x∧y)∨(x∧z)."""
    P = L.poset
    ids = P.elements
    n = len(P)
    failures: list[str] = []
    down, up = P.down_masks, P.up_masks
    for a in range(n):
        for b in range(n):
            m, j = int(L.meet[a, b]), int(L.join[a, b])
            if down[m] != down[a] & down[b]:
                failures.append(f"meet({ids[a]},{ids[b]}) = {ids[m]} is not the glb")
            if up[j] != up[a] & up[b]:
                failures.append(f"join({ids[a]},{ids[b]}) = {ids[j]} is not the lub")
    if up[L.bottom] != P.full_mask:
        failures.append(f"{ids[L.bottom]} is not below every element")
    if down[L.top] != P.full_mask:
        failures.append(f"{ids[L.top]} is not above every element")
    violations: list[tuple[str, str, str]] = []
    M = np.asarray(L.meet)
    J = np.asarray(L.join)
    for x in range(n):
        lhs = M[x][J]  # x ∧ (y ∨ z)
        rhs = J[M[x][:, None], M[x][None, :]]  # (x∧y) ∨ (x∧z)
        for y, z in np.argwhere(lhs != rhs):
            violations.append((ids[x], ids[int(y)], ids[int(z)]))
    return DistributivityReport(not failures and not violations, failures, violations)


def _require_distributive(L: FiniteLattice) -> None:
    rep = check_bounded_distributive(L)
    if not rep.ok:
        detail = rep.axiom_failures[:1] or [
            "x∧(y∨z) != (x∧y)∨(x∧z) for (x,y,z) = (%s,%s,%s)" % rep.violations[0]
        ]
        raise NotDistributive("not a bounded distributive lattice: " + detail[0], rep.violations)


# ---------------------------------------------------------------------------
# ideals


def _ideal_closure(L: FiniteLattice, mask: int) -> int:
    """Smallest decreasing, join-closed set containing ``mask``."""
    if not mask:
        return 0
    P = L.poset
    while True:
        mask = P.down_mask(mask)
        bits = list(iter_bits(mask))
        j = bits[0]
        for b in bits[1:]:
            j = int(L.join[j, b])
        if mask >> j & 1:
            return mask
        mask |= 1 << j


def closed_ideal_sets(L: FiniteLattice) -> list[int]:
    """Every decreasing join-closed subset (incl. ∅), by NextClosure in lectic order."""
    n = len(L)
    found = []
    current = _ideal_closure(L, 0)
    found.append(current)
    full = (1 << n) - 1
    while current != full:
        for i in range(n - 1, -1, -1):
            bit = 1 << i
            if current & bit:
                continue
            prefix = current & (bit - 1)
            cand = _ideal_closure(L, prefix | bit)
            if cand & (bit - 1) == prefix:
                current = cand
                break
        else:  # pragma: no cover - NextClosure always reaches the full set
            break
        found.append(current)
    return found


def is_prime_ideal(L: FiniteLattice, mask: int) -> bool:
    P = L.poset
    n = len(L)
    if mask == 0 or mask == P.full_mask or not P.is_decreasing(mask):
        return False
    inside = np.array([(mask >> i) & 1 for i in range(n)], dtype=bool)
    J = np.asarray(L.join)
    if not inside[J[np.ix_(inside, inside)]].all():
        return False
    outside = ~inside
    return not inside[np.asarray(L.meet)[np.ix_(outside, outside)]].any()


def _prime_masks(L: FiniteLattice) -> list[int]:
    _require_distributive(L)
    primes = [m for m in closed_ideal_sets(L) if is_prime_ideal(L, m)]
    return sorted(primes, key=_canonical_key)


def prime_ideals(L: FiniteLattice) -> list[tuple[str, ...]]:
    """All prime ideals as member tuples in canonical order."""
    return [L.poset.ids_of(m) for m in _prime_masks(L)]


def _spectrum(L: FiniteLattice) -> tuple[FinitePoset, list[int]]:
    masks = _prime_masks(L)
    names = [set_name(L.poset, m) for m in masks]
    le = np.array([[a & ~b == 0 for b in masks] for a in masks], dtype=bool).reshape(
        len(masks), len(masks)
    )
    return from_closed_matrix(names, le), masks


def prime_spectrum_poset(L: FiniteLattice) -> FinitePoset:
    """Prime ideals ordered by inclusion, named by their sorted member lists."""
    return _spectrum(L)[0]


def join_irreducibles(L: FiniteLattice) -> tuple[str, ...]:
    _require_distributive(L)
    J = np.asarray(L.join)
    n = len(L)
    out = []
    for x in range(n):
        if x == L.bottom:
            continue
        a, b = np.nonzero(J == x)
        if np.all((a == x) | (b == x)):
            out.append(L.poset.elements[x])
    return tuple(out)


# ---------------------------------------------------------------------------
# round trips


def round_trip_poset(X: FinitePoset, cap: int = DOWNSET_CAP) -> dict[str, str]:
    """x ↦ {D down-set : x ∉ D}, checked to be an isomorphism onto the spectrum."""
    L, masks = _downset_lattice(X, cap, DEFAULT_UNIVERSE_CAP)
    S, primes = _spectrum(L)
    by_mask = {m: i for i, m in enumerate(primes)}
    mapping: dict[str, str] = {}
    for xi, x in enumerate(X.elements):
        ideal = 0
        for li, d in enumerate(masks):
            if not d >> xi & 1:
                ideal |= 1 << li
        if ideal not in by_mask:
            raise RoundTripFailure(f"{x!r} is not sent to a prime ideal")
        mapping[x] = S.elements[by_mask[ideal]]
    if not is_order_isomorphism(X, S, mapping):
        raise RoundTripFailure("natural map X -> D(E(X)) is not an order isomorphism")
    return mapping


def round_trip_lattice(L: FiniteLattice, cap: int = DOWNSET_CAP) -> dict[str, str]:
    """a ↦ {prime P : a ∉ P}, checked to be a lattice isomorphism onto E(D(L))."""
    S, primes = _spectrum(L)
    M, dmasks = _downset_lattice(S, cap, DEFAULT_UNIVERSE_CAP)
    pos = {m: i for i, m in enumerate(dmasks)}
    image = []
    for a in range(len(L)):
        d = 0
        for pi, p in enumerate(primes):
            if not p >> a & 1:
                d |= 1 << pi
        if d not in pos:
            raise RoundTripFailure(f"{L.carrier[a]!r} is not sent to a down-set")
        image.append(pos[d])
    if sorted(image) != list(range(len(M))):
        raise RoundTripFailure("natural map L -> E(D(L)) is not a bijection")
    img = np.array(image, dtype=np.int64)
    if not (
        np.array_equal(np.asarray(M.meet)[np.ix_(img, img)], img[np.asarray(L.meet)])
        and np.array_equal(np.asarray(M.join)[np.ix_(img, img)], img[np.asarray(L.join)])
    ):
        raise RoundTripFailure("natural map L -> E(D(L)) does not preserve meet/join")
    mapping = {L.carrier[a]: M.carrier[image[a]] for a in range(len(L))}
    if not is_order_isomorphism(L.poset, M.poset, mapping):
        raise RoundTripFailure("natural map L -> E(D(L)) is not an order isomorphism")
    return mapping

"""Finite topologies over poset universes.

Sets are int bitmasks over the universe order.  A finite topology is
determined by the minimal open neighbourhood N(x) of each point (the
intersection of the subbase members containing x); the opens are exactly the
unions of these, so most queries never materialise the open family.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import CapExceeded, NotPriestley, TooFewParts, UniverseMismatch, UnknownIdError
from .poset import (
    FinitePoset,
    component_masks,
    disjoint_union,
    iter_bits,
    part_offsets,
)

MATERIALIZE_CAP = 16
EXACT_SUBCOVER_LIMIT = 6
BATCH_COVER_CAP = 10

DOWN = "down"
UP = "up"


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    universe: tuple[str, ...]
    subbase: tuple[int, ...]
    cap: int = field(default=MATERIALIZE_CAP, compare=False)

    def __eq__(self, other):
        if not isinstance(other, FiniteSpace):
            return NotImplemented
        return self.universe == other.universe and self.neighbourhoods == other.neighbourhoods

    def __hash__(self):
        return hash(self.universe)

    def __len__(self):
        return len(self.universe)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.universe)) - 1

    @cached_property
    def index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.universe)}

    def mask_of(self, ids: Iterable[str]) -> int:
        m = 0
        for x in ids:
            if x not in self.index:
                raise UnknownIdError(f"unknown point {x!r}")
            m |= 1 << self.index[x]
        return m

    def ids_of(self, mask: int) -> tuple[str, ...]:
        return tuple(self.universe[i] for i in iter_bits(mask))

    @cached_property
    def neighbourhood_matrix(self) -> np.ndarray:
        """Row i, column j: j lies in the minimal open set around i."""
        n = len(self.universe)
        if not self.subbase:
            return np.ones((n, n), dtype=bool)
        member = self.subbase_matrix
        # j is missing from N(i) iff some subbase set holds i but not j
        return (member.T.astype(np.int32) @ (~member).astype(np.int32)) == 0

    @cached_property
    def neighbourhoods(self) -> tuple[int, ...]:
        """Minimal open set around each point, as masks."""
        n = len(self.universe)
        keep = self.neighbourhood_matrix
        if n < 63:
            return tuple((keep.astype(np.int64) @ (np.int64(1) << np.arange(n, dtype=np.int64))).tolist())
        weights = [1 << j for j in range(n)]
        return tuple(sum(w for w, k in zip(weights, row) if k) for row in keep.tolist())

    @cached_property
    def subbase_matrix(self) -> np.ndarray:
        """Row s, column i: point i lies in subbase member s."""
        n = len(self.universe)
        if n < 63:
            masks = np.array(self.subbase, dtype=np.int64).reshape(-1, 1)
            return ((masks >> np.arange(n, dtype=np.int64)) & 1).astype(bool)
        return np.array(
            [[bool(s >> i & 1) for i in range(n)] for s in self.subbase], dtype=bool
        ).reshape(len(self.subbase), n)

    def is_open(self, mask: int) -> bool:
        nb = self.neighbourhoods
        return all(nb[i] & ~mask == 0 for i in iter_bits(mask))

    def is_closed(self, mask: int) -> bool:
        return self.is_open(self.full_mask & ~mask)

    def is_clopen(self, mask: int) -> bool:
        return self.is_open(mask) and self.is_closed(mask)

    @cached_property
    def opens(self) -> tuple[int, ...]:
        """Every open set, sorted by (size, members).  Capped universe size."""
        if len(self.universe) > self.cap:
            raise CapExceeded(
                f"{len(self.universe)} points exceeds materialisation cap {self.cap}"
            )
        family = {0}
        for nb in set(self.neighbourhoods):
            family |= {o | nb for o in family}
        family.add(self.full_mask)
        return tuple(sorted(family, key=lambda m: (m.bit_count(), tuple(iter_bits(m)))))

    def open_sets(self) -> list[tuple[str, ...]]:
        return [self.ids_of(m) for m in self.opens]

    def to_json(self) -> dict:
        return {
            "universe": list(self.universe),
            "subbase": [list(self.ids_of(m)) for m in self.subbase],
        }


def space_from_json(data: Mapping | str, cap: int = MATERIALIZE_CAP) -> FiniteSpace:
    if isinstance(data, str):
        data = json.loads(data)
    universe = tuple(str(u) for u in data["universe"])
    probe = FiniteSpace(universe, (), cap)
    subbase = tuple(probe.mask_of(str(e) for e in s) for s in data.get("subbase", []))
    return FiniteSpace(universe, subbase, cap)


def _dedupe(masks: Iterable[int]) -> tuple[int, ...]:
    return tuple(dict.fromkeys(masks))


def discrete_space(P: FinitePoset | Sequence[str]) -> FiniteSpace:
    universe = tuple(P.elements if isinstance(P, FinitePoset) else P)
    return FiniteSpace(universe, tuple(1 << i for i in range(len(universe))))


def indiscrete_space(P: FinitePoset | Sequence[str]) -> FiniteSpace:
    universe = tuple(P.elements if isinstance(P, FinitePoset) else P)
    return FiniteSpace(universe, ())


def interval_subbase_masks(P: FinitePoset) -> tuple[int, ...]:
    full = P.full_mask
    lower = [full & ~d for d in P.down_masks]  # X \ (x]
    upper = [full & ~u for u in P.up_masks]  # X \ [x)
    return _dedupe(lower + upper)


def interval_subbase(P: FinitePoset) -> list[tuple[str, ...]]:
    """Complements of principal down-sets, then of principal up-sets, deduplicated."""
    return [P.ids_of(m) for m in interval_subbase_masks(P)]


def generate_topology(
    universe: Sequence[str],
    subbase: Iterable[Iterable[str]],
    cap: int = MATERIALIZE_CAP,
) -> FiniteSpace:
    """Topology generated by ``subbase``; the open family is materialised eagerly."""
    universe = tuple(universe)
    if len(universe) > cap:
        raise CapExceeded(f"{len(universe)} points exceeds materialisation cap {cap}")
    probe = FiniteSpace(universe, (), cap)
    space = FiniteSpace(universe, _dedupe(probe.mask_of(s) for s in subbase), cap)
    space.opens
    return space


def interval_topology(P: FinitePoset, cap: int = MATERIALIZE_CAP) -> FiniteSpace:
    return FiniteSpace(P.elements, interval_subbase_masks(P), cap)


# ---------------------------------------------------------------------------
# subbasic cover certificates


@dataclass(frozen=True)
class CoverCertificate:
    kind: str  # "cross-component" | "within-component" | "not-a-cover"
    witness: tuple[tuple[str, str], ...]  # (polarity, generator)
    uncovered: tuple[str, ...] = ()
    minimal: bool = True

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "witness": [{"polarity": p, "generator": g} for p, g in self.witness],
            "uncovered": list(self.uncovered),
            "minimal": self.minimal,
        }


CROSS = "cross-component"
WITHIN = "within-component"
NOT_A_COVER = "not-a-cover"
KIND_NAMES = {
    _kernels.KIND_NOT_A_COVER: NOT_A_COVER,
    _kernels.KIND_CROSS: CROSS,
    _kernels.KIND_WITHIN: WITHIN,
}


def generator_mask(P: FinitePoset, polarity: str, i: int) -> int:
    if polarity == DOWN:
        return P.full_mask & ~P.down_masks[i]
    return P.full_mask & ~P.up_masks[i]


def _min_subcover(gens: list[tuple[str, int, int]], full: int):
    """Smallest sub-family covering ``full``; exact up to the size limit."""
    uniq: list[tuple[str, int, int]] = []
    seen = set()
    for g in gens:
        if g[2] and g[2] not in seen:
            seen.add(g[2])
            uniq.append(g)
    for size in range(1, min(EXACT_SUBCOVER_LIMIT, len(uniq)) + 1):
        for combo in itertools.combinations(uniq, size):
            acc = 0
            for g in combo:
                acc |= g[2]
            if acc == full:
                return list(combo), True
    chosen, acc = [], 0
    while acc != full:
        best = max(uniq, key=lambda g: ((g[2] & ~acc).bit_count(), -uniq.index(g)))
        chosen.append(best)
        acc |= best[2]
    chosen.sort(key=lambda g: (g[1], g[0] != DOWN))
    return chosen, len(uniq) <= EXACT_SUBCOVER_LIMIT


def certify_subbasic_cover(
    P: FinitePoset, A: Iterable[str], B: Iterable[str]
) -> CoverCertificate:
    """Classify {X∖(a] : a∈A} ∪ {X∖[b) : b∈B} and exhibit a finite subcover.

    When A ∪ B meets two order components the witness is the two-set family
    from the least element w1 of A ∪ B and the least element w2 outside
    w1's component; each contributes X∖(w] if it lies in A, else X∖[w).
    """
    a_mask = P.mask_of(A)
    b_mask = P.mask_of(B)
    full = P.full_mask
    uncovered = full
    for i in iter_bits(a_mask):
        uncovered &= P.down_masks[i]
    for i in iter_bits(b_mask):
        uncovered &= P.up_masks[i]
    if uncovered:
        return CoverCertificate(NOT_A_COVER, (), P.ids_of(uncovered))

    def pol(i: int) -> str:
        return DOWN if a_mask >> i & 1 else UP

    s = a_mask | b_mask
    if s:
        comps = component_masks(P)
        w1 = (s & -s).bit_length() - 1
        rest = s & ~comps[w1]
        if rest:
            w2 = (rest & -rest).bit_length() - 1
            witness = ((pol(w1), P.elements[w1]), (pol(w2), P.elements[w2]))
            return CoverCertificate(CROSS, witness)
    gens = []
    for i in range(len(P)):
        if a_mask >> i & 1:
            gens.append((DOWN, i, generator_mask(P, DOWN, i)))
        if b_mask >> i & 1:
            gens.append((UP, i, generator_mask(P, UP, i)))
    if full == 0:
        return CoverCertificate(WITHIN, ())
    chosen, minimal = _min_subcover(gens, full)
    return CoverCertificate(
        WITHIN, tuple((p, P.elements[i]) for p, i, _ in chosen), (), minimal
    )


def witness_covers(P: FinitePoset, cert: CoverCertificate) -> bool:
    acc = 0
    for polarity, g in cert.witness:
        acc |= generator_mask(P, polarity, P.idx(g))
    return acc == P.full_mask


@dataclass(frozen=True)
class CoverTable:
    """Certificate kinds for every (A, B), indexed by their masks."""

    kind: np.ndarray
    w1: np.ndarray
    w2: np.ndarray

    def certificate(self, P: FinitePoset, a_mask: int, b_mask: int) -> tuple[str, tuple]:
        k = KIND_NAMES[int(self.kind[a_mask, b_mask])]
        if k != CROSS:
            return k, ()
        out = []
        for w in (int(self.w1[a_mask, b_mask]), int(self.w2[a_mask, b_mask])):
            out.append((DOWN if a_mask >> w & 1 else UP, P.elements[w]))
        return k, tuple(out)


def certify_all_covers(P: FinitePoset, cap: int = BATCH_COVER_CAP) -> CoverTable:
    """Batch form of :func:`certify_subbasic_cover` over all subset pairs.

    Kinds and cross-component witnesses agree with the single-pair function;
    within-component subcovers are not searched.
    """
    if len(P) > cap:
        raise CapExceeded(f"{len(P)} elements exceeds batch cover cap {cap}")
    kind, w1, w2 = _kernels.cover_batch(
        np.array(P.down_masks, dtype=np.int64),
        np.array(P.up_masks, dtype=np.int64),
        np.array(component_masks(P), dtype=np.int64),
    )
    return CoverTable(kind, w1, w2)


# ---------------------------------------------------------------------------
# Priestley condition


class PriestleyReport:
    """Outcome of the separation scan.

    ``witnesses`` maps each separated pair (x, y) with x ≱ y to the least
    clopen decreasing set holding x; it is built on first access.
    """

    def __init__(self, ok, compact, failures, checked_pairs, ids=(), reach=None, keep=None):
        self.ok = ok
        self.compact = compact
        self.failures = failures
        self.checked_pairs = checked_pairs
        self._ids = ids
        self._reach = reach
        self._keep = keep

    @cached_property
    def witnesses(self) -> dict[tuple[str, str], tuple[str, ...]]:
        if self._reach is None:
            return {}
        ids = self._ids
        rows = [tuple(e for e, b in zip(ids, r) if b) for r in self._reach.tolist()]
        return {(ids[i], ids[j]): rows[i] for i, j in np.argwhere(self._keep).tolist()}

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "compact": self.compact,
            "checked_pairs": self.checked_pairs,
            "failures": [list(p) for p in self.failures],
            "witnesses": [
                {"pair": list(p), "set": list(s)} for p, s in self.witnesses.items()
            ],
        }


def _aligned(P: FinitePoset, T: FiniteSpace) -> FiniteSpace:
    if T.universe == P.elements:
        return T
    if sorted(T.universe) != sorted(P.elements):
        raise UniverseMismatch("space and poset have different universes")
    perm = [T.index[e] for e in P.elements]
    subbase = []
    for s in T.subbase:
        m = 0
        for new, old in enumerate(perm):
            if s >> old & 1:
                m |= 1 << new
        subbase.append(m)
    return FiniteSpace(P.elements, tuple(subbase), T.cap)


def minimal_clopen_downsets(P: FinitePoset, T: FiniteSpace) -> np.ndarray:
    """Row x is M(x), the least clopen decreasing set containing x.

    Clopen decreasing sets are closed under the moves z -> N(z),
    z -> {w : z ∈ N(w)} and z -> (z], so M(x) is reachability from x.
    """
    T = _aligned(P, T)
    nb = T.neighbourhood_matrix
    adj = nb | nb.T | P.le.T
    return _kernels.transitive_closure(adj)


def check_priestley(
    P: FinitePoset, T: FiniteSpace, with_witnesses: bool = True
) -> PriestleyReport:
    """For every x ≱ y look for a clopen decreasing U with x ∈ U, y ∉ U."""
    reach = minimal_clopen_downsets(P, T)
    ids = P.elements
    not_ge = ~P.le.T  # not_ge[x, y]: x ≱ y
    bad = not_ge & reach
    failures = [(ids[i], ids[j]) for i, j in np.argwhere(bad).tolist()]
    if not with_witnesses:
        return PriestleyReport(not failures, True, failures, int(not_ge.sum()))
    return PriestleyReport(
        not failures, True, failures, int(not_ge.sum()), ids, reach, not_ge & ~reach
    )


def is_priestley(P: FinitePoset, T: FiniteSpace) -> bool:
    reach = minimal_clopen_downsets(P, T)
    return not bool((~P.le.T & reach).any())


# ---------------------------------------------------------------------------
# disjoint-union subbase


@dataclass(frozen=True)
class UnionSubbase:
    poset: FinitePoset
    s1: tuple[int, ...]
    s2: tuple[int, ...]
    s3: tuple[int, ...]
    part_masks: tuple[int, ...]
    k: int
    x: str

    @property
    def subbase(self) -> tuple[int, ...]:
        return _dedupe(self.s1 + self.s2 + self.s3)

    @property
    def space(self) -> FiniteSpace:
        return FiniteSpace(self.poset.elements, self.subbase)

    def family(self) -> list[tuple[str, ...]]:
        return [self.poset.ids_of(m) for m in self.subbase]

    def to_json(self) -> dict:
        ids = self.poset.ids_of
        return {
            "poset": self.poset.to_json(),
            "k": self.k,
            "x": self.x,
            "S1": [list(ids(m)) for m in self.s1],
            "S2": [list(ids(m)) for m in self.s2],
            "S3": [list(ids(m)) for m in self.s3],
            "subbase": [list(ids(m)) for m in self.subbase],
        }


@lru_cache(maxsize=4096)
def _checked_part_opens(
    p: FinitePoset, universe: tuple[str, ...], subbase: tuple[int, ...]
) -> tuple[int, ...] | None:
    """Opens of one part in p's element order, or None if not Priestley.

    Memoised: families of parts repeat the same small spaces many times.
    """
    t = _aligned(p, FiniteSpace(universe, subbase, len(universe)))
    if not is_priestley(p, t):
        return None
    return t.opens


def union_subbase(
    parts: Sequence[tuple[FinitePoset, FiniteSpace]],
    k: int,
    x: str,
    cap: int = MATERIALIZE_CAP,
) -> UnionSubbase:
    """Subbase S1 ∪ S2 ∪ S3 on the disjoint union, distinguished point x in part k.

    S1: every open of every part other than k.
    S2: opens of part k avoiding x.
    S3: V ∪ (all parts except k and k') for V open in part k with x ∈ V and
        any k' ≠ k; so each member's complement lies in X_k ∪ X_k'.
    """
    if len(parts) < 2:
        raise TooFewParts("need at least two parts")
    if not 0 <= k < len(parts):
        raise IndexError(f"part index {k} out of range")
    posets = [p for p, _ in parts]
    part_opens = []
    for i, (p, t) in enumerate(parts):
        if len(p) > cap:
            raise CapExceeded(f"part {i} has {len(p)} points, over cap {cap}")
        opens_i = _checked_part_opens(p, t.universe, t.subbase)
        if opens_i is None:
            raise NotPriestley(f"part {i} is not a Priestley space")
        part_opens.append(opens_i)
    if x not in posets[k].index:
        raise UnknownIdError(f"{x!r} is not in part {k}")
    offs = part_offsets(posets)
    union = disjoint_union(posets)
    part_masks = tuple(((1 << len(p)) - 1) << o for p, o in zip(posets, offs))
    opens = [[m << offs[l] for m in part_opens[l]] for l in range(len(parts))]
    xbit = 1 << (offs[k] + posets[k].index[x])
    s1 = _dedupe(m for l in range(len(parts)) if l != k for m in opens[l])
    s2 = _dedupe(m for m in opens[k] if not m & xbit)
    s3 = []
    for kp in range(len(parts)):
        if kp == k:
            continue
        rest = 0
        for l in range(len(parts)):
            if l not in (k, kp):
                rest |= part_masks[l]
        s3.extend(v | rest for v in opens[k] if v & xbit)
    return UnionSubbase(union, s1, s2, _dedupe(s3), part_masks, k, x)

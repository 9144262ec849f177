"""Finite posets stored as a transitively closed boolean matrix."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import CapExceeded, CycleError, UnknownIdError

DEFAULT_UNIVERSE_CAP = 4096


def _row_mask(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True, eq=False)
class FinitePoset:
    """Elements in canonical (insertion) order plus the closed order matrix.

    ``le[i, j]`` is True iff ``elements[i] <= elements[j]``.  Build instances
    with :func:`from_relation`; the constructor trusts its input.
    """

    elements: tuple[str, ...]
    le: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.le.setflags(write=False)

    def __len__(self):
        return len(self.elements)

    def __eq__(self, other):
        if not isinstance(other, FinitePoset):
            return NotImplemented
        return self.elements == other.elements and np.array_equal(self.le, other.le)

    def __hash__(self):
        return hash((self.elements, self.le.tobytes()))

    @cached_property
    def index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.elements)}

    @cached_property
    def down_masks(self) -> tuple[int, ...]:
        """Bitmask of the principal down-set of every element."""
        return tuple(_row_mask(self.le[:, j]) for j in range(len(self)))

    @cached_property
    def up_masks(self) -> tuple[int, ...]:
        return tuple(_row_mask(self.le[i, :]) for i in range(len(self)))

    @property
    def full_mask(self) -> int:
        return (1 << len(self)) - 1

    def idx(self, x: str) -> int:
        try:
            return self.index[x]
        except KeyError:
            raise UnknownIdError(f"unknown element id {x!r}") from None

    def mask_of(self, ids: Iterable[str]) -> int:
        m = 0
        for x in ids:
            m |= 1 << self.idx(x)
        return m

    def ids_of(self, mask: int) -> tuple[str, ...]:
        return tuple(self.elements[i] for i in iter_bits(mask))

    def leq(self, x: str, y: str) -> bool:
        return bool(self.le[self.idx(x), self.idx(y)])

    def down_mask(self, mask: int) -> int:
        out = 0
        for i in iter_bits(mask):
            out |= self.down_masks[i]
        return out

    def up_mask(self, mask: int) -> int:
        out = 0
        for i in iter_bits(mask):
            out |= self.up_masks[i]
        return out

    def is_decreasing(self, mask: int) -> bool:
        return self.down_mask(mask) == mask

    def is_increasing(self, mask: int) -> bool:
        return self.up_mask(mask) == mask

    def covers(self) -> list[tuple[str, str]]:
        """Hasse diagram edges (x, y) with x covered by y, in canonical order."""
        strict = self.le & ~np.eye(len(self), dtype=bool)
        two_step = (strict.astype(np.int32) @ strict.astype(np.int32)) > 0
        cov = strict & ~two_step
        return [(self.elements[i], self.elements[j]) for i, j in zip(*np.nonzero(cov))]

    def linear_extension(self) -> list[int]:
        """Indices sorted by down-set size, which respects the order."""
        sizes = self.le.sum(axis=0)
        return sorted(range(len(self)), key=lambda i: (int(sizes[i]), i))

    def subposet(self, ids: Sequence[str]) -> FinitePoset:
        idx = [self.idx(x) for x in ids]
        return FinitePoset(tuple(ids), self.le[np.ix_(idx, idx)].copy())

    def to_json(self) -> dict:
        return {"elements": list(self.elements), "le": [list(p) for p in self.covers()]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def from_closed_matrix(elements: Sequence[str], le: np.ndarray) -> FinitePoset:
    return FinitePoset(tuple(elements), np.asarray(le, dtype=bool).copy())


def from_relation(
    elements: Sequence[str],
    pairs: Iterable[tuple[str, str]],
    cap: int = DEFAULT_UNIVERSE_CAP,
) -> FinitePoset:
    """Poset whose order is the reflexive-transitive closure of ``pairs``."""
    elements = tuple(elements)
    if len(set(elements)) != len(elements):
        raise ValueError("element ids must be distinct")
    if len(elements) > cap:
        raise CapExceeded(f"{len(elements)} elements exceeds universe cap {cap}")
    index = {e: i for i, e in enumerate(elements)}
    n = len(elements)
    adj = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        if a not in index:
            raise UnknownIdError(f"unknown element id {a!r}")
        if b not in index:
            raise UnknownIdError(f"unknown element id {b!r}")
        adj[index[a], index[b]] = True
    le = _kernels.transitive_closure(adj)
    both = le & le.T
    np.fill_diagonal(both, False)
    if both.any():
        i, j = map(int, np.argwhere(both)[0])
        raise CycleError(f"{elements[i]!r} <= {elements[j]!r} <= {elements[i]!r}")
    return FinitePoset(elements, le)


def from_json(data: Mapping | str, cap: int = DEFAULT_UNIVERSE_CAP) -> FinitePoset:
    if isinstance(data, str):
        data = json.loads(data)
    elements = [str(e) for e in data["elements"]]
    pairs = [(str(a), str(b)) for a, b in data.get("le", [])]
    return from_relation(elements, pairs, cap=cap)


def chain(n: int, prefix: str = "c") -> FinitePoset:
    ids = [f"{prefix}{i}" for i in range(n)]
    return from_relation(ids, zip(ids, ids[1:]))


def antichain(n: int, prefix: str = "a") -> FinitePoset:
    return from_relation([f"{prefix}{i}" for i in range(n)], [])


# ---------------------------------------------------------------------------
# cones and intervals


def _sorted_ids(P: FinitePoset, mask: int) -> tuple[str, ...]:
    return P.ids_of(mask)


def down_set(P: FinitePoset, Y: Iterable[str]) -> tuple[str, ...]:
    """``(Y]``: every element below some member of Y, in canonical order."""
    return _sorted_ids(P, P.down_mask(P.mask_of(Y)))


def up_set(P: FinitePoset, Y: Iterable[str]) -> tuple[str, ...]:
    return _sorted_ids(P, P.up_mask(P.mask_of(Y)))


def interval(P: FinitePoset, x: str, y: str) -> tuple[str, ...]:
    i, j = P.idx(x), P.idx(y)
    return _sorted_ids(P, P.up_masks[i] & P.down_masks[j])


# ---------------------------------------------------------------------------
# order components


@dataclass(frozen=True)
class ComponentPartition:
    blocks: tuple[tuple[str, ...], ...]
    block_of: Mapping[str, int]

    def __len__(self):
        return len(self.blocks)


def component_labels(P: FinitePoset) -> list[int]:
    """Component number of every element, numbered by first appearance."""
    n = len(P)
    label = [-1] * n
    comparable = P.le | P.le.T
    nxt = 0
    for start in range(n):
        if label[start] >= 0:
            continue
        label[start] = nxt
        stack = [start]
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(comparable[i]):
                if label[j] < 0:
                    label[j] = nxt
                    stack.append(int(j))
        nxt += 1
    return label


def component_masks(P: FinitePoset) -> list[int]:
    """Mask of the component containing each element."""
    labels = component_labels(P)
    by_label: dict[int, int] = {}
    for i, c in enumerate(labels):
        by_label[c] = by_label.get(c, 0) | (1 << i)
    return [by_label[c] for c in labels]


def order_components(P: FinitePoset) -> ComponentPartition:
    labels = component_labels(P)
    blocks: list[list[str]] = [[] for _ in range(max(labels, default=-1) + 1)]
    for e, c in zip(P.elements, labels):
        blocks[c].append(e)
    return ComponentPartition(
        tuple(tuple(b) for b in blocks), dict(zip(P.elements, labels))
    )


def disjoint_union(parts: Sequence[FinitePoset], sep: str = ":") -> FinitePoset:
    """Union of pairwise disjoint copies; part k's id ``e`` becomes ``"k:e"``."""
    elements: list[str] = []
    n = sum(len(p) for p in parts)
    le = np.zeros((n, n), dtype=bool)
    off = 0
    for k, p in enumerate(parts):
        elements.extend(f"{k}{sep}{e}" for e in p.elements)
        m = len(p)
        le[off: off + m, off: off + m] = p.le
        off += m
    return FinitePoset(tuple(elements), le)


def part_offsets(parts: Sequence[FinitePoset]) -> list[int]:
    offs, off = [], 0
    for p in parts:
        offs.append(off)
        off += len(p)
    return offs


# ---------------------------------------------------------------------------
# isomorphism


def _refined_colours(P: FinitePoset) -> list[int]:
    """Colour refinement on cone sizes until the partition stabilises."""
    le = P.le
    n = len(P)
    below = [[int(j) for j in np.flatnonzero(le[:, i]) if j != i] for i in range(n)]
    above = [[int(j) for j in np.flatnonzero(le[i, :]) if j != i] for i in range(n)]
    colours = [0] * n
    classes = 1
    for _ in range(n + 1):
        sig = [
            (
                colours[i],
                tuple(sorted(colours[j] for j in below[i])),
                tuple(sorted(colours[j] for j in above[i])),
            )
            for i in range(n)
        ]
        palette = {s: k for k, s in enumerate(sorted(set(sig)))}
        colours = [palette[s] for s in sig]
        if len(palette) == classes:
            break
        classes = len(palette)
    return colours


def invariant(P: FinitePoset) -> tuple:
    """Isomorphism-invariant fingerprint (equal for isomorphic posets)."""
    le = P.le
    n = len(P)
    down = le.sum(axis=0)
    up = le.sum(axis=1)
    base = [(int(down[i]), int(up[i])) for i in range(n)]
    sig = []
    for i in range(n):
        below = tuple(sorted(base[j] for j in np.flatnonzero(le[:, i]) if j != i))
        above = tuple(sorted(base[j] for j in np.flatnonzero(le[i, :]) if j != i))
        sig.append((base[i], below, above))
    return (n, int(le.sum()), tuple(sorted(sig)))


def find_isomorphism(
    P: FinitePoset, Q: FinitePoset, seed: int | None = None
) -> dict[str, str] | None:
    """Order isomorphism P -> Q as an id mapping, or None.

    Candidates are pruned by jointly refined colours and the search
    backtracks in canonical order; ``seed`` shuffles candidate order.
    """
    n = len(P)
    if n != len(Q) or int(P.le.sum()) != int(Q.le.sum()):
        return None
    if n == 0:
        return {}
    joint = from_closed_matrix(
        [f"P{i}" for i in range(n)] + [f"Q{i}" for i in range(n)],
        np.block(
            [
                [P.le, np.zeros((n, n), dtype=bool)],
                [np.zeros((n, n), dtype=bool), Q.le],
            ]
        ),
    )
    colours = _refined_colours(joint)
    cp, cq = colours[:n], colours[n:]
    if sorted(cp) != sorted(cq):
        return None
    by_colour: dict[tuple, list[int]] = {}
    for j, c in enumerate(cq):
        by_colour.setdefault(c, []).append(j)
    rng = random.Random(seed) if seed is not None else None
    if rng is not None:
        for lst in by_colour.values():
            rng.shuffle(lst)
    # most constrained first: small colour classes, ties by canonical order
    order = sorted(range(n), key=lambda i: (len(by_colour[cp[i]]), i))
    pl, ql = P.le, Q.le
    assign = [-1] * n
    used = [False] * n

    def extend(depth: int) -> bool:
        if depth == n:
            return True
        i = order[depth]
        for j in by_colour[cp[i]]:
            if used[j]:
                continue
            ok = True
            for d in range(depth):
                a = order[d]
                b = assign[a]
                if pl[i, a] != ql[j, b] or pl[a, i] != ql[b, j]:
                    ok = False
                    break
            if ok:
                assign[i] = j
                used[j] = True
                if extend(depth + 1):
                    return True
                used[j] = False
                assign[i] = -1
        return False

    if not extend(0):
        return None
    return {P.elements[i]: Q.elements[assign[i]] for i in range(n)}


def is_order_isomorphism(P: FinitePoset, Q: FinitePoset, mapping: Mapping[str, str]) -> bool:
    """Bijective, order-preserving, and order-reflecting."""
    if len(P) != len(Q) or set(mapping) != set(P.elements):
        return False
    if set(mapping.values()) != set(Q.elements):
        return False
    perm = [Q.idx(mapping[e]) for e in P.elements]
    return bool(np.array_equal(P.le, Q.le[np.ix_(perm, perm)]))

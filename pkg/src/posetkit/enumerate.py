"""Exhaustive generation of small posets up to isomorphism.

Every poset on n elements is obtained from one on n-1 elements by adding a
new maximal element whose strict down-set is some down-set of the smaller
poset; duplicates are removed by fingerprint bucketing plus an explicit
isomorphism test.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .poset import (
    FinitePoset,
    component_labels,
    find_isomorphism,
    from_closed_matrix,
    invariant,
    iter_bits,
)
from .lattice import downset_masks

# OEIS A000112 and A000608 (connected), n = 0..8
KNOWN_POSET_COUNTS = (1, 1, 2, 5, 16, 63, 318, 2045, 16999)
KNOWN_CONNECTED_COUNTS = (0, 1, 1, 3, 10, 44, 238, 1650, 14512)


def _names(n: int) -> list[str]:
    return [str(i) for i in range(n)]


@lru_cache(maxsize=None)
def posets_up_to_iso(n: int) -> tuple[FinitePoset, ...]:
    """One representative per isomorphism class of n-element posets."""
    if n == 0:
        return (from_closed_matrix([], np.zeros((0, 0), dtype=bool)),)
    buckets: dict[tuple, list[FinitePoset]] = {}
    out: list[FinitePoset] = []
    names = _names(n)
    for small in posets_up_to_iso(n - 1):
        for d in downset_masks(small):
            le = np.zeros((n, n), dtype=bool)
            le[: n - 1, : n - 1] = small.le
            for i in iter_bits(int(d)):
                le[i, n - 1] = True
            le[n - 1, n - 1] = True
            cand = from_closed_matrix(names, le)
            key = invariant(cand)
            seen = buckets.setdefault(key, [])
            if any(find_isomorphism(cand, q) is not None for q in seen):
                continue
            seen.append(cand)
            out.append(cand)
    return tuple(out)


def is_connected(P: FinitePoset) -> bool:
    return len(P) > 0 and max(component_labels(P)) == 0


@lru_cache(maxsize=None)
def connected_posets_up_to_iso(n: int) -> tuple[FinitePoset, ...]:
    return tuple(P for P in posets_up_to_iso(n) if is_connected(P))

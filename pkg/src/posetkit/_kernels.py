"""Hot inner loops, each in a numba and a pure-numpy flavour.

The numba versions are used when numba imports cleanly and the environment
variable ``POSETKIT_NO_NUMBA`` is unset (or ``0``).  Both flavours are always
importable under explicit names so tests and the benchmark can compare them.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("POSETKIT_NO_NUMBA", "0") in ("", "0")
BACKEND = "numba" if USE_NUMBA else "numpy"

# Down-set masks are packed into int64, so at most 62 elements.
MAX_MASK_BITS = 62

KIND_NOT_A_COVER = 0
KIND_CROSS = 1
KIND_WITHIN = 2


def _njit(fn):
    if not _HAVE_NUMBA:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# reflexive-transitive closure


def closure_numpy(adj: np.ndarray) -> np.ndarray:
    r = np.array(adj, dtype=bool, copy=True)
    n = r.shape[0]
    np.fill_diagonal(r, True)
    for k in range(n):
        rows = np.flatnonzero(r[:, k])
        if rows.size > 1:
            r[rows] |= r[k]
    return r


@_njit
def _closure_nb(r):
    n = r.shape[0]
    for i in range(n):
        r[i, i] = True
    for k in range(n):
        for i in range(n):
            if r[i, k] and i != k:
                for j in range(n):
                    if r[k, j]:
                        r[i, j] = True
    return r


def closure_numba(adj: np.ndarray) -> np.ndarray:
    return _closure_nb(np.array(adj, dtype=np.bool_, copy=True))


def transitive_closure(adj: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure of a square boolean matrix."""
    if USE_NUMBA:
        return closure_numba(adj)
    return closure_numpy(adj)


# ---------------------------------------------------------------------------
# down-set enumeration
#
# ``pred[i]`` is the bitmask of strict predecessors of element i, with the
# elements numbered along a linear extension (so pred[i] only has bits < i).


def downsets_numpy(pred: np.ndarray, cap: int) -> np.ndarray:
    masks = np.zeros(1, dtype=np.int64)
    for i in range(pred.shape[0]):
        ok = (masks & pred[i]) == pred[i]
        grown = masks[ok] | np.int64(1 << i)
        if masks.size + grown.size > cap:
            return np.full(1, -1, dtype=np.int64)
        masks = np.concatenate((masks, grown))
    masks.sort()
    return masks


@_njit
def _downsets_nb(pred, cap):
    # same level-by-level growth as the numpy flavour, with a doubling buffer
    n = pred.shape[0]
    buf = np.empty(64, dtype=np.int64)
    buf[0] = 0
    count = 1
    for i in range(n):
        p = pred[i]
        bit = np.int64(1) << i
        end = count
        if 2 * end > buf.shape[0]:
            grown = np.empty(4 * end, dtype=np.int64)
            grown[:end] = buf[:end]
            buf = grown
        # branch-free append: write always, advance only when m ⊇ pred
        for t in range(end):
            m = buf[t]
            buf[count] = m | bit
            count += (m & p) == p
        if count > cap:
            return buf[:0], -1
    return buf[:count].copy(), count


def downsets_numba(pred: np.ndarray, cap: int) -> np.ndarray:
    res, count = _downsets_nb(np.asarray(pred, dtype=np.int64), int(cap))
    if count < 0:
        return np.full(1, -1, dtype=np.int64)
    # numpy's sort; numba's quicksort degrades on these patterned arrays
    res.sort()
    return res


def enumerate_downsets(pred: np.ndarray, cap: int) -> np.ndarray | None:
    """Sorted int64 masks of all down-sets, or None when more than ``cap``."""
    pred = np.asarray(pred, dtype=np.int64)
    res = downsets_numba(pred, cap) if USE_NUMBA else downsets_numpy(pred, cap)
    if res.size == 1 and res[0] == -1:
        return None
    return res


# ---------------------------------------------------------------------------
# batch subbasic-cover certification over all (A, B) subset pairs


def _meet_table(masks: np.ndarray, full: int) -> np.ndarray:
    """AND of ``masks[i]`` over the bits of every subset index."""
    n = masks.shape[0]
    out = np.empty(1 << n, dtype=np.int64)
    out[0] = full
    for i in range(n):
        lo = 1 << i
        out[lo: 2 * lo] = out[:lo] & masks[i]
    return out


def _lowbit_table(n: int) -> np.ndarray:
    size = 1 << n
    idx = np.arange(size, dtype=np.int64)
    low = idx & -idx
    out = np.full(size, -1, dtype=np.int64)
    nz = low > 0
    out[nz] = np.round(np.log2(low[nz].astype(np.float64))).astype(np.int64)
    return out


def cover_batch_numpy(down: np.ndarray, up: np.ndarray, comp: np.ndarray):
    """Certificate kind plus cross-component witnesses for every (A, B).

    ``down[i]``/``up[i]`` are the principal cone masks and ``comp[i]`` the
    mask of the order component of element i.  Returns ``(kind, w1, w2)``
    arrays of shape (2^n, 2^n) indexed by the A and B masks.
    """
    n = down.shape[0]
    full = (1 << n) - 1
    da = _meet_table(np.asarray(down, dtype=np.int64), full)
    ub = _meet_table(np.asarray(up, dtype=np.int64), full)
    low = _lowbit_table(n)
    size = 1 << n
    a_idx = np.arange(size, dtype=np.int64)
    uncovered = da[:, None] & ub[None, :]
    s = a_idx[:, None] | a_idx[None, :]
    w1 = low[s]
    comp_ext = np.append(np.asarray(comp, dtype=np.int64), np.int64(0))
    rest = s & ~comp_ext[w1]
    w2 = low[rest]
    kind = np.where(rest != 0, KIND_CROSS, KIND_WITHIN).astype(np.int8)
    kind[uncovered != 0] = KIND_NOT_A_COVER
    w1 = np.where(kind == KIND_CROSS, w1, -1).astype(np.int8)
    w2 = np.where(kind == KIND_CROSS, w2, -1).astype(np.int8)
    return kind, w1, w2


@_njit
def _cover_batch_nb(down, up, comp, n):
    size = 1 << n
    full = size - 1
    da = np.empty(size, dtype=np.int64)
    ub = np.empty(size, dtype=np.int64)
    da[0] = full
    ub[0] = full
    for i in range(n):
        lo = 1 << i
        for s in range(lo):
            da[lo + s] = da[s] & down[i]
            ub[lo + s] = ub[s] & up[i]
    kind = np.empty((size, size), dtype=np.int8)
    w1 = np.full((size, size), -1, dtype=np.int8)
    w2 = np.full((size, size), -1, dtype=np.int8)
    for a in range(size):
        for b in range(size):
            if da[a] & ub[b]:
                kind[a, b] = 0
                continue
            s = a | b
            first = -1
            for i in range(n):
                if (s >> i) & 1:
                    first = i
                    break
            if first < 0:
                kind[a, b] = 2
                continue
            rest = s & ~comp[first]
            if rest == 0:
                kind[a, b] = 2
                continue
            second = -1
            for i in range(n):
                if (rest >> i) & 1:
                    second = i
                    break
            kind[a, b] = 1
            w1[a, b] = first
            w2[a, b] = second
    return kind, w1, w2


def cover_batch_numba(down, up, comp):
    n = len(down)
    return _cover_batch_nb(
        np.asarray(down, dtype=np.int64),
        np.asarray(up, dtype=np.int64),
        np.asarray(comp, dtype=np.int64),
        n,
    )


def cover_batch(down, up, comp):
    if USE_NUMBA:
        return cover_batch_numba(down, up, comp)
    return cover_batch_numpy(down, up, comp)

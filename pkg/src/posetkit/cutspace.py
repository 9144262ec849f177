"""A finite-depth fragment of the cut space of the rationals in (0,1).

Points of C are the down-sets of Q ∩ (0,1): the empty set, Q itself, the
jumps (0,r) < (0,r] for rational r, and gaps (irrational cuts).  Every point
gets an exact sort key ``(value, side)``: jumps use side 0 for (0,r) and 1
for (0,r]; a gap at irrational a uses (a, 0); the empty set is (0, 0) and Q
is (1, 0).

Clopen sets are finite unions of blocks ``[lo, hi]`` meaning
{K : (0,lo] <= K <= (0,hi)}; a missing ``lo`` starts the block at the empty
set and a missing ``hi`` runs it up to Q.  This family is closed under
complement and union.

A ``Fragment`` realises the truncation P(n, w) as gap points x_σ inside
nested intervals X_σ, with the order ⪯ installed on those gaps only.
Placement: the children of x_σ sit in geometric shells on one side of it
(right when len(σ) is even, left when odd), index 0 furthest away, so the
children converge monotonically toward x_σ.  Reading the closure condition
this way is an interpretation: only finitely many children exist here.
"""

from __future__ import annotations

import bisect
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .construct import Path, element_count, generate_P, generating_pairs, parse_path, path_name, paths
from .errors import (
    CapExceeded,
    InfeasiblePlacement,
    IsoFailure,
    NotSeparablePrecondition,
    UndecidableAtDepth,
)
from .exact import (
    QSqrt2,
    bracket,
    dyadic_between,
    floor_exact,
    format_fraction,
    format_qsqrt2,
    parse_fraction,
    parse_qsqrt2,
    stern_brocot,
)
from .poset import (
    DEFAULT_UNIVERSE_CAP,
    FinitePoset,
    component_labels,
    find_isomorphism,
    from_relation,
    is_order_isomorphism,
)

EMPTY, FULL, JUMP_OPEN, JUMP_CLOSED, GAP = "empty", "full", "jump-open", "jump-closed", "gap"
KINDS = (EMPTY, FULL, JUMP_OPEN, JUMP_CLOSED, GAP)

ZERO, ONE = Fraction(0), Fraction(1)
EMPTY_KEY = (ZERO, 0)
FULL_KEY = (ONE, 0)

# tight dyadic bracket stored as the innermost bound of constructed gaps
BRACKET_BITS = 48
REFINE_BITS = (64, 128, 256)
GAP_LETTER = "x"


# ---------------------------------------------------------------------------
# points


@dataclass(frozen=True)
class CutPoint:
    kind: str
    r: Fraction | None = None
    alpha: QSqrt2 | None = None
    path: Path | None = None
    bounds: tuple[tuple[Fraction, Fraction], ...] = field(default=(), compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown point kind {self.kind!r}")
        if self.kind in (JUMP_OPEN, JUMP_CLOSED):
            if self.r is None or not (ZERO < self.r < ONE):
                raise ValueError("jump needs a rational in (0,1)")
        if self.kind == GAP:
            if self.alpha is not None and self.alpha.is_rational():
                raise ValueError("gap position must be irrational")
            if self.alpha is None and not self.bounds:
                raise ValueError("gap needs an exact position or bounds")
            lo = max(b[0] for b in self.bounds)
            hi = min(b[1] for b in self.bounds)
            if not lo < hi:
                raise ValueError("gap bounds do not overlap")
            object.__setattr__(self, "_tight", (lo, hi))

    @property
    def key(self):
        if self.kind == EMPTY:
            return EMPTY_KEY
        if self.kind == FULL:
            return FULL_KEY
        if self.kind == JUMP_OPEN:
            return (self.r, 0)
        if self.kind == JUMP_CLOSED:
            return (self.r, 1)
        if self.alpha is None:
            raise UndecidableAtDepth(f"gap {self.label} has no exact position")
        return (self.alpha, 0)

    @property
    def label(self) -> str:
        if self.kind == EMPTY:
            return "empty"
        if self.kind == FULL:
            return "full"
        if self.kind == JUMP_OPEN:
            return f"(0,{format_fraction(self.r)})"
        if self.kind == JUMP_CLOSED:
            return f"(0,{format_fraction(self.r)}]"
        if self.path is not None:
            return path_name(self.path, GAP_LETTER)
        if self.alpha is not None:
            return f"gap:{format_qsqrt2(self.alpha)}"
        lo, hi = self.tight_bounds()
        return f"gap~[{format_fraction(lo)},{format_fraction(hi)}]"

    def tight_bounds(self) -> tuple[Fraction, Fraction]:
        return self._tight

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "label": self.label}
        if self.r is not None:
            out["r"] = format_fraction(self.r)
        if self.alpha is not None:
            out["alpha"] = format_qsqrt2(self.alpha)
        if self.bounds:
            out["bounds"] = [[format_fraction(a), format_fraction(b)] for a, b in self.bounds]
        return out


def empty_point() -> CutPoint:
    return CutPoint(EMPTY)


def full_point() -> CutPoint:
    return CutPoint(FULL)


def jump_open(r) -> CutPoint:
    return CutPoint(JUMP_OPEN, Fraction(r))


def jump_closed(r) -> CutPoint:
    return CutPoint(JUMP_CLOSED, Fraction(r))


def gap_point(alpha: QSqrt2 | None = None, bounds=(), path: Path | None = None) -> CutPoint:
    b = tuple((Fraction(lo), Fraction(hi)) for lo, hi in bounds)
    if alpha is not None and not b:
        b = (bracket(alpha, BRACKET_BITS),)
    return CutPoint(GAP, alpha=alpha, path=path, bounds=b)


# ---------------------------------------------------------------------------
# clopen sets


def _block_lower(lo):
    return EMPTY_KEY if lo is None else (lo, 1)


def _block_upper(hi):
    return FULL_KEY if hi is None else (hi, 0)


def _normalise(blocks: Iterable[tuple]) -> tuple:
    clean = []
    for lo, hi in blocks:
        lo = None if lo is None else Fraction(lo)
        hi = None if hi is None else Fraction(hi)
        if lo is not None and not (ZERO < lo < ONE):
            raise ValueError(f"block start {lo} outside (0,1)")
        if hi is not None and not (ZERO < hi < ONE):
            raise ValueError(f"block end {hi} outside (0,1)")
        if lo is not None and hi is not None and not lo < hi:
            raise ValueError(f"block ({lo},{hi}) is empty")
        clean.append((lo, hi))
    clean.sort(key=lambda b: (b[0] is not None, b[0] if b[0] is not None else ZERO))
    merged: list[list] = []
    for lo, hi in clean:
        if merged:
            last = merged[-1]
            if last[1] is None:
                continue
            if lo is None or lo <= last[1]:
                if hi is None or hi > last[1]:
                    last[1] = hi
                continue
        merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


@dataclass(frozen=True)
class ClopenSet:
    """Finite union of blocks; stored sorted, disjoint and non-adjacent."""

    blocks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "blocks", _normalise(self.blocks))

    @classmethod
    def everything(cls) -> "ClopenSet":
        return cls(((None, None),))

    @classmethod
    def nothing(cls) -> "ClopenSet":
        return cls(())

    def contains_key(self, key) -> bool:
        for lo, hi in self.blocks:
            if _block_lower(lo) <= key <= _block_upper(hi):
                return True
        return False

    def complement(self) -> "ClopenSet":
        out = []
        prev = None  # end of previous block, None means start of C
        started = False
        for lo, hi in self.blocks:
            if lo is not None:
                out.append((prev if started else None, lo))
            started = True
            prev = hi
            if hi is None:
                return ClopenSet(tuple(out))
        out.append((prev if started else None, None))
        return ClopenSet(tuple(out))

    def union(self, other: "ClopenSet") -> "ClopenSet":
        return ClopenSet(self.blocks + other.blocks)

    def to_json(self) -> list:
        return [
            [None if lo is None else format_fraction(lo), None if hi is None else format_fraction(hi)]
            for lo, hi in self.blocks
        ]

    @classmethod
    def from_json(cls, data: Sequence) -> "ClopenSet":
        return cls(tuple(
            (None if lo is None else parse_fraction(lo), None if hi is None else parse_fraction(hi))
            for lo, hi in data
        ))


def block(lo, hi) -> ClopenSet:
    return ClopenSet(((lo, hi),))


# ---------------------------------------------------------------------------
# membership


def _gap_vs_block(lo_b, hi_b, blo, bhi):
    """True/False/None for a gap known only to lie in (blo, bhi)."""
    if lo_b is None:
        above = True
    elif lo_b <= blo:
        above = True
    elif lo_b >= bhi:
        above = False
    else:
        above = None
    if hi_b is None:
        below = True
    elif hi_b >= bhi:
        below = True
    elif hi_b <= blo:
        below = False
    else:
        below = None
    if above is False or below is False:
        return False
    if above and below:
        return True
    return None


def _decide_gap(U: ClopenSet, blo, bhi):
    undecided = False
    for lo, hi in U.blocks:
        got = _gap_vs_block(lo, hi, blo, bhi)
        if got is True:
            return True
        if got is None:
            undecided = True
    return None if undecided else False


def membership(pt: CutPoint, U: ClopenSet, refine: bool = True) -> bool:
    """Exact membership test.

    Jumps and the extreme points are compared directly.  A gap is decided
    from its rational bounds; when they straddle a block endpoint and the
    exact position is known, the bounds are refined by dyadic bracketing.
    """
    if pt.kind != GAP:
        return U.contains_key(pt.key)
    blo, bhi = pt.tight_bounds()
    got = _decide_gap(U, blo, bhi)
    if got is not None:
        return got
    if refine and pt.alpha is not None:
        for bits in REFINE_BITS:
            blo, bhi = bracket(pt.alpha, bits)
            got = _decide_gap(U, blo, bhi)
            if got is not None:
                return got
    raise UndecidableAtDepth(
        f"bounds [{format_fraction(blo)},{format_fraction(bhi)}] of {pt.label} "
        "straddle a block endpoint"
    )


# ---------------------------------------------------------------------------
# rational search between keys


def _lower_from(key, strict: bool, side: int):
    """Constraint on r from key < (r, side) (strict) or key <= (r, side)."""
    v, sd = key
    if isinstance(v, QSqrt2):
        return v, False
    if strict:
        return v, side > sd
    return v, side >= sd


def _upper_from(key, strict: bool, side: int):
    """Constraint on r from (r, side) < key (strict) or (r, side) <= key."""
    v, sd = key
    if isinstance(v, QSqrt2):
        return v, False
    if strict:
        return v, side < sd
    return v, side <= sd


def _tighter_lower(a, b):
    if a[0] > b[0]:
        return a
    if b[0] > a[0]:
        return b
    return a if not a[1] else b


def _tighter_upper(a, b):
    if a[0] < b[0]:
        return a
    if b[0] < a[0]:
        return b
    return a if not a[1] else b


def _rational(lowers: list, uppers: list) -> Fraction:
    lo = (ZERO, False)
    for c in lowers:
        lo = _tighter_lower(lo, c)
    hi = (ONE, False)
    for c in uppers:
        hi = _tighter_upper(hi, c)
    if lo[1] and hi[1] and lo[0] == hi[0]:
        return Fraction(lo[0].a) if isinstance(lo[0], QSqrt2) else lo[0]
    return dyadic_between(lo[0], hi[0], lo[1], hi[1])


# ---------------------------------------------------------------------------
# fragment


def _seed_offset(seed: int) -> QSqrt2:
    """An irrational in (-1/8, 1/8) determined by the seed."""
    k = abs(int(seed)) + 1
    frac = QSqrt2(-floor_exact(QSqrt2(0, k)), k)
    return (frac - Fraction(1, 2)) / 4


@dataclass(frozen=True)
class SiblingUnion:
    prefix: Path
    bound: int


class Fragment:
    """Gap points x_σ with nested intervals X_σ realising P(depth, width)."""

    def __init__(self, depth: int, width: int, rationals: Sequence[Fraction], seed: int,
                 gaps: dict, intervals: dict):
        self.depth = depth
        self.width = width
        self.rationals = tuple(Fraction(r) for r in rationals)
        self.seed = seed
        self.gaps: dict[Path, QSqrt2] = dict(gaps)
        self.intervals: dict[Path, tuple[Fraction, Fraction]] = dict(intervals)
        self.paths: list[Path] = paths(depth, width)
        self.index = {p: i for i, p in enumerate(self.paths)}
        names = [path_name(p, GAP_LETTER) for p in self.paths]
        pairs = [(path_name(a, GAP_LETTER), path_name(b, GAP_LETTER))
                 for a, b in generating_pairs(depth, width)]
        self.poset: FinitePoset = from_relation(names, pairs, cap=max(len(names), 1))
        self._locate_cache: dict = {}
        self._union_cache: dict = {}
        self._below_cache: dict = {}
        self._neighbour_cache: dict = {}
        self._isolated_cache: dict = {}

    # -- points ----------------------------------------------------------

    def bounds_of(self, path: Path) -> tuple:
        if not path:
            chain = ((ZERO, ONE),)
        else:
            chain = tuple(self.intervals[path[:d]] for d in range(1, len(path) + 1))
        return chain + (bracket(self.gaps[path], BRACKET_BITS),)

    @cached_property
    def points(self) -> list[CutPoint]:
        return [CutPoint(GAP, alpha=self.gaps[p], path=p, bounds=self.bounds_of(p)) for p in self.paths]

    def point(self, path: Path) -> CutPoint:
        return self.points[self.index[path]]

    def frag_index(self, pt: CutPoint) -> int | None:
        if pt.kind != GAP or pt.path is None:
            return None
        i = self.index.get(pt.path)
        if i is None or self.gaps[pt.path] != pt.alpha:
            return None
        return i

    def precedes(self, a: CutPoint, b: CutPoint) -> bool:
        """a ⪯ b."""
        if a == b:
            return True
        i, j = self.frag_index(a), self.frag_index(b)
        if i is None or j is None:
            return False
        return bool(self.poset.le[i, j])

    # -- intervals -------------------------------------------------------

    def interval_set(self, path: Path) -> ClopenSet:
        return block(*self.intervals[path])

    def in_interval(self, pt: CutPoint, path: Path) -> bool:
        if not path:
            return True
        lo, hi = self.intervals[path]
        return (lo, 1) <= pt.key <= (hi, 0)

    def locate(self, pt: CutPoint) -> Path:
        """Deepest σ with pt in X_σ (the empty path when in none)."""
        got = self._locate_cache.get(pt)
        if got is not None:
            return got
        key = pt.key
        sigma: Path = ()
        while len(sigma) <= self.depth:
            for i in range(self.width):
                lo, hi = self.intervals[sigma + (i,)]
                if (lo, 1) <= key <= (hi, 0):
                    sigma = sigma + (i,)
                    break
            else:
                break
        self._locate_cache[pt] = sigma
        return sigma

    def sibling_union(self, prefix: Path, bound: int) -> ClopenSet:
        """⋃(X_{prefix,l} : l <= bound); decreasing when len(prefix) is odd."""
        k = (prefix, bound)
        got = self._union_cache.get(k)
        if got is None:
            got = ClopenSet(tuple(self.intervals[prefix + (l,)] for l in range(bound + 1)))
            self._union_cache[k] = got
        return got

    # -- landmarks -------------------------------------------------------

    @cached_property
    def probes(self) -> list[CutPoint]:
        return probe_points(self)

    @cached_property
    def _landmark_keys(self) -> list:
        keys = {p.key for p in self.points}
        keys.update(p.key for p in self.probes)
        return sorted(keys)

    def _neighbours(self, ku):
        got = self._neighbour_cache.get(ku)
        if got is None:
            got = self._neighbour_cache[ku] = self._find_neighbours(ku)
        return got

    def _find_neighbours(self, ku):
        keys = self._landmark_keys
        i = bisect.bisect_left(keys, ku)
        below = keys[i - 1] if i > 0 else None
        j = i + 1 if i < len(keys) and keys[i] == ku else i
        above = keys[j] if j < len(keys) else None
        return below, above

    def below_cut(self, ku, kv) -> ClopenSet:
        """[empty, (0,s)) with u <= (0,s) and (0,s] <= v, for keys ku < kv.

        s is taken below the next landmark after u as well, so one witness
        serves every landmark above u.
        """
        _, above = self._neighbours(ku)
        upper = kv if above is None or kv < above else above
        got = self._below_cache.get((ku, upper))
        if got is None:
            s = _rational([_lower_from(ku, False, 0)], [_upper_from(upper, False, 1)])
            got = self._below_cache[(ku, upper)] = block(None, s)
        return got

    def isolated_block(self, u: CutPoint, avoid: CutPoint | None = None) -> ClopenSet:
        """A block around a non-fragment point containing no other landmark."""
        ku = u.key
        below, above = self._neighbours(ku)
        if avoid is not None and avoid != u:
            kv = avoid.key
            if kv < ku and (below is None or kv > below):
                below = kv
            if kv > ku and (above is None or kv < above):
                above = kv
        ck = (u.kind, ku, below, above)
        got = self._isolated_cache.get(ck)
        if got is None:
            got = self._isolated_cache[ck] = self._isolated(u, ku, below, above)
        return got

    def _isolated(self, u, ku, below, above) -> ClopenSet:
        if u.kind == EMPTY:
            lo = None
        else:
            lows = [_upper_from(ku, False, 1)]
            if below is not None:
                lows_c = _lower_from(below, True, 1)
                lo = _rational([lows_c], lows)
            else:
                lo = _rational([], lows)
        if u.kind == FULL:
            hi = None
        else:
            his = [_lower_from(ku, False, 0)]
            ups = [] if above is None else [_upper_from(above, True, 0)]
            hi = _rational(his, ups)
        return block(lo, hi)

    # -- serialisation ---------------------------------------------------

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "width": self.width,
            "seed": self.seed,
            "rationals": [format_fraction(r) for r in self.rationals],
            "gaps": {path_name(p, GAP_LETTER): format_qsqrt2(self.gaps[p]) for p in self.paths},
            "intervals": {
                path_name(p, GAP_LETTER): [format_fraction(a), format_fraction(b)]
                for p in self.paths if p
                for a, b in [self.intervals[p]]
            },
            "order": [list(c) for c in self.poset.covers()],
        }

    def __eq__(self, other):
        if not isinstance(other, Fragment):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None


def fragment_from_json(data: dict) -> Fragment:
    n, w = int(data["depth"]), int(data["width"])
    gaps = {parse_path(k): parse_qsqrt2(v) for k, v in data["gaps"].items()}
    intervals = {parse_path(k): (parse_fraction(a), parse_fraction(b)) for k, (a, b) in data["intervals"].items()}
    F = Fragment(n, w, [parse_fraction(r) for r in data["rationals"]], int(data.get("seed", 0)), gaps, intervals)
    if set(gaps) != set(F.paths) or set(intervals) != set(F.paths[1:]):
        raise ValueError("fragment JSON does not cover every path")
    if "order" in data:
        given = sorted(tuple(c) for c in data["order"])
        if given != sorted(F.poset.covers()):
            raise ValueError("fragment JSON order disagrees with the construction rules")
    problems = check_invariants(F)
    if problems:
        raise InfeasiblePlacement("; ".join(problems[:5]))
    return F


def _place(F_gaps, F_intervals, sigma, t, lo, hi, n, w, rationals, delta):
    right = len(sigma) % 2 == 0
    reach = (hi - t) if right else (t - lo)
    d = len(sigma) + 1
    s = rationals[d - 1]
    for i in range(w):
        near = reach / (2 ** (i + 1))
        far = reach / (2 ** i)
        margin = (far - near) / 8
        if right:
            c_lo = dyadic_between(t + near, t + near + margin)
            c_hi = dyadic_between(t + far - margin, t + far)
        else:
            c_lo = dyadic_between(t - far, t - far + margin)
            c_hi = dyadic_between(t - near - margin, t - near)
        if c_lo <= s <= c_hi:
            if s - c_lo >= c_hi - s:
                c_hi = dyadic_between((c_lo + s) / 2, s)
            else:
                c_lo = dyadic_between(s, (s + c_hi) / 2)
        child = sigma + (i,)
        gap = QSqrt2((c_lo + c_hi) / 2) + delta * (c_hi - c_lo)
        F_intervals[child] = (c_lo, c_hi)
        F_gaps[child] = gap
        if d <= n:
            _place(F_gaps, F_intervals, child, gap, c_lo, c_hi, n, w, rationals, delta)


def build_fragment(depth: int, width: int, rationals: Sequence | None = None, seed: int = 0,
                   cap: int = DEFAULT_UNIVERSE_CAP) -> Fragment:
    """Place the gaps and nested intervals for P(depth, width) exactly."""
    if depth < 0 or width < 1:
        raise ValueError("need depth >= 0 and width >= 1")
    count = element_count(depth, width)
    if count > cap:
        raise CapExceeded(f"fragment has {count} points, over cap {cap}")
    if rationals is None:
        rationals = stern_brocot(depth + 1)
    rats = [Fraction(r) for r in rationals]
    if len(rats) < depth + 1:
        raise ValueError(f"need at least {depth + 1} rationals, got {len(rats)}")
    if len(set(rats)) != len(rats):
        raise ValueError("rational enumeration has repeats")
    if any(not (ZERO < r < ONE) for r in rats):
        raise ValueError("rationals must lie in (0,1)")
    delta = _seed_offset(seed)
    root = QSqrt2(Fraction(1, 4)) + delta / 4
    gaps: dict = {(): root}
    intervals: dict = {}
    _place(gaps, intervals, (), root, ZERO, ONE, depth, width, rats, delta)
    F = Fragment(depth, width, rats, seed, gaps, intervals)
    problems = check_invariants(F)
    if problems:
        raise InfeasiblePlacement("; ".join(problems[:5]))
    return F


def check_invariants(F: Fragment) -> list[str]:
    """Every placement invariant, checked exactly; returns the violations."""
    bad: list[str] = []
    root = F.gaps[()]
    for p in F.paths:
        if not p:
            continue
        name = path_name(p, GAP_LETTER)
        lo, hi = F.intervals[p]
        d = len(p)
        if not lo < hi:
            bad.append(f"{name}: empty interval")
        if hi - lo > Fraction(1, 2 ** d):
            bad.append(f"{name}: length {hi - lo} exceeds 1/2^{d}")
        s = F.rationals[d - 1]
        if lo <= s <= hi:
            bad.append(f"{name}: contains the excluded jumps at {s}")
        g = F.gaps[p]
        if not (lo < g < hi):
            bad.append(f"{name}: gap outside its interval")
        if d > 1:
            plo, phi = F.intervals[p[:-1]]
            if lo < plo or hi > phi:
                bad.append(f"{name}: not nested in its parent")
        elif not lo > root:
            bad.append(f"{name}: not above the root gap")
    for p in F.paths:
        if len(p) > F.depth:
            continue
        kids = [F.intervals[p + (i,)] for i in range(F.width)]
        g = F.gaps[p]
        for i, (lo, hi) in enumerate(kids):
            if lo < g < hi:
                bad.append(f"{path_name(p + (i,), GAP_LETTER)}: contains its parent gap")
        if len(p) % 2 == 0:
            seq = [g] + [v for lo_hi in reversed(kids) for v in lo_hi]
        else:
            seq = [v for lo_hi in kids for v in lo_hi] + [g]
        if any(not a < b for a, b in zip(seq, seq[1:])):
            bad.append(f"children of {path_name(p, GAP_LETTER)} are not disjoint and monotone toward it")
    le = F.poset.le
    pts = F.points
    for i, j in np.argwhere(le):
        if i != j and not pts[i].key < pts[j].key:
            bad.append(f"{pts[i].label} ⪯ {pts[j].label} but not below in the cut order")
    return bad


# ---------------------------------------------------------------------------
# probes


def probe_points(F: Fragment) -> list[CutPoint]:
    """Fragment gaps plus representative points of every other kind.

    Extras: the empty set, Q, both jumps at every enumeration rational and at
    every interval endpoint, one free gap inside every interval (outside its
    children, distinct from x_σ), a gap below x and a gap above all intervals.
    """
    extra: dict = {}

    def add(pt: CutPoint):
        extra.setdefault(pt.key, pt)

    add(empty_point())
    add(full_point())
    for r in F.rationals:
        add(jump_open(r))
        add(jump_closed(r))
    for p in F.paths[1:]:
        lo, hi = F.intervals[p]
        for r in (lo, hi):
            add(jump_open(r))
            add(jump_closed(r))
    for p in F.paths:
        g = F.gaps[p]
        if p:
            lo, hi = F.intervals[p]
        else:
            lo, hi = ZERO, F.intervals[(F.width - 1,)][0]
        # the side of x_σ that holds no children
        free = (g + lo) / 2 if (len(p) % 2 == 0) else (g + hi) / 2
        if len(p) > F.depth and p:
            free = (g + lo) / 2
        add(gap_point(free))
    top = max(F.intervals[(i,)][1] for i in range(F.width))
    add(gap_point((QSqrt2(top) + QSqrt2(ONE)) / 2 + QSqrt2(0, Fraction(1, 10 ** 6))))
    for p in F.points:
        extra.pop(p.key, None)
    out = list(F.points) + [extra[k] for k in sorted(extra)]
    return out


# ---------------------------------------------------------------------------
# separation


def _require(cond: bool, what: str):
    if not cond:
        raise IsoFailure(f"separation case precondition failed: {what}")


def _endgame(F: Fragment, I: Path, J: Path) -> tuple[ClopenSet, str]:
    _require(len(I) > 0, "u is the root gap but lies above v")
    if not J:
        _require(len(I) >= 2, "u on layer 0 above the root")
        return F.sibling_union(I[:1], I[1]), "root-v"
    a, b = len(I), len(J)
    k = next((t for t in range(min(a, b)) if I[t] != J[t]), None)
    if k is not None and k < min(a, b) - 1:
        if k % 2 == 0:
            return F.sibling_union(I[: k + 1], I[k + 1]), "split-even"
        return F.sibling_union(J[: k + 1], J[k + 1]).complement(), "split-odd"
    if a <= b:
        if k is None:
            _require(b >= a + 2 and a % 2 == 1, "prefix case shape")
            return F.sibling_union(J[: a + 1], J[a + 1]).complement(), "prefix-u"
        _require(b >= a + 1, "branch case depth")
        if (a - 1) % 2 == 0:
            _require(I[a - 1] < J[a - 1] and b >= a + 2, "even branch order")
            return F.sibling_union(J[: a + 1], J[a + 1]).complement(), "branch-u-even"
        return F.sibling_union(J[:a], J[a]).complement(), "branch-u-odd"
    if k is None:
        _require(a >= b + 2 and b % 2 == 0, "prefix case shape")
        return F.sibling_union(I[: b + 1], I[b + 1]), "prefix-v"
    if (b - 1) % 2 == 0:
        return F.sibling_union(I[:b], I[b]), "branch-v-even"
    _require(I[b - 1] > J[b - 1] and a >= b + 2, "odd branch order")
    return F.sibling_union(I[: b + 1], I[b + 1]), "branch-v-odd"


def explain_witness(F: Fragment, u: CutPoint, v: CutPoint) -> tuple[ClopenSet, str]:
    """Witness U plus the name of the case that produced it."""
    if F.precedes(v, u):
        raise NotSeparablePrecondition(f"{v.label} ⪯ {u.label}; no separating decreasing set")
    ku, kv = u.key, v.key
    if ku < kv:
        return F.below_cut(ku, kv), "cut-order"
    iu, iv = F.frag_index(u), F.frag_index(v)
    leaf = F.depth + 1
    if iu is None and u.kind == GAP:
        sigma = F.locate(u)
        if len(sigma) == leaf:
            for L in range(1, len(sigma), 2):
                if not F.in_interval(v, sigma[:L]):
                    return F.sibling_union(sigma[:L], sigma[L]), "deep-u"
    if iv is None and v.kind == GAP:
        tau = F.locate(v)
        if len(tau) == leaf:
            for L in range(2, len(tau), 2):
                if not F.in_interval(u, tau[:L]):
                    return F.sibling_union(tau[:L], tau[L]).complement(), "deep-v"
    if iu is None:
        return F.isolated_block(u, avoid=v), "isolated-u"
    if iv is None:
        return F.isolated_block(v, avoid=u).complement(), "isolated-v"
    return _endgame(F, F.paths[iu], F.paths[iv])


def separation_witness(F: Fragment, u: CutPoint, v: CutPoint) -> ClopenSet:
    """A clopen ⪯-decreasing set containing u and missing v (requires v ⋠ u)."""
    return explain_witness(F, u, v)[0]


def _fragment_membership(F: Fragment, U: ClopenSet) -> np.ndarray:
    return np.fromiter((membership(p, U) for p in F.points), dtype=bool, count=len(F.points))


def is_decreasing(F: Fragment, U: ClopenSet) -> bool:
    """No fragment pair a ⪯ b has b in U and a outside."""
    inside = _fragment_membership(F, U)
    return not bool((F.poset.le & inside[None, :] & ~inside[:, None]).any())


# ---------------------------------------------------------------------------
# isomorphism and sweep


@dataclass
class IsoReport:
    ok: bool
    mapping: dict
    natural: bool
    components: int
    compatible: bool
    isolated_certificate: str

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "natural_map": self.natural,
            "components": self.components,
            "cut_order_compatible": self.compatible,
            "isolated_points": self.isolated_certificate,
            "mapping": dict(sorted(self.mapping.items())),
        }


def order_iso_check(F: Fragment, seed: int | None = None) -> IsoReport:
    P = generate_P(F.depth, F.width)
    mapping = {path_name(p, GAP_LETTER): path_name(p) for p in F.paths}
    natural = is_order_isomorphism(F.poset, P, mapping)
    if not natural:
        found = find_isomorphism(F.poset, P, seed=seed)
        if found is None:
            raise IsoFailure("fragment order is not isomorphic to the truncation")
        mapping = dict(found)
    comps = max(component_labels(F.poset)) + 1
    pts = F.points
    compatible = all(pts[i].key < pts[j].key for i, j in np.argwhere(F.poset.le) if i != j)
    return IsoReport(
        ok=comps == 1 and compatible,
        mapping=mapping,
        natural=natural,
        components=comps,
        compatible=compatible,
        isolated_certificate="every point of C outside the fragment is ⪯-related only to itself",
    )


@dataclass
class SweepReport:
    points: int
    pairs: int
    skipped_related: int
    passed: int
    failures: list
    cases: dict
    distinct_witnesses: int
    seconds: float

    @property
    def ok(self) -> bool:
        return not self.failures and self.passed == self.pairs

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "points": self.points,
            "pairs": self.pairs,
            "skipped_related": self.skipped_related,
            "passed": self.passed,
            "failures": self.failures[:20],
            "failure_count": len(self.failures),
            "cases": dict(sorted(self.cases.items())),
            "distinct_witnesses": self.distinct_witnesses,
        }


def sweep(F: Fragment, points: Sequence[CutPoint] | None = None) -> SweepReport:
    """Separate every ordered pair u ⋡ v of probe points and verify the witness."""
    t0 = time.perf_counter()
    pts = list(F.probes if points is None else points)
    decreasing: dict[ClopenSet, bool] = {}
    cases: Counter = Counter()
    failures: list = []
    pairs = skipped = passed = 0
    for u in pts:
        for v in pts:
            if u == v:
                continue
            if F.precedes(v, u):
                skipped += 1
                continue
            pairs += 1
            try:
                U, case = explain_witness(F, u, v)
            except Exception as exc:  # recorded, not raised: the sweep reports
                failures.append({"u": u.label, "v": v.label, "error": f"{type(exc).__name__}: {exc}"})
                continue
            cases[case] += 1
            dec = decreasing.get(U)
            if dec is None:
                dec = decreasing[U] = is_decreasing(F, U)
            in_u = membership(u, U)
            in_v = membership(v, U)
            if in_u and not in_v and dec:
                passed += 1
            else:
                failures.append({
                    "u": u.label, "v": v.label, "case": case, "witness": U.to_json(),
                    "u_in": in_u, "v_in": in_v, "decreasing": dec,
                })
    return SweepReport(
        points=len(pts), pairs=pairs, skipped_related=skipped, passed=passed,
        failures=failures, cases=dict(cases), distinct_witnesses=len(decreasing),
        seconds=time.perf_counter() - t0,
    )


def parse_point(text: str, F: Fragment | None = None) -> CutPoint:
    """Parse "empty", "full", "(0,r)", "(0,r]", "gap:a|b" or a fragment name "x[...]"."""
    t = text.strip()
    if t == "empty":
        return empty_point()
    if t == "full":
        return full_point()
    if t.startswith("(0,") and t[-1] in ")]":
        r = parse_fraction(t[3:-1])
        return jump_open(r) if t[-1] == ")" else jump_closed(r)
    if t.startswith("gap:"):
        return gap_point(parse_qsqrt2(t[4:]))
    if t.startswith(GAP_LETTER):
        if F is None:
            raise ValueError(f"fragment point {t!r} needs a fragment")
        p = parse_path(t)
        if p not in F.index:
            raise ValueError(f"{t!r} is not a point of this fragment")
        return F.point(p)
    raise ValueError(f"cannot parse cut point {text!r}")

"""Finite truncations of the countable connected poset P built on index paths.

Elements are ``p`` (the root) and ``p[i0,...,in]``.  The truncation P(n, w)
keeps paths of length at most n+1 with every index below w.  Layer m holds
the paths of length m+1; P(m) is the root together with layers 0..m.

Generating relations, for a parent path s with children s+(i,):

* root: the children sit above it and form the chain p[w-1] < ... < p[0];
* s of odd length: children sit below, p[s,0] < p[s,1] < ..., and every
  child lies below the siblings p[s[:-1],k] of s with k <= s[-1];
* s of even length >= 2: children sit above, ... < p[s,1] < p[s,0], and
  every child lies above the siblings p[s[:-1],k] of s with k <= s[-1].

The order is the reflexive-transitive closure of these pairs.
"""

from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import CapExceeded
from .poset import (
    DEFAULT_UNIVERSE_CAP,
    FinitePoset,
    component_labels,
    from_relation,
    iter_bits,
)

Path = tuple[int, ...]

_PATH_RE = re.compile(r"^([a-z]+)(?:\[(\d+(?:,\d+)*)\])?$")


def path_name(path: Path, letter: str = "p") -> str:
    if not path:
        return letter
    return f"{letter}[{','.join(map(str, path))}]"


def parse_path(name: str) -> Path:
    m = _PATH_RE.match(name)
    if m is None:
        raise ValueError(f"not a path name: {name!r}")
    if m.group(2) is None:
        return ()
    return tuple(int(t) for t in m.group(2).split(","))


def element_count(n: int, w: int) -> int:
    return 1 + sum(w ** (m + 1) for m in range(n + 1))


def paths(n: int, w: int) -> list[Path]:
    """All paths of P(n, w) ordered by (length, indices)."""
    out: list[Path] = [()]
    for length in range(1, n + 2):
        out.extend(itertools.product(range(w), repeat=length))
    return out


def generating_pairs(n: int, w: int) -> list[tuple[Path, Path]]:
    """The strict relations listed by the construction, restricted to P(n, w)."""
    pairs: list[tuple[Path, Path]] = []
    for parent in paths(n - 1, w) if n >= 1 else [()]:
        kids = [parent + (i,) for i in range(w)]
        if not parent:
            pairs.extend(((), c) for c in kids)
            pairs.extend((kids[i], kids[j]) for i in range(w) for j in range(i))
            continue
        anchors = [parent[:-1] + (k,) for k in range(parent[-1] + 1)]
        if len(parent) % 2 == 1:
            pairs.extend((kids[i], kids[j]) for i in range(w) for j in range(i + 1, w))
            pairs.extend((c, a) for c in kids for a in anchors)
        else:
            pairs.extend((kids[i], kids[j]) for i in range(w) for j in range(i))
            pairs.extend((a, c) for c in kids for a in anchors)
    return pairs


def generate_P(n: int, w: int, cap: int = DEFAULT_UNIVERSE_CAP) -> FinitePoset:
    """The truncation P(n, w): depth <= n+1, every index < w."""
    if n < 0 or w < 1:
        raise ValueError("need depth n >= 0 and width w >= 1")
    count = element_count(n, w)
    if count > cap:
        raise CapExceeded(f"P({n},{w}) has {count} elements, over cap {cap}")
    ps = paths(n, w)
    names = [path_name(p) for p in ps]
    pairs = [(path_name(a), path_name(b)) for a, b in generating_pairs(n, w)]
    return from_relation(names, pairs, cap=cap)


def infer_parameters(P: FinitePoset) -> tuple[int, int]:
    """(n, w) of a poset whose ids are path names."""
    ps = [parse_path(e) for e in P.elements]
    n = max(len(p) for p in ps) - 1
    w = max((max(p) for p in ps if p), default=-1) + 1
    return n, w


# ---------------------------------------------------------------------------
# verifiers


@dataclass
class CheckReport:
    name: str
    ok: bool
    failures: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "ok": self.ok,
            "failures": [list(f) if isinstance(f, tuple) else f for f in self.failures],
            "info": self.info,
        }


def verify_poset_axioms(P: FinitePoset) -> CheckReport:
    """Rescan reflexivity, antisymmetry and transitivity; count components."""
    le = P.le
    ids = P.elements
    failures: list = []
    for i in np.flatnonzero(~np.diag(le)):
        failures.append(("not reflexive", ids[i]))
    both = le & le.T
    np.fill_diagonal(both, False)
    for i, j in np.argwhere(both):
        if i < j:
            failures.append(("not antisymmetric", ids[i], ids[j]))
    two = (le.astype(np.int32) @ le.astype(np.int32)) > 0
    for i, j in np.argwhere(two & ~le):
        k = int(np.flatnonzero(le[i] & le[:, j])[0])
        failures.append(("not transitive", ids[i], ids[k], ids[j]))
    comps = max(component_labels(P), default=-1) + 1
    if comps != 1:
        failures.append(("components", comps))
    return CheckReport(
        "poset-axioms",
        not failures,
        failures,
        {"elements": len(P), "relations": int(le.sum()), "components": comps},
    )


def _is_chain(P: FinitePoset, mask: int) -> bool:
    idx = list(iter_bits(mask))
    sub = P.le[np.ix_(idx, idx)]
    return bool((sub | sub.T).all())


def verify_chain_facts(P: FinitePoset) -> CheckReport:
    """Odd-length paths have chain up-sets; even-length paths chain down-sets."""
    failures = []
    checked = 0
    for i, e in enumerate(P.elements):
        path = parse_path(e)
        if not path:
            continue
        checked += 1
        if len(path) % 2 == 1:
            cone, polarity = P.up_masks[i], "up"
        else:
            cone, polarity = P.down_masks[i], "down"
        if not _is_chain(P, cone):
            failures.append((e, polarity, list(P.ids_of(cone))))
    return CheckReport("chain-facts", not failures, failures, {"cones_checked": checked})


def _bfs_cone(succ: dict[Path, list[Path]], start: Path) -> set[Path]:
    seen = {start}
    todo = deque([start])
    while todo:
        a = todo.popleft()
        for b in succ.get(a, ()):
            if b not in seen:
                seen.add(b)
                todo.append(b)
    return seen


def verify_cone_facts(P: FinitePoset) -> CheckReport:
    """Cone facts behind the finiteness steps of the non-representability argument.

    * [y) ∩ layer 0 = {p[k] : k <= y[0]} for y in layers 0 and 1, empty for
      deeper y, and the root's up-set holds all of layer 0;
    * for every y and layer bound m, (y] ∩ P(m) and [y) ∩ P(m) agree with a
      breadth-first search over the raw generating pairs;
    * width stability: for y outside P(m) the cone pointing back into P(m)
      ((y] for even m, [y) for odd m, [y) into P(0)) gains no element when
      the width grows by one.

    The glb/lub statements themselves are not asserted: truncating the width
    creates spurious bounds (p[w-1, j] lies below every retained p[k]).
    """
    n, w = infer_parameters(P)
    path_of = [parse_path(e) for e in P.elements]
    pos = {p: i for i, p in enumerate(path_of)}
    failures = []
    layer0 = [i for i, p in enumerate(path_of) if len(p) == 1]
    for i, p in enumerate(path_of):
        got = {path_of[j] for j in iter_bits(P.up_masks[i])} & {path_of[j] for j in layer0}
        if not p:
            want = {(k,) for k in range(w)}
        elif len(p) <= 2:
            want = {(k,) for k in range(p[0] + 1)}
        else:
            # layers alternate direction, so nothing from layer 2 down reaches layer 0
            want = set()
        if got != want:
            failures.append(("layer-0 closed form", P.elements[i], sorted(map(path_name, got))))

    up_succ: dict[Path, list[Path]] = {}
    down_succ: dict[Path, list[Path]] = {}
    for a, b in generating_pairs(n, w):
        up_succ.setdefault(a, []).append(b)
        down_succ.setdefault(b, []).append(a)
    layers_checked = 0
    for i, p in enumerate(path_of):
        ups = _bfs_cone(up_succ, p)
        downs = _bfs_cone(down_succ, p)
        got_up = {path_of[j] for j in iter_bits(P.up_masks[i])}
        got_down = {path_of[j] for j in iter_bits(P.down_masks[i])}
        for m in range(n + 1):
            layers_checked += 1
            if {q for q in got_up if len(q) <= m + 1} != {q for q in ups if len(q) <= m + 1}:
                failures.append(("up-cone vs search", P.elements[i], m))
            if {q for q in got_down if len(q) <= m + 1} != {q for q in downs if len(q) <= m + 1}:
                failures.append(("down-cone vs search", P.elements[i], m))

    wider = generate_P(n, w + 1)
    stable_checked = 0
    for i, p in enumerate(path_of):
        j = wider.index[P.elements[i]]
        targets = [(0, "up")] if len(p) >= 2 else []
        for m in range(n + 1):
            if len(p) >= m + 3:
                targets.append((m + 1, "down" if m % 2 == 0 else "up"))
        for m, pol in targets:
            cone = wider.up_masks[j] if pol == "up" else wider.down_masks[j]
            grown = [
                q for q in (parse_path(e) for e in wider.ids_of(cone))
                if len(q) <= m + 1 and q not in pos
            ]
            stable_checked += 1
            if grown:
                failures.append(("cone grows with width", P.elements[i], m, pol))
    return CheckReport(
        "cone-facts",
        not failures,
        failures,
        {
            "elements": len(P),
            "layer_checks": layers_checked,
            "width_stability_checks": stable_checked,
            "note": "glb/lub claims are not asserted inside truncations",
        },
    )


def verify_P(P: FinitePoset) -> list[CheckReport]:
    n, w = infer_parameters(P)
    count = CheckReport(
        "element-count",
        len(P) == element_count(n, w),
        [] if len(P) == element_count(n, w) else [("count", len(P), element_count(n, w))],
        {"n": n, "w": w, "expected": element_count(n, w)},
    )
    return [count, verify_poset_axioms(P), verify_chain_facts(P), verify_cone_facts(P)]

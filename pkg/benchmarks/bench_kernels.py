"""Compare the numba and numpy flavours of each kernel.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is warmed up once (so JIT compilation is excluded), outputs of
the two flavours are checked for equality, then the best of ``--repeat``
timings is reported.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from posetkit import _kernels
from posetkit.construct import generate_P
from posetkit.poset import component_masks, disjoint_union, chain, antichain


def _best(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def _random_dag(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    return np.triu(rng.random((n, n)) < p, k=1)


def _pred_masks(P) -> np.ndarray:
    order = P.linear_extension()
    rank = {i: r for r, i in enumerate(order)}
    out = []
    for i in order:
        m = 0
        for j in range(len(P)):
            if j != i and P.le[j, i]:
                m |= 1 << rank[j]
        out.append(m)
    return np.array(out, dtype=np.int64)


def cases(rng: np.random.Generator):
    for n in (64, 256):
        adj = _random_dag(n, 4.0 / n, rng)
        yield f"closure n={n}", (
            lambda a=adj: _kernels.closure_numba(a),
            lambda a=adj: _kernels.closure_numpy(a),
        )
    P = generate_P(3, 2)  # 31 elements
    pred = _pred_masks(P)
    yield f"downsets P(3,2) n={len(P)}", (
        lambda: _kernels.downsets_numba(pred, 1 << 22),
        lambda: _kernels.downsets_numpy(pred, 1 << 22),
    )
    Q = disjoint_union([chain(3), antichain(2), chain(3)])
    down = np.array(Q.down_masks, dtype=np.int64)
    up = np.array(Q.up_masks, dtype=np.int64)
    comp = np.array(component_masks(Q), dtype=np.int64)
    yield f"cover batch n={len(Q)}", (
        lambda: _kernels.cover_batch_numba(down, up, comp),
        lambda: _kernels.cover_batch_numpy(down, up, comp),
    )


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.sort(np.ravel(a)), np.sort(np.ravel(b))) if a.ndim == 1 else np.array_equal(a, b)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _kernels._HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<28}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}  agree")
    for name, (nb, npy) in cases(rng):
        agree = _same(nb(), npy())  # also warms the JIT
        t_nb = _best(nb, args.repeat) * 1e3
        t_np = _best(npy, args.repeat) * 1e3
        print(f"{name:<28}{t_nb:>12.3f}{t_np:>12.3f}{t_np / t_nb:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()

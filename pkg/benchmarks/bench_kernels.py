"""Benchmark the numba kernels against their pure-numpy fallbacks.

Runs each hot kernel on representative workloads and reports per-call times
and the speedup.  Both implementations are imported directly, so this script
measures them regardless of the GLAB_NUMBA setting used for the dispatch.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from glab import _kernels as K


def _time(fn, args, repeat):
    fn(*args)  # warm-up (JIT compile for the numba build)
    start = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - start) / repeat


def bench_held_karp(rng, n, repeat):
    pts = rng.uniform(0, 1, size=(n, 2))
    masses = rng.uniform(0.5, 2.0, size=n)
    x = np.zeros(2)
    y = np.array([1.0, 0.0])
    dist0 = np.linalg.norm(pts - x, axis=1)
    dmat = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
    dist1 = np.linalg.norm(pts - y, axis=1)
    args = (dist0, dmat, dist1, masses, 2.5, True)
    return _time(K.held_karp_nb, args, repeat), _time(K.held_karp_py, args, repeat)


def bench_restricted(rng, n, repeat):
    pts = rng.uniform(0, 1, size=(n, 2))
    masses = rng.uniform(0.5, 2.0, size=n)
    anchors = np.zeros((2, 2))
    anchors[1] = (1.0, 0.0)
    args = (pts, masses, anchors, 2, 1.8, 0.0)
    return _time(K.restricted_bnb_nb, args, repeat), _time(K.restricted_bnb_py, args, repeat)


def bench_prim(rng, n, repeat):
    pts = rng.uniform(0, 1, size=(n, 2))
    return _time(K.prim_length_nb, (pts,), repeat), _time(K.prim_length_py, (pts,), repeat)


def bench_insertion(rng, n, repeat):
    cand = rng.uniform(0, 10, size=(n, 2))
    masses = np.ones(n)
    path = np.vstack([np.zeros(2), cand[: n // 10], np.array([10.0, 0.0])])
    used = np.zeros(n, dtype=bool)
    used[: n // 10] = True
    args = (path, path.shape[0], cand, used, masses, 30.0, 12.0, True)
    return _time(K.insertion_scan_nb, args, repeat), _time(K.insertion_scan_py, args, repeat)


def bench_tree_grow(rng, n, repeat):
    cand = rng.uniform(-10, 10, size=(n, 2))
    masses = np.ones(n)
    allowed = np.ones(n, dtype=bool)
    anchors = np.zeros((2, 2))
    args = (cand, masses, allowed, anchors, 1, 25.0)
    return _time(K.tree_grow_nb, args, repeat), _time(K.tree_grow_py, args, repeat)


BENCHES = {
    "held_karp": (bench_held_karp, 14, 5),
    "restricted_bnb": (bench_restricted, 12, 5),
    "prim_mst": (bench_prim, 400, 20),
    "insertion_scan": (bench_insertion, 1500, 20),
    "tree_grow": (bench_tree_grow, 600, 3),
}


def main() -> None:
    parser = argparse.ArgumentParser(description="numba vs numpy kernel benchmark")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--size", type=int, default=None, help="override problem size")
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<16} {'size':>6} {'numba [ms]':>12} {'numpy [ms]':>12} {'speedup':>9}")
    for name, (fn, size, repeat) in BENCHES.items():
        n = args.size or size
        t_nb, t_py = fn(rng, n, repeat)
        print(f"{name:<16} {n:>6} {t_nb * 1e3:>12.3f} {t_py * 1e3:>12.3f} {t_py / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()

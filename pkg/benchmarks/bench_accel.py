"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_accel.py

Both variants are imported directly, so this script measures real speedups
only when numba is active (LOADDMS_NO_NUMBA unset).
"""

import time

import numpy as np

from loaddms import accel
from loaddms import kernels as K
from loaddms.pool.svr import kernel_matrix
from loaddms.pool.tree import draw_feature_subsets, node_capacity
from loaddms.qlearn import rank_matrix


def timeit(fn, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_tree(rng):
    n, d, depth, min_leaf = 4000, 20, 12, 5
    X = rng.standard_normal((n, d))
    y = X[:, 0] * 2.0 + np.sin(X[:, 1]) + 0.1 * rng.standard_normal(n)
    rows = np.arange(n, dtype=np.int64)
    cap = node_capacity(n, depth, min_leaf)
    fs = draw_feature_subsets(rng, cap, d, 7)

    def run(fn):
        f = np.empty(cap, np.int64)
        th = np.empty(cap)
        l = np.empty(cap, np.int64)
        r = np.empty(cap, np.int64)
        v = np.empty(cap)
        leaf = np.full(n, -1, np.int64)
        fn(X, y, rows, depth, min_leaf, fs, f, th, l, r, v, leaf)
        return f, th, l, r, v

    arrs = run(K.tree_build_nb)
    out = np.empty(n)
    yield ("tree_build n=%d d=%d" % (n, d),
           lambda: run(K.tree_build_nb), lambda: run(K.tree_build_np))
    yield ("tree_predict n=%d" % n,
           lambda: K.tree_predict_nb(X, *arrs, out),
           lambda: K.tree_predict_np(X, *arrs, out))


def bench_smo(rng):
    m = 600
    X = rng.standard_normal((m, 8))
    y = np.sin(X[:, 0]) + 0.2 * rng.standard_normal(m)
    Km = np.ascontiguousarray(kernel_matrix(X, X, "rbf", 2.0))
    yield ("smo_solve m=%d" % m,
           lambda: K.smo_solve_nb(Km, y, 1.0, 0.05, 1e-3, 100000),
           lambda: K.smo_solve_np(Km, y, 1.0, 0.05, 1e-3, 100000))


def bench_q(rng):
    R, I, E, agents = 72, 4, 100, 50
    apes = rng.random((R, I)) * 10.0
    ranks = rank_matrix(apes)
    uni = rng.random((E, R - 1))
    act = rng.integers(0, I, (E, R - 1)).astype(np.int64)

    def run(fn):
        qh = np.empty((E, I, I))
        for _ in range(agents):
            fn(ranks, apes, 0, 0.1, 0.8, 0, uni, act, qh)

    yield ("q_train %d agents E=%d R=%d" % (agents, E, R),
           lambda: run(K.q_train_nb), lambda: run(K.q_train_np))


def main():
    if not accel.USE_NUMBA:
        print("note: numba is inactive (%s set or import failed); the _nb "
              "column below is plain python" % accel.ENV_FLAG)
    rng = np.random.default_rng(42)
    rows = []
    for gen in (bench_tree, bench_smo, bench_q):
        for name, fn_nb, fn_np in gen(rng):
            fn_nb()  # warm the JIT cache before timing
            t_nb = timeit(fn_nb)
            t_np = timeit(fn_np)
            rows.append((name, t_nb, t_np))
    print("%-32s %12s %12s %9s" % ("kernel", "numba_s", "numpy_s", "speedup"))
    for name, t_nb, t_np in rows:
        print("%-32s %12.4f %12.4f %8.1fx" % (name, t_nb, t_np, t_np / t_nb))


if __name__ == "__main__":
    main()

"""Cross-path checks: the numba kernels and the numpy fallbacks must return
bit-identical results, and the env flag must select the fallback."""

import os
import subprocess
import sys

import numpy as np
import pytest

from loaddms import kernels as K
from loaddms.accel import ENV_FLAG
from loaddms.pool.svr import kernel_matrix, median_sigma
from loaddms.pool.tree import draw_feature_subsets, node_capacity
from loaddms.qlearn import rank_matrix


def _build_both(X, y, rows, depth, min_leaf, fs):
    out = []
    for fn in (K.tree_build_nb, K.tree_build_np):
        cap = len(fs)
        f = np.empty(cap, np.int64)
        th = np.empty(cap)
        l = np.empty(cap, np.int64)
        r = np.empty(cap, np.int64)
        v = np.empty(cap)
        leaf = np.full(len(y), -1, np.int64)
        n = fn(X, y, rows, depth, min_leaf, fs, f, th, l, r, v, leaf)
        out.append((n, f[:n].copy(), th[:n].copy(), l[:n].copy(),
                    r[:n].copy(), v[:n].copy(), leaf))
    return out


class TestTreeKernels:
    @pytest.mark.parametrize("seed,n,d,depth,min_leaf,k",
                             [(0, 200, 5, 4, 5, 5), (1, 351, 8, 9, 2, 3),
                              (2, 64, 3, 30, 1, 3), (3, 500, 12, 6, 20, 4)])
    def test_build_bit_identical(self, seed, n, d, depth, min_leaf, k):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, d))
        y = X[:, 0] - 2.0 * X[:, 1 % d] + 0.2 * rng.standard_normal(n)
        rows = rng.integers(0, n, n).astype(np.int64)
        cap = node_capacity(n, depth, min_leaf)
        fs = draw_feature_subsets(rng, cap, d, k)
        (na, *ta), (nb, *tb) = _build_both(X, y, rows, depth, min_leaf, fs)
        assert na == nb
        for arr_a, arr_b in zip(ta, tb):
            assert np.array_equal(arr_a, arr_b)

    def test_build_with_duplicate_feature_values(self, rng):
        X = np.repeat(rng.standard_normal((40, 4)), 5, axis=0)
        y = rng.standard_normal(200)
        rows = np.arange(200, dtype=np.int64)
        cap = node_capacity(200, 8, 3)
        fs = draw_feature_subsets(rng, cap, 4, 4)
        (na, *ta), (nb, *tb) = _build_both(X, y, rows, 8, 3, fs)
        assert na == nb
        for arr_a, arr_b in zip(ta, tb):
            assert np.array_equal(arr_a, arr_b)

    def test_predict_bit_identical(self, rng):
        X = rng.standard_normal((300, 6))
        y = np.sin(X[:, 0]) + X[:, 2]
        rows = np.arange(300, dtype=np.int64)
        cap = node_capacity(300, 7, 4)
        fs = draw_feature_subsets(rng, cap, 6, 6)
        (n, f, th, l, r, v, _), _ = _build_both(X, y, rows, 7, 4, fs)
        Xq = rng.standard_normal((500, 6))
        o1 = np.empty(500)
        o2 = np.empty(500)
        K.tree_predict_nb(Xq, f, th, l, r, v, o1)
        K.tree_predict_np(Xq, f, th, l, r, v, o2)
        assert np.array_equal(o1, o2)


class TestSmoKernel:
    @pytest.mark.parametrize("kern,C", [("rbf", 1.0), ("linear", 0.3),
                                        ("poly", 0.05)])
    def test_bit_identical(self, rng, kern, C):
        X = rng.standard_normal((90, 5))
        y = np.sin(X[:, 0]) + 0.1 * rng.standard_normal(90)
        sigma = median_sigma(X) if kern == "rbf" else 1.0
        Km = np.ascontiguousarray(kernel_matrix(X, X, kern, sigma))
        a = K.smo_solve_nb(Km, y, C, 0.05, 1e-3, 50000)
        b = K.smo_solve_np(Km, y, C, 0.05, 1e-3, 50000)
        assert np.array_equal(a[0], b[0])
        assert a[1] == b[1]
        assert a[2] == b[2]
        assert a[3] == b[3]


class TestQKernel:
    @pytest.mark.parametrize("strategy", [0, 1, 2])
    def test_bit_identical(self, rng, strategy):
        apes = rng.random((40, 5)) * 8.0
        ranks = rank_matrix(apes)
        E = 60
        uni = rng.random((E, 39))
        act = rng.integers(0, 5, (E, 39)).astype(np.int64)
        q1 = np.empty((E, 5, 5))
        q2 = np.empty((E, 5, 5))
        m1 = K.q_train_nb(ranks, apes, strategy, 0.1, 0.8, 1, uni, act, q1)
        m2 = K.q_train_np(ranks, apes, strategy, 0.1, 0.8, 1, uni, act, q2)
        assert np.array_equal(q1, q2)
        assert m1 == m2


class TestEnvFlag:
    def test_flag_selects_numpy_path(self):
        code = ("import loaddms.accel as a, loaddms.kernels as k; "
                "print(a.USE_NUMBA, k.q_train is k.q_train_np)")
        env = dict(os.environ, **{ENV_FLAG: "1"})
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        assert out.stdout.split() == ["False", "True"]

    def test_default_prefers_numba_when_available(self):
        code = ("import loaddms.accel as a, loaddms.kernels as k; "
                "print(k.q_train is (k.q_train_nb if a.USE_NUMBA else "
                "k.q_train_np))")
        env = {k_: v for k_, v in os.environ.items() if k_ != ENV_FLAG}
        out = subprocess.run([sys.executable, "-c", code], env=env,
                             capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "True"

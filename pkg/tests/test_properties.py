"""Property-based checks over the arithmetic-heavy pieces."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from loaddms.backtest import preselect
from loaddms.metrics import improvement, mape
from loaddms.qlearn import (epsilon_at, q_bound, q_update, rank_matrix,
                            reward_error_reduction, reward_rank)

finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False)
pos = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@given(st.integers(1, 20), st.integers(1, 20))
def test_rank_reward_antisymmetry(r1, r2):
    assert reward_rank(r1, r2) == -reward_rank(r2, r1)


@given(pos, pos)
def test_error_reduction_antisymmetry(a, b):
    assert reward_error_reduction(a, b) == -reward_error_reduction(b, a)


@given(pos)
def test_improvement_identity(x):
    assert improvement(x, x) == 0.0


@given(arrays(np.float64, (12,), elements=pos),
       arrays(np.float64, (12,), elements=pos),
       st.floats(min_value=0.1, max_value=50.0))
def test_mape_scale_invariance(y, pred, k):
    before = mape(y, pred)
    after = mape(k * y, k * pred)
    assert np.isclose(before, after, rtol=1e-9, atol=1e-9)


@given(st.integers(0, 200), st.integers(1, 200))
def test_epsilon_bounds_and_decay(e, E):
    val = epsilon_at(e, E)
    assert 0.0 <= val <= 1.0
    assert epsilon_at(e + 1, E) <= val


@given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 8)),
              elements=pos, unique=True))
def test_rank_matrix_rows_are_permutations(apes):
    ranks = rank_matrix(apes)
    N = apes.shape[1]
    for row in ranks:
        assert sorted(row.tolist()) == list(range(1, N + 1))


@given(arrays(np.float64, st.tuples(st.integers(1, 10), st.integers(2, 6)),
              elements=pos, unique=True))
def test_rank_one_marks_the_minimum(apes):
    ranks = rank_matrix(apes)
    assert np.array_equal(np.argmin(apes, axis=1),
                          np.argmax(ranks == 1, axis=1))


@given(arrays(np.float64, st.tuples(st.integers(2, 10), st.integers(2, 7)),
              elements=pos, unique=True),
       st.permutations(list(range(5))))
def test_rank_matrix_permutation_equivariance(apes, perm):
    # Restrict the permutation to however many columns this draw produced.
    N = apes.shape[1]
    perm = [p for p in perm if p < N]
    perm += [i for i in range(N) if i not in perm]
    ranks = rank_matrix(apes)
    assert np.array_equal(rank_matrix(apes[:, perm]), ranks[:, perm])


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_q_updates_respect_bound(data):
    I = data.draw(st.integers(2, 5))
    gamma = data.draw(st.floats(min_value=0.0, max_value=0.95))
    alpha = data.draw(st.floats(min_value=0.01, max_value=1.0))
    q = np.zeros((I, I))
    bound = q_bound(I, gamma)
    for _ in range(60):
        s = data.draw(st.integers(0, I - 1))
        a = data.draw(st.integers(0, I - 1))
        r = float(data.draw(st.integers(-(I - 1), I - 1)))
        q_update(q, s, a, r, alpha, gamma)
    assert np.all(np.abs(q) <= bound + 1e-9)


@given(arrays(np.float64, st.tuples(st.integers(2, 24), st.integers(2, 8)),
              elements=pos))
def test_preselect_returns_best_k_sorted(apes):
    k = min(3, apes.shape[1])
    chosen = preselect(apes, k)
    means = apes.mean(axis=0)
    assert len(chosen) == k
    assert len(set(chosen.tolist())) == k
    # Chosen means are sorted and no excluded model beats the worst chosen.
    cm = means[chosen]
    assert np.all(np.diff(cm) >= 0)
    rest = np.delete(means, chosen)
    if len(rest):
        assert cm[-1] <= rest.min() + 1e-12


@given(st.integers(2, 6), st.floats(min_value=0.0, max_value=0.9))
def test_q_bound_closed_form(I, gamma):
    assert q_bound(I, gamma) == (I - 1) / (1.0 - gamma)

import numpy as np
import pytest

from loaddms import kernels
from loaddms.errors import ConfigError
from loaddms.qlearn import (AgentConfig, apply_policy, convergence_curve,
                            epsilon_at, q_bound, q_table_csv, q_update,
                            rank_matrix, reward_error, reward_error_reduction,
                            reward_rank, tail_variation, train_agent)


class TestEpsilon:
    def test_decay_values(self):
        assert epsilon_at(0, 100) == 1.0
        assert epsilon_at(30, 100) == 0.7
        assert epsilon_at(100, 100) == 0.0
        assert epsilon_at(250, 100) == 0.0

    def test_matches_kernel_schedule(self):
        # the episode loop uses 1 - e/E directly; e < E keeps it nonnegative
        for e in range(10):
            assert epsilon_at(e, 10) == 1.0 - e / 10


class TestRanks:
    def test_small_case(self):
        apes = np.array([[3.0, 1.0, 2.0], [1.0, 2.0, 3.0]])
        ranks = rank_matrix(apes)
        assert ranks.tolist() == [[3, 1, 2], [1, 2, 3]]

    def test_ties_keep_model_order(self):
        ranks = rank_matrix(np.array([[2.0, 1.0, 1.0]]))
        assert ranks.tolist() == [[3, 1, 2]]


class TestRewards:
    def test_rank_reward_example(self):
        # a model ranked 4th handing off to the next step's top model
        assert reward_rank(4, 1) == 3.0

    def test_error_reward_is_negated_ape(self):
        assert reward_error(2.5) == -2.5

    def test_error_reduction_sign(self):
        assert reward_error_reduction(5.0, 3.0) == 2.0
        assert reward_error_reduction(3.0, 5.0) == -2.0


class TestQUpdate:
    def test_exact_arithmetic(self):
        q = np.zeros((4, 4))
        got = q_update(q, 3, 0, 3.0, 0.1, 0.8)
        assert got == (1.0 - 0.1) * 0.0 + 0.1 * (3.0 + 0.8 * 0.0)
        assert q[3, 0] == got
        # second update sees the bootstrap term through max Q[a]
        got2 = q_update(q, 0, 3, 1.0, 0.1, 0.8)
        assert got2 == 0.9 * 0.0 + 0.1 * (1.0 + 0.8 * q[3].max())

    def test_alpha_one_overwrites(self):
        q = np.full((2, 2), 5.0)
        got = q_update(q, 0, 1, -2.0, 1.0, 0.0)
        assert got == -2.0

    def test_bound_value(self):
        assert q_bound(4, 0.8) == pytest.approx(15.0)


class TestKernelTraces:
    """Hand-traced episode loops with crafted exploration streams."""

    def _run(self, apes, strategy, alpha, gamma, s0, uniforms, actions):
        apes = np.asarray(apes, dtype=float)
        ranks = rank_matrix(apes)
        E = len(uniforms)
        qhist = np.empty((E, apes.shape[1], apes.shape[1]))
        kernels.q_train(ranks, apes, strategy, alpha, gamma, s0,
                        np.asarray(uniforms, dtype=float),
                        np.asarray(actions, dtype=np.int64), qhist)
        return qhist

    def test_single_forced_exploration_step(self):
        # alpha=1, gamma=0: the table cell becomes exactly the reward
        apes = [[1.0, 2.0], [1.0, 3.0]]
        qhist = self._run(apes, kernels.REWARD_RANK, 1.0, 0.0, 0,
                          uniforms=[[0.5]], actions=[[1]])
        # rank(s=0, t=0) = 1, rank(a=1, t=1) = 2 -> reward -1 into Q[0, 1]
        assert qhist[0].tolist() == [[0.0, -1.0], [0.0, 0.0]]

    def test_error_strategy_uses_next_step_ape(self):
        apes = [[1.0, 2.0], [1.0, 3.0]]
        qhist = self._run(apes, kernels.REWARD_ERROR, 1.0, 0.0, 0,
                          uniforms=[[0.5]], actions=[[1]])
        assert qhist[0, 0, 1] == -3.0

    def test_error_reduction_strategy(self):
        apes = [[2.5, 2.0], [1.0, 3.0]]
        qhist = self._run(apes, kernels.REWARD_ERROR_REDUCTION, 1.0, 0.0, 0,
                          uniforms=[[0.5]], actions=[[0]])
        # APE(s=0, t=0) - APE(a=0, t=1) = 2.5 - 1.0
        assert qhist[0, 0, 0] == 1.5

    def test_greedy_episode_follows_argmax(self):
        # episode 0 explores into action 1; episode 1 (eps=0.5, u=0.9) is
        # greedy and must take argmax of the updated row
        apes = [[1.0, 2.0], [1.0, 3.0]]
        qhist = self._run(apes, kernels.REWARD_RANK, 0.5, 0.0, 0,
                          uniforms=[[0.4], [0.9]], actions=[[1], [0]])
        # after ep0: Q[0,1] = 0.5 * (1 - 2) = -0.5; row 0 argmax is action 0
        assert qhist[0, 0, 1] == -0.5
        # ep1 greedy picks a=0: reward rank(0,t0)-rank(0,t1) = 1 - 1 = 0
        assert qhist[1, 0, 0] == 0.0
        assert qhist[1, 0, 1] == -0.5  # untouched in episode 1

    def test_state_chains_to_action(self):
        # two transitions in one episode; the second update starts from the
        # state reached by the first action
        apes = [[1.0, 2.0], [1.0, 3.0], [5.0, 1.0]]
        qhist = self._run(apes, kernels.REWARD_RANK, 1.0, 0.0, 0,
                          uniforms=[[0.0, 0.0]], actions=[[1, 1]])
        # t=0: s=0 a=1 -> Q[0,1] = r = 1 - 2 = -1
        # t=1: s=1 a=1 -> Q[1,1] = rank(1,t1) - rank(1,t2) = 2 - 1 = 1
        assert qhist[0, 0, 1] == -1.0
        assert qhist[0, 1, 1] == 1.0


class TestTrainAgent:
    def test_deterministic_per_seed(self, rng):
        apes = rng.random((30, 4)) * 5
        cfg = AgentConfig(episodes=40)
        a = train_agent(apes, cfg, 7)
        b = train_agent(apes, cfg, 7)
        c = train_agent(apes, cfg, 8)
        assert np.array_equal(a.q, b.q)
        assert not np.array_equal(a.q, c.q)

    def test_default_start_state_is_top_ranked(self, rng):
        apes = rng.random((20, 5))
        apes[0] = [4.0, 1.0, 2.0, 3.0, 5.0]
        res = train_agent(apes, AgentConfig(episodes=5), 0)
        assert res.s0 == 1

    def test_qhist_shape_and_final_snapshot(self, rng):
        apes = rng.random((25, 3))
        res = train_agent(apes, AgentConfig(episodes=12), 3)
        assert res.qhist.shape == (12, 3, 3)
        assert np.array_equal(res.qhist[-1], res.q)

    def test_max_abs_covers_history(self, rng):
        apes = rng.random((40, 4)) * 10
        res = train_agent(apes, AgentConfig(episodes=30), 5)
        assert res.max_abs_q >= np.max(np.abs(res.qhist)) - 1e-15

    def test_rank_reward_respects_bound(self, rng):
        for trial in range(10):
            apes = rng.random((50, 4)) * 20
            res = train_agent(apes, AgentConfig(episodes=60), trial)
            assert res.max_abs_q <= q_bound(4, 0.8) + 1e-12

    def test_window_too_short(self):
        with pytest.raises(ConfigError):
            train_agent(np.ones((1, 3)), AgentConfig(), 0)

    def test_bad_config_rejected(self):
        with pytest.raises(ConfigError):
            AgentConfig(alpha=0.0)
        with pytest.raises(ConfigError):
            AgentConfig(gamma=1.0)
        with pytest.raises(ConfigError):
            AgentConfig(reward="profit")


class TestPolicy:
    def test_greedy_rollout(self):
        res_q = np.array([[0.0, 1.0, 0.0],
                          [0.0, 0.0, 2.0],
                          [0.0, 0.0, 3.0]])

        class Stub:
            q = res_q

            def greedy_action(self, s):
                return int(np.argmax(self.q[s]))

        path = apply_policy(Stub(), 0, 4)
        assert path.tolist() == [1, 2, 2, 2]


class TestConvergence:
    def test_curves_flatten_with_rank_reward(self, rng):
        # Stationary ranks: every step orders the models the same way, so
        # the rank reward is consistent and the Q-sum curve must settle.
        levels = np.array([1.0, 2.5, 4.0, 5.5])
        apes = np.tile(levels, (72, 1))
        res = train_agent(apes, AgentConfig(episodes=100), 11)
        curve = convergence_curve(res.qhist)
        assert len(curve) == 100
        assert tail_variation(curve) < 0.05

    def test_noisy_error_reduction_settles_worse(self, rng):
        levels = np.tile(np.array([1.0, 2.5, 4.0, 5.5]), (72, 1))
        noisy = rng.random((72, 4)) * 6
        flat = tail_variation(
            convergence_curve(train_agent(levels, AgentConfig(episodes=100), 5).qhist)
        )
        rough = tail_variation(
            convergence_curve(
                train_agent(
                    noisy, AgentConfig(episodes=100, reward="error_reduction"), 5
                ).qhist
            )
        )
        assert rough > flat

    def test_tail_variation_of_flat_curve_is_zero(self):
        assert tail_variation(np.full(50, 3.0)) == 0.0

    def test_tail_variation_of_moving_curve_is_large(self):
        assert tail_variation(np.arange(100.0)) > 0.15


def test_q_table_csv(tmp_path):
    q = np.arange(4, dtype=float).reshape(2, 2)
    p = tmp_path / "q.csv"
    q_table_csv(p, q, ["A", "B"])
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "state,A,B"
    assert lines[1].startswith("A,0.0,1.0")

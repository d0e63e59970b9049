"""Tabular Q-learning for per-window forecast model selection.

The MDP is small and deterministic: states and actions are both indices into
the candidate model set, taking action a moves the state to a, and the reward
compares the outgoing model against the incoming one on the next step of the
window.  Three reward strategies are supported:

``rank``             rank(s, t) - rank(a, t+1), ranks are 1-based per step
``error``            -APE(a, t+1)
``error_reduction``  APE(s, t) - APE(a, t+1)

One episode replays the whole window; exploration decays linearly across
episodes.  The episode loop itself lives in :mod:`loaddms.kernels`.
"""

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError

log = logging.getLogger(__name__)

REWARD_CODES = {
    "rank": kernels.REWARD_RANK,
    "error": kernels.REWARD_ERROR,
    "error_reduction": kernels.REWARD_ERROR_REDUCTION,
}


@dataclass(frozen=True)
class AgentConfig:
    alpha: float = 0.1
    gamma: float = 0.8
    episodes: int = 100
    reward: str = "rank"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError("alpha must lie in (0, 1], got %r" % self.alpha)
        if not 0.0 <= self.gamma < 1.0:
            raise ConfigError("gamma must lie in [0, 1), got %r" % self.gamma)
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1, got %r" % self.episodes)
        if self.reward not in REWARD_CODES:
            raise ConfigError("unknown reward %r (expected one of %s)"
                              % (self.reward, sorted(REWARD_CODES)))


def epsilon_at(episode, n_episodes):
    """Linearly decaying exploration rate; 1 at episode 0, 0 at the last."""
    return max(0.0, 1.0 - episode / n_episodes)


def reward_rank(rank_s, rank_a_next):
    return float(rank_s - rank_a_next)


def reward_error(ape_a_next):
    return -float(ape_a_next)


def reward_error_reduction(ape_s, ape_a_next):
    return float(ape_s) - float(ape_a_next)


def q_update(q, s, a, r, alpha, gamma):
    """One in-place Bellman update; returns the new Q[s, a]."""
    nv = (1.0 - alpha) * q[s, a] + alpha * (r + gamma * np.max(q[a]))
    q[s, a] = nv
    return float(nv)


def rank_matrix(apes):
    """1-based per-step ranks (1 = lowest APE); ties keep model order."""
    apes = np.asarray(apes, dtype=float)
    order = np.argsort(apes, axis=1, kind='stable')
    ranks = np.empty_like(order)
    steps = np.arange(apes.shape[0])[:, None]
    ranks[steps, order] = np.arange(1, apes.shape[1] + 1)[None, :]
    return ranks.astype(np.int64)


def q_bound(n_candidates, gamma):
    """Bound on |Q| under the rank reward: max |r| = I - 1, geometric sum."""
    return (n_candidates - 1) / (1.0 - gamma)


@dataclass
class AgentResult:
    q: np.ndarray
    qhist: np.ndarray = field(repr=False)
    max_abs_q: float
    s0: int
    config: AgentConfig

    @property
    def n_candidates(self):
        return self.q.shape[0]

    def greedy_action(self, s):
        return int(np.argmax(self.q[s]))


def train_agent(apes, config, rng, s0=None):
    """Fit one agent on an (R, I) window of per-candidate APEs.

    ``rng`` is a numpy Generator or a seed.  The start state defaults to the
    top-ranked candidate at the first window step.  All exploration
    randomness is drawn up front so the episode loop is replayable.
    """
    apes = np.ascontiguousarray(apes, dtype=np.float64)
    n_steps, n_cand = apes.shape
    if n_steps < 2:
        raise ConfigError("window needs at least 2 steps, got %d" % n_steps)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    if s0 is None:
        s0 = int(np.argmin(apes[0]))
    if not 0 <= s0 < n_cand:
        raise ConfigError("start state %d outside candidate set" % s0)

    ranks = rank_matrix(apes)
    E = config.episodes
    uniforms = rng.random((E, n_steps - 1))
    rand_actions = rng.integers(0, n_cand, (E, n_steps - 1)).astype(np.int64)
    qhist = np.empty((E, n_cand, n_cand))
    max_abs = kernels.q_train(ranks, apes, REWARD_CODES[config.reward],
                              float(config.alpha), float(config.gamma),
                              int(s0), uniforms, rand_actions, qhist)
    return AgentResult(q=qhist[-1].copy(), qhist=qhist,
                       max_abs_q=float(max_abs), s0=int(s0), config=config)


def apply_policy(result, s_start, n_steps):
    """Greedy rollout: each step takes argmax over the current state's row."""
    s = int(s_start)
    path = np.empty(n_steps, dtype=np.int64)
    for t in range(n_steps):
        s = result.greedy_action(s)
        path[t] = s
    return path


def convergence_curve(qhist):
    """Sum of the Q-table per episode; flattens as the agent converges."""
    return qhist.sum(axis=(1, 2))


def tail_variation(curve, frac=0.2):
    """Spread of the final ``frac`` of a curve, relative to its full range.

    A curve that has settled shows a small tail spread compared with the
    distance it travelled overall; a value near 1 means the curve is still
    moving as much at the end as it did in total.
    """
    full = np.asarray(curve, dtype=float)
    tail = full[-max(1, int(len(full) * frac)):]
    span = max(1e-9, float(full.max() - full.min()))
    return float((tail.max() - tail.min()) / span)


def q_table_csv(path, q, model_ids=None, stamp=None):
    """Write a Q-table with labeled state rows and action columns."""
    n = q.shape[0]
    ids = list(model_ids) if model_ids else ["c%d" % i for i in range(n)]
    with open(path, "w", newline="") as fh:
        if stamp:
            fh.write("# generated: %s\n" % stamp)
        w = csv.writer(fh)
        w.writerow(["state"] + ids)
        for i in range(n):
            w.writerow([ids[i]] + [repr(float(v)) for v in q[i]])
    log.debug("wrote %dx%d Q-table to %s", n, n, path)

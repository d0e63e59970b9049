"""Moving-window dynamic model selection over a forecast matrix.

Every ``horizon`` steps a fresh agent is trained on the trailing ``window``
steps of per-model APEs, restricted to the ``top_k`` models with the best
window-mean APE.  The agent's greedy policy then picks the dispatch model for
the next ``horizon`` steps; the walk state chains across agent blocks when
the previously selected model stays in the candidate set.
"""

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .pool.pool import ForecastMatrix
from .qlearn import (AgentConfig, apply_policy, convergence_curve,
                     rank_matrix, train_agent)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WindowConfig:
    window: int = 72
    horizon: int = 4
    top_k: int = 4
    agent: AgentConfig = field(default_factory=AgentConfig)

    def __post_init__(self):
        if self.window < 2:
            raise ConfigError("window must be >= 2, got %d" % self.window)
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1, got %d" % self.horizon)
        if self.top_k < 2:
            raise ConfigError("top_k must be >= 2, got %d" % self.top_k)


def preselect(apes_window, top_k):
    """Indices of the ``top_k`` models with the lowest window-mean APE,
    best first; ties keep the lower model index."""
    means = np.mean(apes_window, axis=0)
    return np.argsort(means, kind='stable')[:top_k].astype(np.int64)


@dataclass
class AgentRecord:
    start_step: int
    candidates: np.ndarray
    s0: int
    start_state: int
    q: np.ndarray = field(repr=False)
    max_abs_q: float
    curve: np.ndarray = field(repr=False, default=None)


@dataclass
class DmsResult:
    timestamps: np.ndarray
    selected: np.ndarray
    realized_rank: np.ndarray
    agent_index: np.ndarray
    dms_pred: np.ndarray
    y: np.ndarray
    model_ids: list
    agents: list
    config: WindowConfig

    def __len__(self):
        return len(self.selected)

    @property
    def n_agents(self):
        return len(self.agents)

    @property
    def max_abs_q(self):
        return max(a.max_abs_q for a in self.agents)

    @property
    def selected_ids(self):
        return [self.model_ids[i] for i in self.selected]


def run_dms(fmat, config=None, base_seed=0, warmup=None):
    """Walk a forecast matrix; returns per-step selections past the warmup.

    The first ``warmup`` steps (default: one window) provide trailing history
    only and receive no selections.
    """
    config = config or WindowConfig()
    R, P = config.window, config.horizon
    warmup = R if warmup is None else warmup
    if warmup < R:
        raise ConfigError("warmup (%d) is shorter than the window (%d)"
                          % (warmup, R))
    T = len(fmat)
    n_dms = T - warmup
    if n_dms < 1:
        raise ConfigError("forecast matrix has no steps past the warmup")
    if config.top_k > fmat.n_models:
        raise ConfigError("top_k (%d) exceeds pool size (%d)"
                          % (config.top_k, fmat.n_models))

    apes = fmat.ape()
    n_agents = math.ceil(n_dms / P)
    children = np.random.SeedSequence(base_seed).spawn(n_agents)

    selected = np.empty(n_dms, dtype=np.int64)
    agent_index = np.empty(n_dms, dtype=np.int64)
    agents = []
    prev_global = -1
    for k in range(n_agents):
        t0 = warmup + k * P
        win = apes[t0 - R:t0]
        cand = preselect(win, config.top_k)
        agent = train_agent(win[:, cand], config.agent,
                            np.random.default_rng(children[k]))
        # The walk enters this block from the model it last dispatched; when
        # that model fell out of the candidate set (or on the very first
        # block) it restarts from the window's rank-1 candidate.
        pos = np.nonzero(cand == prev_global)[0]
        start = int(pos[0]) if len(pos) else 0
        n_steps = min(P, T - t0)
        path = apply_policy(agent, start, n_steps)
        selected[t0 - warmup:t0 - warmup + n_steps] = cand[path]
        agent_index[t0 - warmup:t0 - warmup + n_steps] = k
        prev_global = int(cand[path[-1]])
        agents.append(AgentRecord(start_step=t0, candidates=cand,
                                  s0=agent.s0, start_state=start,
                                  q=agent.q, max_abs_q=agent.max_abs_q,
                                  curve=convergence_curve(agent.qhist)))

    idx = np.arange(warmup, T)
    dms_pred = fmat.preds[idx, selected]
    realized = rank_matrix(apes[warmup:])[np.arange(n_dms), selected]
    log.info("dms: %d agents over %d steps (%d models, top %d per window)",
             n_agents, n_dms, fmat.n_models, config.top_k)
    return DmsResult(timestamps=fmat.timestamps[warmup:], selected=selected,
                     realized_rank=realized, agent_index=agent_index,
                     dms_pred=dms_pred, y=fmat.y[warmup:],
                     model_ids=list(fmat.model_ids), agents=agents,
                     config=config)


def stitched_forecasts(pool, fm_prev, fm_eval, window):
    """Forecast matrix over the evaluation rows plus a trailing-history
    prefix taken from the end of ``fm_prev`` (usually the validation split),
    so the first evaluation step already has a full training window."""
    if len(fm_prev) < window:
        raise DataError("need %d trailing history rows, have %d"
                        % (window, len(fm_prev)))
    X = np.vstack((fm_prev.X[-window:], fm_eval.X))
    y = np.concatenate((fm_prev.y[-window:], fm_eval.y))
    ts = np.concatenate((fm_prev.timestamps[-window:], fm_eval.timestamps))
    return ForecastMatrix(preds=pool.predict_matrix(X), y=y, timestamps=ts,
                          model_ids=pool.model_ids)


def selections_csv(path, result, stamp=None):
    """Write the per-step dispatch log.

    ``candidates`` lists the agent's preselected models best-first, joined
    with ``|``; ``realized_rank`` is the chosen model's rank among all pool
    models at that step, known only in hindsight.
    """
    with open(path, "w", newline="") as fh:
        if stamp:
            fh.write("# generated: %s\n" % stamp)
        w = csv.writer(fh)
        w.writerow(["timestamp", "chosen_model", "realized_rank", "forecast",
                    "actual", "candidates", "agent_index"])
        ts = np.datetime_as_string(result.timestamps, unit="s")
        cand_strs = ["|".join(result.model_ids[m] for m in rec.candidates)
                     for rec in result.agents]
        for i in range(len(result)):
            k = int(result.agent_index[i])
            w.writerow([ts[i], result.model_ids[result.selected[i]],
                        int(result.realized_rank[i]),
                        repr(float(result.dms_pred[i])),
                        repr(float(result.y[i])), cand_strs[k], k])
    log.info("wrote %d selections to %s", len(result), path)


def dms_forecast_csv(path, result, stamp=None):
    """Write the one-model-per-step forecast series produced by the walk."""
    with open(path, "w", newline="") as fh:
        if stamp:
            fh.write("# generated: %s\n" % stamp)
        w = csv.writer(fh)
        w.writerow(["timestamp", "forecast", "actual"])
        ts = np.datetime_as_string(result.timestamps, unit="s")
        for i in range(len(result)):
            w.writerow([ts[i], repr(float(result.dms_pred[i])),
                        repr(float(result.y[i]))])
    log.info("wrote %d dms forecasts to %s", len(result), path)


def learning_curves_csv(path, result, stamp=None):
    """Write every agent's per-episode Q-sum curve in long form."""
    with open(path, "w", newline="") as fh:
        if stamp:
            fh.write("# generated: %s\n" % stamp)
        w = csv.writer(fh)
        w.writerow(["agent_index", "episode", "q_sum"])
        for k, rec in enumerate(result.agents):
            for e, v in enumerate(rec.curve):
                w.writerow([k, e + 1, repr(float(v))])
    log.info("wrote %d learning curves to %s", len(result.agents), path)

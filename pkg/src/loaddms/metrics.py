"""Forecast accuracy metrics and the evaluation report."""

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .qlearn import rank_matrix

log = logging.getLogger(__name__)


def ape(y, pred):
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise DataError("APE needs positive actuals")
    return 100.0 * np.abs(np.asarray(pred, dtype=float) - y) / y


def mape(y, pred):
    return float(np.mean(ape(y, pred)))


def nmae(y, pred, capacity=None):
    """Mean absolute error as a share of capacity (default: peak actual)."""
    y = np.asarray(y, dtype=float)
    cap = float(np.max(y)) if capacity is None else float(capacity)
    if cap <= 0:
        raise DataError("capacity must be positive")
    return float(100.0 * np.mean(np.abs(np.asarray(pred) - y)) / cap)


def improvement(base, new):
    """Relative error reduction in percent; positive when ``new`` is lower."""
    if base == 0:
        raise DataError("baseline metric is zero")
    return float(100.0 * (base - new) / base)


def rank_distribution(apes, selected=None):
    """Count how often each model attains each per-step rank.

    Returns an (N, N) count matrix (rows: models, columns: rank 1..N), or
    (N + 1, N) with a trailing row for the selection sequence ``selected``
    when given: that row counts the rank held by the selected model.
    """
    apes = np.asarray(apes, dtype=float)
    T, N = apes.shape
    ranks = rank_matrix(apes)
    counts = np.zeros((N + (selected is not None), N), dtype=np.int64)
    for m in range(N):
        counts[m] = np.bincount(ranks[:, m] - 1, minlength=N)
    if selected is not None:
        sel_rank = ranks[np.arange(T), np.asarray(selected)]
        counts[N] = np.bincount(sel_rank - 1, minlength=N)
    return counts


def top_share(apes, selected, k):
    """Share of steps where the selected model ranks within the step's top k."""
    apes = np.asarray(apes, dtype=float)
    selected = np.asarray(selected)
    ranks = rank_matrix(apes)
    sel_rank = ranks[np.arange(len(selected)), selected]
    return float(np.mean(sel_rank <= k))


@dataclass
class EvalReport:
    model_ids: list
    model_mape: np.ndarray
    model_nmae: np.ndarray
    dms_mape: float
    dms_nmae: float
    top_k: int
    top_k_share: float
    n_steps: int
    n_agents: int
    capacity: float = 0.0
    rank_counts: np.ndarray = field(repr=False, default=None)

    @property
    def improvement_mape(self):
        return np.array([improvement(m, self.dms_mape)
                         for m in self.model_mape])

    @property
    def improvement_nmae(self):
        return np.array([improvement(m, self.dms_nmae)
                         for m in self.model_nmae])

    def to_text(self):
        lines = []
        lines.append("%-8s %10s %10s %12s %12s"
                     % ("model", "mape_pct", "nmae_pct", "impr_mape", "impr_nmae"))
        im, inm = self.improvement_mape, self.improvement_nmae
        for i, mid in enumerate(self.model_ids):
            lines.append("%-8s %10.2f %10.2f %12.2f %12.2f"
                         % (mid, self.model_mape[i], self.model_nmae[i],
                            im[i], inm[i]))
        lines.append("%-8s %10.2f %10.2f %12s %12s"
                     % ("DMS", self.dms_mape, self.dms_nmae, "NA", "NA"))
        lines.append("")
        lines.append("steps evaluated       %d" % self.n_steps)
        lines.append("selection agents      %d" % self.n_agents)
        lines.append("capacity for nmae     %.3f" % self.capacity)
        lines.append("top-%d selection share %.2f%%"
                     % (self.top_k, 100.0 * self.top_k_share))
        return "\n".join(lines) + "\n"

    def to_csv(self, path, stamp=None):
        with open(path, "w", newline="") as fh:
            if stamp:
                fh.write("# generated: %s\n" % stamp)
            w = csv.writer(fh)
            w.writerow(["model", "mape_pct", "nmae_pct",
                        "improvement_mape_pct", "improvement_nmae_pct"])
            im, inm = self.improvement_mape, self.improvement_nmae
            for i, mid in enumerate(self.model_ids):
                w.writerow([mid, "%.2f" % self.model_mape[i],
                            "%.2f" % self.model_nmae[i],
                            "%.2f" % im[i], "%.2f" % inm[i]])
            w.writerow(["DMS", "%.2f" % self.dms_mape,
                        "%.2f" % self.dms_nmae, "NA", "NA"])
        log.info("wrote evaluation table to %s", path)


def rank_counts_csv(path, counts, model_ids, stamp=None):
    """Write the rank count matrix; a trailing DMS row is labeled as such."""
    n_ranks = counts.shape[1]
    labels = list(model_ids)
    if counts.shape[0] == len(labels) + 1:
        labels.append("DMS")
    with open(path, "w", newline="") as fh:
        if stamp:
            fh.write("# generated: %s\n" % stamp)
        w = csv.writer(fh)
        w.writerow(["model"] + ["rank_%d" % r for r in range(1, n_ranks + 1)])
        for label, row in zip(labels, counts):
            w.writerow([label] + [int(c) for c in row])
    log.info("wrote rank counts to %s", path)


def evaluate_run(fmat, dms_result, capacity=None):
    """Score every pool model and the DMS walk on the DMS steps."""
    offset = len(fmat) - len(dms_result)
    if offset < 0:
        raise DataError("selection log longer than forecast matrix")
    y = fmat.y[offset:]
    preds = fmat.preds[offset:]
    apes = 100.0 * np.abs(preds - y[:, None]) / y[:, None]

    cap = float(np.max(y)) if capacity is None else float(capacity)
    model_mape = np.array([mape(y, preds[:, j])
                           for j in range(preds.shape[1])])
    model_nmae = np.array([nmae(y, preds[:, j], cap)
                           for j in range(preds.shape[1])])
    k = dms_result.config.top_k
    return EvalReport(
        model_ids=list(fmat.model_ids),
        model_mape=model_mape,
        model_nmae=model_nmae,
        dms_mape=mape(dms_result.y, dms_result.dms_pred),
        dms_nmae=nmae(dms_result.y, dms_result.dms_pred, cap),
        top_k=k,
        top_k_share=top_share(apes, dms_result.selected, k),
        n_steps=len(dms_result),
        n_agents=dms_result.n_agents,
        capacity=cap,
        rank_counts=rank_distribution(apes, dms_result.selected),
    )

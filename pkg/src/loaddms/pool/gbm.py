"""Gradient boosted regression trees with three loss functions.

Each stage fits a shallow CART tree to the pseudo-residuals (the negative
loss gradient w.r.t. the current fit), refits leaf values with the
loss-appropriate location estimate, and adds the shrunken tree to the
ensemble.  The stage count is picked by validation error.

Losses: squared error, absolute error (Laplace), and a Student-t negative
log-likelihood with nu = 4 whose bounded influence function damps spikes.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError
from .tree import build_tree

log = logging.getLogger(__name__)

LOSS_NAMES = ("squared", "laplace", "t4")

T_NU = 4.0
DEFAULT_STAGES = 500
DEFAULT_SHRINKAGE = 0.1
DEFAULT_DEPTH = 3
DEFAULT_MIN_LEAF = 20
PATIENCE = 30
_NEWTON_DEN_FLOOR = 1e-8


def loss_value(name, y, F):
    r = y - F
    if name == "squared":
        return 0.5 * r ** 2
    if name == "laplace":
        return np.abs(r)
    if name == "t4":
        return 0.5 * (T_NU + 1.0) * np.log1p(r ** 2 / T_NU)
    raise TrainingError("unknown GBM loss %r" % (name,))


def pseudo_residuals(name, y, F):
    """Negative gradient of the pointwise loss w.r.t. the current fit F."""
    r = y - F
    if name == "squared":
        return r
    if name == "laplace":
        return np.sign(r)
    if name == "t4":
        return (T_NU + 1.0) * r / (T_NU + r ** 2)
    raise TrainingError("unknown GBM loss %r" % (name,))


def _t4_curvature(r):
    return (T_NU + 1.0) * (T_NU - r ** 2) / (T_NU + r ** 2) ** 2


def _refit_leaves(tree, leaf_of_sample, resid, name):
    if name == "squared":
        return
    for lid in np.unique(leaf_of_sample):
        r = resid[leaf_of_sample == lid]
        if name == "laplace":
            tree.value[lid] = np.median(r)
        else:
            den = float(np.sum(_t4_curvature(r)))
            if den <= _NEWTON_DEN_FLOOR:
                tree.value[lid] = np.median(r)
            else:
                num = float(np.sum(pseudo_residuals("t4", r, 0.0)))
                tree.value[lid] = np.clip(num / den, r.min(), r.max())


@dataclass
class GbmModel:
    loss: str
    f0: float
    shrinkage: float
    trees: list
    y_mean: float
    y_std: float
    val_curve: np.ndarray = field(repr=False, default=None)

    @property
    def n_stages(self):
        return len(self.trees)

    def predict(self, Xs):
        F = np.full(len(Xs), self.f0)
        for tree in self.trees:
            F += self.shrinkage * tree.predict(Xs)
        return F * self.y_std + self.y_mean


def train_gbm(Xs_train, y_train, Xs_val, y_val, loss, seed=None,
              n_stages=DEFAULT_STAGES, shrinkage=DEFAULT_SHRINKAGE,
              max_depth=DEFAULT_DEPTH, min_leaf=DEFAULT_MIN_LEAF,
              patience=PATIENCE):
    """Boost on standardized targets; keeps the validation-best stage count."""
    if loss not in LOSS_NAMES:
        raise TrainingError("unknown GBM loss %r" % (loss,))
    Xs_train = np.ascontiguousarray(Xs_train, dtype=float)
    Xs_val = np.ascontiguousarray(Xs_val, dtype=float)

    y_mean = float(np.mean(y_train))
    y_std = float(np.std(y_train)) or 1.0
    ys = (y_train - y_mean) / y_std
    yv = (y_val - y_mean) / y_std

    f0 = float(np.mean(ys)) if loss == "squared" else float(np.median(ys))
    F = np.full(len(ys), f0)
    Fv = np.full(len(yv), f0)
    rows = np.arange(len(ys), dtype=np.int64)

    trees = []
    val_curve = np.empty(n_stages)
    best_val = np.inf
    best_stage = 0
    for stage in range(n_stages):
        resid = ys - F
        target = pseudo_residuals(loss, ys, F)
        tree, leaf_of = build_tree(Xs_train, target, rows, max_depth,
                                   min_leaf)
        _refit_leaves(tree, leaf_of, resid, loss)
        trees.append(tree)
        F += shrinkage * tree.predict(Xs_train)
        Fv += shrinkage * tree.predict(Xs_val)
        val = float(np.mean(loss_value(loss, yv, Fv)))
        val_curve[stage] = val
        if val < best_val - 1e-12:
            best_val = val
            best_stage = stage + 1
        elif stage + 1 - best_stage >= patience:
            break
    n_used = len(trees)
    log.info("gbm/%s stopped after %d stages, kept %d (val loss %.5f)",
             loss, n_used, best_stage, best_val)
    return GbmModel(loss=loss, f0=f0, shrinkage=shrinkage,
                    trees=trees[:best_stage], y_mean=y_mean, y_std=y_std,
                    val_curve=val_curve[:n_used].copy())

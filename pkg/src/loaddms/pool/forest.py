"""Random forest regressor: bagged CART trees with per-split feature draws."""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .tree import build_tree, draw_feature_subsets, node_capacity

log = logging.getLogger(__name__)

DEFAULT_N_TREES = 200
DEFAULT_MIN_LEAF = 3
DEFAULT_MAX_DEPTH = 25


@dataclass
class ForestModel:
    trees: list

    @property
    def n_trees(self):
        return len(self.trees)

    def predict(self, Xs):
        Xs = np.ascontiguousarray(Xs, dtype=float)
        acc = np.zeros(len(Xs))
        for tree in self.trees:
            acc += tree.predict(Xs)
        return acc / len(self.trees)


def train_forest(Xs_train, y_train, Xs_val=None, y_val=None, seed=0,
                 n_trees=DEFAULT_N_TREES, min_leaf=DEFAULT_MIN_LEAF,
                 max_depth=DEFAULT_MAX_DEPTH, n_split_features=None):
    """Bootstrap-aggregate regression trees on the raw target scale.

    Each split considers ceil(d / 3) randomly drawn features unless
    ``n_split_features`` overrides it.  The validation arguments are accepted
    for interface symmetry; bagging needs no tuning pass here.
    """
    Xs_train = np.ascontiguousarray(Xs_train, dtype=float)
    y_train = np.ascontiguousarray(y_train, dtype=float)
    n, d = Xs_train.shape
    k = n_split_features or math.ceil(d / 3)
    rng = np.random.default_rng(seed)
    capacity = node_capacity(n, max_depth, min_leaf)

    trees = []
    for _ in range(n_trees):
        boot = rng.integers(0, n, n).astype(np.int64)
        subsets = draw_feature_subsets(rng, capacity, d, k)
        tree, _ = build_tree(Xs_train, y_train, boot, max_depth, min_leaf,
                             feat_subsets=subsets)
        trees.append(tree)
    log.info("forest: %d trees, %d features per split, mean %d leaves",
             n_trees, k, int(np.mean([t.n_leaves for t in trees])))
    return ForestModel(trees=trees)

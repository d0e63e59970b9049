"""Flat-array CART regression trees shared by the GBM and forest models."""

from dataclasses import dataclass

import numpy as np

from .. import kernels


@dataclass
class FlatTree:
    """Regression tree stored as parallel node arrays.

    ``feature[i] < 0`` marks node i as a leaf whose prediction is
    ``value[i]``; otherwise rows with ``x[feature[i]] <= threshold[i]`` go to
    ``left[i]`` and the rest to ``right[i]``.  Node 0 is the root.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def n_leaves(self):
        return int(np.sum(self.feature < 0))

    def predict(self, X):
        out = np.empty(len(X))
        kernels.tree_predict(np.ascontiguousarray(X, dtype=np.float64),
                             self.feature, self.threshold, self.left,
                             self.right, self.value, out)
        return out


def node_capacity(n_rows, max_depth, min_leaf):
    cap = 2 * max(n_rows // max(min_leaf, 1), 1) + 3
    if max_depth < 30:
        cap = min(cap, 2 ** (max_depth + 1) - 1 + 2)
    return cap


def draw_feature_subsets(rng, capacity, n_features, k):
    """Pre-draw a sorted k-of-d feature subset for every potential node."""
    if k >= n_features:
        return np.tile(np.arange(n_features, dtype=np.int64), (capacity, 1))
    keys = rng.random((capacity, n_features))
    picks = np.argsort(keys, axis=1, kind='stable')[:, :k]
    return np.ascontiguousarray(np.sort(picks, axis=1).astype(np.int64))


def build_tree(X, y, rows, max_depth, min_leaf, feat_subsets=None):
    """Fit one tree on X[rows], y[rows]; returns (tree, leaf_of_sample).

    ``leaf_of_sample[j]`` is the leaf node id that training sample j landed
    in, for samples referenced by ``rows`` (used for GBM leaf refits).  When
    ``feat_subsets`` is None every split scans all features.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    capacity = node_capacity(len(rows), max_depth, min_leaf)
    if feat_subsets is None:
        feat_subsets = np.tile(np.arange(X.shape[1], dtype=np.int64),
                               (capacity, 1))
    elif len(feat_subsets) < capacity:
        raise ValueError("feature subset table smaller than node capacity")

    feature = np.empty(capacity, np.int64)
    threshold = np.empty(capacity, np.float64)
    left = np.empty(capacity, np.int64)
    right = np.empty(capacity, np.int64)
    value = np.empty(capacity, np.float64)
    leaf_of_sample = np.full(len(y), -1, np.int64)

    n_nodes = kernels.tree_build(X, y, rows, max_depth, min_leaf,
                                 feat_subsets, feature, threshold, left,
                                 right, value, leaf_of_sample)
    tree = FlatTree(feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
                    left[:n_nodes].copy(), right[:n_nodes].copy(),
                    value[:n_nodes].copy())
    return tree, leaf_of_sample

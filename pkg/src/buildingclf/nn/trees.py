"""CART decision tree and random forest baselines.

Greedy Gini splits; the forest bootstrap-samples rows and draws a random
feature subset per split, predicting by majority vote. Impurity-based
importances accumulate the weighted Gini decrease per feature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidInputError
from .specs import ModelSpec


def _gini(counts: np.ndarray, n: int) -> float:
    if n == 0:
        return 0.0
    p = counts / n
    return 1.0 - float((p * p).sum())


def _best_split(X, y, n_classes, feat_idx):
    """Best (feature, threshold, decrease) over candidate features.

    Returns None when no split separates the node. Ties break toward the
    earlier feature in feat_idx, then the earlier threshold.
    """
    n = len(y)
    total = np.bincount(y, minlength=n_classes).astype(np.float64)
    parent_gini = _gini(total, n)
    best = None
    for f in feat_idx:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        cut = np.flatnonzero(xs[:-1] != xs[1:])
        if len(cut) == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        left = np.cumsum(onehot, axis=0)
        nl = np.arange(1, n + 1, dtype=np.float64)
        pl = left / nl[:, None]
        gini_l = 1.0 - (pl * pl).sum(axis=1)
        right = total - left
        nr = n - nl
        with np.errstate(invalid="ignore", divide="ignore"):
            pr = right / np.where(nr == 0, 1.0, nr)[:, None]
        gini_r = 1.0 - (pr * pr).sum(axis=1)
        weighted = (nl * gini_l + nr * gini_r) / n
        scores = weighted[cut]
        k = int(np.argmin(scores))
        decrease = parent_gini - float(scores[k])
        pos = int(cut[k])
        if decrease > 1e-12 and (best is None or decrease > best[2] + 1e-12):
            thr = 0.5 * (xs[pos] + xs[pos + 1])
            best = (int(f), float(thr), decrease)
    return best


@dataclass
class DecisionTree:
    max_depth: int
    n_classes: int
    max_features: int | None = None
    # flat node arrays: feature == -1 marks a leaf
    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    prediction: list[int] = field(default_factory=list)
    importances_: np.ndarray | None = None

    def _new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.prediction.append(0)
        return len(self.feature) - 1

    def fit(self, X, y, rng: np.random.Generator | None = None):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if len(X) == 0:
            raise InvalidInputError("cannot fit a tree on zero samples")
        self.importances_ = np.zeros(X.shape[1])
        n_total = len(y)
        stack = [(self._new_node(), np.arange(len(y)), 0)]
        while stack:
            node, idx, depth = stack.pop()
            counts = np.bincount(y[idx], minlength=self.n_classes)
            self.prediction[node] = int(np.argmax(counts))
            if depth >= self.max_depth or len(idx) < 2 or counts.max() == len(idx):
                continue
            if self.max_features is not None and rng is not None \
                    and self.max_features < X.shape[1]:
                feat_idx = np.sort(rng.choice(X.shape[1], self.max_features,
                                              replace=False))
            else:
                feat_idx = np.arange(X.shape[1])
            split = _best_split(X[idx], y[idx], self.n_classes, feat_idx)
            if split is None:
                continue
            f, thr, decrease = split
            self.feature[node] = f
            self.threshold[node] = thr
            self.importances_[f] += (len(idx) / n_total) * decrease
            go_left = X[idx, f] <= thr
            l, r = self._new_node(), self._new_node()
            self.left[node], self.right[node] = l, r
            stack.append((l, idx[go_left], depth + 1))
            stack.append((r, idx[~go_left], depth + 1))
        return self

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.zeros(len(X), dtype=np.int64)
        idx = np.arange(len(X))
        stack = [(0, idx)]
        while stack:
            node, rows = stack.pop()
            if len(rows) == 0:
                continue
            if self.feature[node] == -1:
                out[rows] = self.prediction[node]
                continue
            go_left = X[rows, self.feature[node]] <= self.threshold[node]
            stack.append((self.left[node], rows[go_left]))
            stack.append((self.right[node], rows[~go_left]))
        return out

    def normalized_importances(self) -> np.ndarray:
        total = self.importances_.sum()
        return self.importances_ / total if total > 0 else self.importances_


@dataclass
class RandomForest:
    n_trees: int
    max_depth: int
    n_classes: int
    max_features: int | None
    bootstrap: bool = True
    trees: list[DecisionTree] = field(default_factory=list)
    importances_: np.ndarray | None = None

    def fit(self, X, y, seed: int = 0):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        self.trees = []
        self.importances_ = np.zeros(X.shape[1])
        for t in range(self.n_trees):
            rng = np.random.default_rng([seed, t])
            if self.bootstrap:
                rows = rng.integers(0, len(y), len(y))
            else:
                rows = np.arange(len(y))
            tree = DecisionTree(self.max_depth, self.n_classes,
                                self.max_features)
            tree.fit(X[rows], y[rows], rng=rng)
            self.trees.append(tree)
            self.importances_ += tree.importances_
        total = self.importances_.sum()
        if total > 0:
            self.importances_ /= total
        return self

    def predict(self, X) -> np.ndarray:
        votes = np.zeros((len(X), self.n_classes), dtype=np.int64)
        for tree in self.trees:
            pred = tree.predict(X)
            votes[np.arange(len(X)), pred] += 1
        return votes.argmax(axis=1)


def tree_fit(features, labels, spec: ModelSpec) -> DecisionTree:
    tree = DecisionTree(spec.max_depth, spec.n_classes)
    return tree.fit(features, labels)


def forest_fit(features, labels, spec: ModelSpec, seed: int = 0) -> RandomForest:
    forest = RandomForest(spec.n_trees, spec.max_depth, spec.n_classes,
                          spec.max_features)
    return forest.fit(features, labels, seed=seed)


def predict(model, features) -> np.ndarray:
    return model.predict(features)

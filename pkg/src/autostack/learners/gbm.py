"""Gradient boosting on the log-odds scale with Newton leaf values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..frame import Frame
from ..metrics import clip_probabilities, log_loss
from .base import TrainedModel, logit, sigmoid, training_arrays
from .space import GBM, ModelConfig
from .trees import Tree, grow, presort

DEFAULTS = {"n_trees": 50, "learning_rate": 0.1, "max_depth": 5, "row_subsample": 1.0, "min_rows": 10}


@dataclass(frozen=True)
class BoostedParams:
    init_score: float
    trees: tuple[Tree, ...]

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        score = np.full(X.shape[0], self.init_score)
        for tree in self.trees:
            score += tree.predict(X)
        return score

    def predict(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.decision(X))


def newton_leaf_values(leaf_of_row, resid, hess, n_nodes: int) -> np.ndarray:
    """Per-node ``sum(resid) / sum(hess)`` over in-sample rows (``leaf_of_row >= 0``)."""
    inside = leaf_of_row >= 0
    leaves = leaf_of_row[inside]
    num = np.bincount(leaves, weights=resid[inside], minlength=n_nodes)
    den = np.bincount(leaves, weights=hess[inside], minlength=n_nodes)
    return np.divide(num, den, out=np.zeros(n_nodes), where=den > 1e-300)


def train_gbm(train: Frame, config: ModelConfig, *, trace: list | None = None) -> TrainedModel:
    """Fit a boosted tree ensemble to binomial deviance.

    When ``trace`` is a list, the training log loss after each stage is
    appended to it (index 0 is the initial constant model).
    """
    X, y = training_arrays(train)
    n = X.shape[0]
    if n == 0:
        raise DataError("cannot train a boosting model on an empty frame")
    hp = {**DEFAULTS, **config.params}
    n_trees = int(hp["n_trees"])
    rate = float(hp["learning_rate"])
    subsample = float(hp["row_subsample"])
    n_sub = max(1, int(round(subsample * n)))

    init = float(logit(clip_probabilities(y.mean())))
    score = np.full(n, init)
    rng = np.random.default_rng(config.seed)
    order = presort(X)
    if trace is not None:
        trace.append(log_loss(y, sigmoid(score)))

    trees = []
    for _ in range(n_trees):
        if n_sub < n:
            weight = np.zeros(n)
            weight[rng.choice(n, size=n_sub, replace=False)] = 1.0
        else:
            weight = np.ones(n)
        prob = sigmoid(score)
        resid = y - prob
        feature, threshold, left, right, _, _, leaf_of_row = grow(
            X, resid, weight, max_depth=int(hp["max_depth"]), min_rows=float(hp["min_rows"]),
            order=order,
        )
        value = rate * newton_leaf_values(leaf_of_row, resid, prob * (1 - prob), len(feature))
        tree = Tree(feature, threshold, left, right, value)
        trees.append(tree)
        score = score + tree.predict(X)
        if trace is not None:
            trace.append(log_loss(y, sigmoid(score)))

    loss = log_loss(y, sigmoid(score))
    return TrainedModel(GBM, config, train.feature_names, BoostedParams(init, tuple(trees)), n_trees, loss)

"""Random forest of bootstrap CART trees with per-split feature sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError
from ..frame import Frame
from ..metrics import log_loss
from .base import TrainedModel, training_arrays
from .space import RF, ModelConfig
from .trees import Tree, grow, presort

DEFAULTS = {"n_trees": 50, "max_depth": 20, "min_rows": 1, "mtry_fraction": 1.0}


@dataclass(frozen=True)
class ForestParams:
    trees: tuple[Tree, ...]

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict(X)
        return total / len(self.trees)


def n_split_features(mtry_fraction: float, n_features: int) -> int:
    return max(1, math.ceil(mtry_fraction * n_features)) if n_features else 0


def train_random_forest(train: Frame, config: ModelConfig) -> TrainedModel:
    """Each tree sees a bootstrap resample; leaves hold the positive fraction of
    the resampled rows that reach them."""
    X, y = training_arrays(train)
    n, p = X.shape
    if n == 0:
        raise DataError("cannot train a random forest on an empty frame")
    hp = {**DEFAULTS, **config.params}
    n_trees = int(hp["n_trees"])
    if n_trees < 1:
        raise DataError("a random forest needs at least one tree")
    n_try = n_split_features(float(hp["mtry_fraction"]), p)

    rng = np.random.default_rng(config.seed)
    order = presort(X)
    trees = []
    for _ in range(n_trees):
        counts = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.float64)
        tree_seed = int(rng.integers(2**32))
        feature, threshold, left, right, node_w, node_s, _ = grow(
            X, y, counts, max_depth=int(hp["max_depth"]), min_rows=float(hp["min_rows"]),
            n_try=n_try, seed=tree_seed, order=order,
        )
        value = np.divide(node_s, node_w, out=np.zeros_like(node_s), where=node_w > 0)
        trees.append(Tree(feature, threshold, left, right, value))

    params = ForestParams(tuple(trees))
    loss = log_loss(y, params.predict(X))
    return TrainedModel(RF, config, train.feature_names, params, n_trees, loss)

"""Feed-forward ReLU network with a sigmoid output, trained by momentum SGD."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, TrainingError
from ..frame import Frame
from ..metrics import log_loss
from .base import TrainedModel, sigmoid, standardizer, training_arrays
from .space import DL, ModelConfig

BATCH_SIZE = 64
MOMENTUM = 0.9
DEFAULTS = {"hidden_layers": 2, "units": 64, "epochs": 20, "learning_rate": 0.01, "dropout": 0.0}


def init_layers(sizes: list[int], rng: np.random.Generator) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """He-normal hidden weights, Glorot-scaled output weights, zero biases."""
    weights, biases = [], []
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        last = i == len(sizes) - 2
        std = np.sqrt((1.0 if last else 2.0) / max(fan_in, 1))
        weights.append(rng.normal(0.0, std, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(weights, biases, X, masks=None):
    """Return the output logits and the cached activations for backprop."""
    acts = [X]
    pre = []
    a = X
    for layer, (W, b) in enumerate(zip(weights[:-1], biases[:-1])):
        z = a @ W + b
        pre.append(z)
        a = np.maximum(z, 0.0)
        if masks is not None:
            a = a * masks[layer]
        acts.append(a)
    logits = (a @ weights[-1] + biases[-1])[:, 0]
    return logits, acts, pre


def loss_and_gradients(weights, biases, X, y, masks=None):
    """Mean binary cross-entropy and its gradient for every layer.

    ``masks`` are the (already rescaled) dropout multipliers per hidden
    layer; ``None`` evaluates the network deterministically.
    """
    logits, acts, pre = forward(weights, biases, X, masks)
    n = max(len(y), 1)
    loss = float(np.sum(np.logaddexp(0.0, logits) - y * logits) / n)
    delta = ((sigmoid(logits) - y) / n)[:, None]
    grad_w = [None] * len(weights)
    grad_b = [None] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = acts[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer == 0:
            break
        delta = delta @ weights[layer].T
        if masks is not None:
            delta = delta * masks[layer - 1]
        delta = delta * (pre[layer - 1] > 0)
    return loss, grad_w, grad_b


@dataclass(frozen=True)
class NetworkParams:
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    mean: np.ndarray
    scale: np.ndarray

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [W.shape[1] for W in self.weights]

    def predict(self, X: np.ndarray) -> np.ndarray:
        logits, _, _ = forward(self.weights, self.biases, (X - self.mean) / self.scale)
        return sigmoid(logits)


def train_neural_net(train: Frame, config: ModelConfig) -> TrainedModel:
    X, y = training_arrays(train)
    n, p = X.shape
    if n == 0:
        raise DataError("cannot train a network on an empty frame")
    hp = {**DEFAULTS, **config.params}
    depth = int(hp["hidden_layers"])
    units = int(hp["units"])
    epochs = int(hp["epochs"])
    rate = float(hp["learning_rate"])
    dropout = float(hp["dropout"])
    if not 0.0 <= dropout < 1.0:
        raise DataError(f"dropout must lie in [0, 1), got {dropout}")

    mean, scale = standardizer(X)
    Z = (X - mean) / scale
    rng = np.random.default_rng(config.seed)
    weights, biases = init_layers([p] + [units] * depth + [1], rng)
    vel_w = [np.zeros_like(W) for W in weights]
    vel_b = [np.zeros_like(b) for b in biases]
    keep = 1.0 - dropout

    for _ in range(epochs):
        perm = rng.permutation(n)
        for start in range(0, n, BATCH_SIZE):
            idx = perm[start:start + BATCH_SIZE]
            masks = None
            if dropout > 0 and depth > 0:
                masks = [(rng.random((len(idx), units)) < keep) / keep for _ in range(depth)]
            _, gw, gb = loss_and_gradients(weights, biases, Z[idx], y[idx], masks)
            for i in range(len(weights)):
                vel_w[i] = MOMENTUM * vel_w[i] - rate * gw[i]
                vel_b[i] = MOMENTUM * vel_b[i] - rate * gb[i]
                weights[i] = weights[i] + vel_w[i]
                biases[i] = biases[i] + vel_b[i]
        if not all(np.all(np.isfinite(W)) for W in weights):
            raise TrainingError(f"network weights diverged for {config.describe()}", config)

    params = NetworkParams(tuple(weights), tuple(biases), mean, scale)
    loss = log_loss(y, params.predict(X))
    return TrainedModel(DL, config, train.feature_names, params, epochs, loss)

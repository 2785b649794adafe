"""L2-penalised logistic regression fitted by damped Newton iterations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..frame import Frame
from .base import TrainedModel, sigmoid, standardizer, training_arrays
from .space import LR, ModelConfig

MAX_ITER = 1000
GRAD_TOL = 1e-6


def _with_intercept(X: np.ndarray) -> np.ndarray:
    return np.column_stack([np.ones(X.shape[0]), X])


def logistic_objective(theta, X, y, l2: float) -> float:
    """Mean negative log-likelihood plus ``l2 / 2 * ||coef||^2``.

    ``theta[0]`` is the unpenalised intercept.
    """
    z = _with_intercept(X) @ theta
    nll = np.mean(np.logaddexp(0.0, z) - y * z) if len(y) else 0.0
    return float(nll + 0.5 * l2 * np.dot(theta[1:], theta[1:]))


def logistic_gradient(theta, X, y, l2: float) -> np.ndarray:
    A = _with_intercept(X)
    resid = sigmoid(A @ theta) - y
    grad = A.T @ resid / max(len(y), 1)
    grad[1:] += l2 * theta[1:]
    return grad


def _hessian(theta, A, l2: float) -> np.ndarray:
    p = sigmoid(A @ theta)
    h = (A * (p * (1 - p))[:, None]).T @ A / max(A.shape[0], 1)
    h[np.diag_indices_from(h)] += np.r_[0.0, np.full(A.shape[1] - 1, l2)]
    return h


def fit_logistic(X, y, l2: float, *, max_iter: int = MAX_ITER, tol: float = GRAD_TOL):
    """Return ``(theta, iterations, final objective)`` for raw ``X``."""
    A = _with_intercept(X)
    theta = np.zeros(A.shape[1])
    f = logistic_objective(theta, X, y, l2)
    steps = 0
    for _ in range(max_iter):
        g = logistic_gradient(theta, X, y, l2)
        if np.linalg.norm(g) < tol:
            break
        H = _hessian(theta, A, l2)
        H[np.diag_indices_from(H)] += 1e-12
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, g, rcond=None)[0]
        t = 1.0
        decrease = 1e-4 * np.dot(g, step)
        while t >= 1e-10:
            cand = theta - t * step
            f_new = logistic_objective(cand, X, y, l2)
            if f_new <= f - t * decrease:
                break
            t *= 0.5
        else:
            # No sufficient decrease left at machine precision.
            break
        theta, f = cand, f_new
        steps += 1
    return theta, steps, f


@dataclass(frozen=True)
class LogisticParams:
    intercept: float
    coef: np.ndarray
    mean: np.ndarray
    scale: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.intercept + ((X - self.mean) / self.scale) @ self.coef)


def train_logistic(train: Frame, config: ModelConfig) -> TrainedModel:
    X, y = training_arrays(train)
    mean, scale = standardizer(X)
    Z = (X - mean) / scale
    l2 = float(config.get("l2_lambda", 0.0))
    theta, iterations, loss = fit_logistic(Z, y, l2)
    params = LogisticParams(float(theta[0]), theta[1:].copy(), mean, scale)
    return TrainedModel(LR, config, train.feature_names, params, iterations, loss)

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Protocol

import numpy as np
from scipy.special import expit

from ..errors import ColumnMismatchError, DataError
from ..frame import Frame
from ..metrics import clip_probabilities
from .space import ModelConfig


class FittedParams(Protocol):
    def predict(self, X: np.ndarray) -> np.ndarray:
        """Unclipped positive-class probabilities for a feature matrix."""


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """A fitted base classifier together with the config that produced it."""

    family: str
    config: ModelConfig
    feature_names: tuple[str, ...]
    params: Any
    iterations: int = 0
    final_loss: float = float("nan")
    model_id: str = ""

    @property
    def seed(self) -> int:
        return self.config.seed

    def named(self, model_id: str) -> TrainedModel:
        return TrainedModel(self.family, self.config, self.feature_names, self.params,
                            self.iterations, self.final_loss, model_id)

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        return clip_probabilities(self.params.predict(X))

    def predict_proba(self, frame: Frame) -> np.ndarray:
        if frame.feature_names != self.feature_names:
            raise ColumnMismatchError(
                f"model {self.model_id or self.family} was trained on {len(self.feature_names)} columns "
                f"that differ from the frame's {len(frame.feature_names)}"
            )
        return self.predict_matrix(design_matrix(frame))


def predict_proba(model, frame: Frame) -> np.ndarray:
    return model.predict_proba(frame)


def design_matrix(frame: Frame) -> np.ndarray:
    X = frame.feature_matrix()
    if not np.all(np.isfinite(X)):
        raise DataError("feature matrix contains non-finite values")
    return X


def training_arrays(frame: Frame) -> tuple[np.ndarray, np.ndarray]:
    return design_matrix(frame), frame.response.astype(np.float64)


def standardizer(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and scales; constant columns get scale 1."""
    if X.shape[0] == 0:
        return np.zeros(X.shape[1]), np.ones(X.shape[1])
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale < 1e-12] = 1.0
    return mean, scale


sigmoid = expit


def logit(p):
    p = clip_probabilities(p)
    return np.log(p) - np.log1p(-p)

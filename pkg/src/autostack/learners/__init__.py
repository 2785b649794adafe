"""Base-learner families and their hyperparameter spaces."""

from .base import TrainedModel, design_matrix, predict_proba
from .forest import train_random_forest
from .gbm import train_gbm
from .logistic import train_logistic
from .neural import train_neural_net
from .space import (
    DL,
    FAMILIES,
    GBM,
    LR,
    RF,
    Choice,
    FloatRange,
    HyperparameterSpace,
    IntRange,
    ModelConfig,
    default_space,
    enumerate_grid,
    load_space_overrides,
    parse_space_overrides,
    sample_config,
)

TRAINERS = {
    LR: train_logistic,
    RF: train_random_forest,
    GBM: train_gbm,
    DL: train_neural_net,
}


def train(config: ModelConfig, frame) -> TrainedModel:
    """Train the family named by ``config`` on an encoded frame."""
    return TRAINERS[config.family](frame, config)


__all__ = [
    "DL", "FAMILIES", "GBM", "LR", "RF", "TRAINERS",
    "Choice", "FloatRange", "HyperparameterSpace", "IntRange", "ModelConfig", "TrainedModel",
    "default_space", "design_matrix", "enumerate_grid", "load_space_overrides",
    "parse_space_overrides", "predict_proba", "sample_config", "train",
    "train_gbm", "train_logistic", "train_neural_net", "train_random_forest",
]

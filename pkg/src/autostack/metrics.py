"""AUC, accuracy, F1 and log loss for binary classifiers.

Scores at or above the threshold count as positive predictions.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import DataError

EPS = 1e-15
DEFAULT_THRESHOLD = 0.5

# Metric ids accepted wherever a ranking metric is chosen.
METRICS = ("auc", "accuracy", "f_score", "log_loss")
LOWER_IS_BETTER = frozenset({"log_loss"})


def clip_probabilities(p) -> np.ndarray:
    return np.clip(np.asarray(p, dtype=np.float64), EPS, 1.0 - EPS)


def _check(labels, scores):
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    if y.ndim != 1 or s.ndim != 1 or y.shape != s.shape:
        raise DataError(f"labels and scores must be 1-d of equal length, got {y.shape} and {s.shape}")
    if y.size and not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0 or 1")
    return y.astype(np.int8), s


def auc(labels, scores) -> float:
    """Mann-Whitney AUC; a tied positive/negative pair counts one half."""
    y, s = _check(labels, scores)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("AUC is undefined unless both classes are present")
    ranks = rankdata(s, method="average")
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def confusion(labels, scores, threshold: float = DEFAULT_THRESHOLD) -> tuple[int, int, int, int]:
    """Return ``(tp, fp, tn, fn)``."""
    y, s = _check(labels, scores)
    pred = s >= threshold
    pos = y == 1
    tp = int(np.count_nonzero(pred & pos))
    fp = int(np.count_nonzero(pred & ~pos))
    fn = int(np.count_nonzero(~pred & pos))
    tn = y.size - tp - fp - fn
    return tp, fp, tn, fn


def accuracy(labels, scores, threshold: float = DEFAULT_THRESHOLD) -> float:
    tp, fp, tn, fn = confusion(labels, scores, threshold)
    n = tp + fp + tn + fn
    if n == 0:
        raise DataError("accuracy of an empty prediction set is undefined")
    return (tp + tn) / n


def error_rate(labels, scores, threshold: float = DEFAULT_THRESHOLD) -> float:
    tp, fp, tn, fn = confusion(labels, scores, threshold)
    n = tp + fp + tn + fn
    if n == 0:
        raise DataError("error rate of an empty prediction set is undefined")
    return (fp + fn) / n


def f_score(labels, scores, threshold: float = DEFAULT_THRESHOLD) -> float:
    """F1 at ``threshold``; 0 when nothing is a true positive, an error when
    there are no positives at all, predicted or actual."""
    tp, fp, _, fn = confusion(labels, scores, threshold)
    if tp == 0:
        if fp == 0 and fn == 0:
            raise DataError("F-score is undefined with no actual and no predicted positives")
        return 0.0
    return 2.0 * tp / (2.0 * tp + fp + fn)


def log_loss(labels, scores) -> float:
    y, s = _check(labels, scores)
    if y.size == 0:
        raise DataError("log loss of an empty prediction set is undefined")
    p = clip_probabilities(s)
    return float(-np.mean(y * np.log(p) + (1 - y) * np.log1p(-p)))


@dataclass(frozen=True)
class MetricsReport:
    auc: float
    accuracy: float
    f_score: float
    log_loss: float
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value):
                raise DataError(f"metric {name} is not finite: {value}")

    def value(self, metric: str) -> float:
        if metric not in METRICS:
            raise KeyError(f"unknown metric {metric!r}; choose from {METRICS}")
        return getattr(self, metric)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def report(labels, scores, threshold: float = DEFAULT_THRESHOLD) -> MetricsReport:
    return MetricsReport(
        auc=auc(labels, scores),
        accuracy=accuracy(labels, scores, threshold),
        f_score=f_score(labels, scores, threshold),
        log_loss=log_loss(labels, scores),
        threshold=threshold,
    )


def evaluate(model, test, threshold: float = DEFAULT_THRESHOLD) -> MetricsReport:
    """Predict ``test`` with any object exposing ``predict_proba(frame)`` and score it."""
    return report(test.response, model.predict_proba(test), threshold)


def better(metric: str, a: float, b: float) -> bool:
    """True when ``a`` is strictly better than ``b`` under ``metric``."""
    return a < b if metric in LOWER_IS_BETTER else a > b


def sort_key(metric: str, value: float) -> float:
    """Ascending sort key that puts the best value first."""
    return value if metric in LOWER_IS_BETTER else -value

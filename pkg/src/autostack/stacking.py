"""Stacked generalisation over out-of-fold base-model predictions.

The meta-learner is a logistic regression on the logits of the base
probabilities with non-negative weights and a free, unpenalised
intercept. Working on logits puts the identity map (weight 1 on a single
model, intercept 0) inside the feasible set, so the ensemble can always
reproduce its best column.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError, DataError, TrainingError
from .frame import Frame
from .learners import FAMILIES, ModelConfig, TrainedModel, train
from .learners.base import logit, sigmoid
from .metrics import better, clip_probabilities, report
from .preprocess import FoldAssignment

SUBSET_CAP = 12


@dataclass(frozen=True, eq=False)
class MetaFrame:
    """Out-of-fold predictions, one column per base config.

    ``producer_fold[i, j]`` is the fold whose replica predicted entry
    ``(i, j)`` and ``replica_rows[(j, f)]`` the rows that replica was
    trained on, kept so fold hygiene can be audited after the fact.
    """

    matrix: np.ndarray
    response: np.ndarray
    model_ids: tuple[str, ...]
    folds: FoldAssignment
    producer_fold: np.ndarray
    replica_rows: dict = field(repr=False)

    @property
    def n_models(self) -> int:
        return self.matrix.shape[1]

    def columns(self, ids: Sequence[str]) -> np.ndarray:
        pos = [self.model_ids.index(i) for i in ids]
        return self.matrix[:, pos]

    def column(self, model_id: str) -> np.ndarray:
        return self.matrix[:, self.model_ids.index(model_id)]


@dataclass(frozen=True)
class OutOfFold:
    predictions: np.ndarray
    producer_fold: np.ndarray
    replica_rows: dict


def _fit_replica(config: ModelConfig, train_frame: Frame, folds: FoldAssignment, fold: int):
    rows = folds.train_rows(fold)
    held = folds.held_out_rows(fold)
    try:
        model = train(config, train_frame.take(rows))
        return rows, held, model.predict_proba(train_frame.take(held))
    except Exception as exc:
        raise TrainingError(f"replica for fold {fold} of {config.describe()} failed: {exc}", config) from exc


def out_of_fold(config: ModelConfig, train_frame: Frame, folds: FoldAssignment, *, workers: int = 1) -> OutOfFold:
    """Predict every row with a replica trained without that row's fold."""
    if folds.k < 2:
        raise ConfigError("out-of-fold prediction needs k >= 2")
    if len(folds.fold_of_row) != train_frame.n_rows:
        raise DataError("fold assignment does not match the frame's row count")
    jobs = range(folds.k)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda f: _fit_replica(config, train_frame, folds, f), jobs))
    else:
        results = [_fit_replica(config, train_frame, folds, f) for f in jobs]

    preds = np.empty(train_frame.n_rows)
    producer = np.full(train_frame.n_rows, -1, dtype=np.intp)
    replica_rows = {}
    for fold, (rows, held, p) in zip(jobs, results):
        preds[held] = p
        producer[held] = fold
        replica_rows[fold] = rows
    return OutOfFold(preds, producer, replica_rows)


def assemble_meta_frame(oofs: Sequence[OutOfFold], model_ids: Sequence[str], response, folds) -> MetaFrame:
    return MetaFrame(
        matrix=np.column_stack([o.predictions for o in oofs]) if oofs else np.empty((len(response), 0)),
        response=np.asarray(response),
        model_ids=tuple(model_ids),
        folds=folds,
        producer_fold=np.column_stack([o.producer_fold for o in oofs]) if oofs else np.empty((len(response), 0), int),
        replica_rows={(j, f): rows for j, o in enumerate(oofs) for f, rows in o.replica_rows.items()},
    )


def build_meta_features(configs: Sequence[ModelConfig], train_frame: Frame, folds: FoldAssignment,
                        *, model_ids: Sequence[str] | None = None, workers: int = 1) -> MetaFrame:
    if not configs:
        raise ConfigError("need at least one base config")
    if model_ids is None:
        model_ids = [f"{c.family}_{i + 1}" for i, c in enumerate(configs)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            oofs = list(pool.map(lambda c: out_of_fold(c, train_frame, folds), configs))
    else:
        oofs = [out_of_fold(c, train_frame, folds) for c in configs]
    return assemble_meta_frame(oofs, model_ids, train_frame.response, folds)


def audit_fold_hygiene(meta: MetaFrame) -> int:
    """Count meta entries whose producing replica saw that row in training."""
    bad = 0
    for (j, f), rows in meta.replica_rows.items():
        produced = np.flatnonzero(meta.producer_fold[:, j] == f)
        bad += np.intersect1d(produced, rows, assume_unique=True).size
    bad += int(np.count_nonzero(meta.producer_fold < 0))
    return bad


@dataclass(frozen=True)
class MetaLearner:
    intercept: float
    weights: np.ndarray

    def predict(self, probabilities: np.ndarray) -> np.ndarray:
        Z = logit(probabilities)
        return clip_probabilities(sigmoid(self.intercept + Z @ self.weights))


def fit_meta_learner(probabilities: np.ndarray, y) -> MetaLearner:
    """Maximum-likelihood logistic fit on logits with weights constrained >= 0."""
    Z = logit(np.asarray(probabilities, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    n, m = Z.shape
    A = np.column_stack([np.ones(n), Z])

    def objective(theta):
        z = A @ theta
        loss = np.mean(np.logaddexp(0.0, z) - y * z)
        grad = A.T @ (sigmoid(z) - y) / n
        return loss, grad

    start = np.zeros(m + 1)
    bounds = [(None, None)] + [(0.0, None)] * m
    res = minimize(objective, start, jac=True, method="L-BFGS-B", bounds=bounds,
                   options={"maxiter": 2000, "ftol": 1e-15, "gtol": 1e-10})
    return MetaLearner(float(res.x[0]), np.maximum(res.x[1:], 0.0))


def cv_meta_predictions(meta: MetaFrame, model_ids: Sequence[str] | None = None) -> np.ndarray:
    """Out-of-fold predictions of the meta-learner itself, on the meta frame's folds."""
    P = meta.matrix if model_ids is None else meta.columns(model_ids)
    out = np.empty(P.shape[0])
    for f in range(meta.folds.k):
        fit_rows = meta.folds.train_rows(f)
        held = meta.folds.held_out_rows(f)
        learner = fit_meta_learner(P[fit_rows], meta.response[fit_rows])
        out[held] = learner.predict(P[held])
    return out


@dataclass(frozen=True, eq=False)
class StackedModel:
    roster: tuple[TrainedModel, ...]
    meta: MetaLearner
    folds: FoldAssignment
    model_id: str = "StackedEnsemble"
    cv_predictions: np.ndarray | None = field(default=None, repr=False)
    subset_scores: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not self.roster:
            raise ConfigError("a stacked model needs at least one base model")
        if len(self.meta.weights) != len(self.roster):
            raise ConfigError("meta-learner arity does not match the roster")

    @property
    def roster_ids(self) -> tuple[str, ...]:
        return tuple(m.model_id for m in self.roster)

    def predict_proba(self, frame: Frame) -> np.ndarray:
        P = np.column_stack([m.predict_proba(frame) for m in self.roster])
        return self.meta.predict(P)


def predict_stacked(stacked: StackedModel, frame: Frame) -> np.ndarray:
    return stacked.predict_proba(frame)


def train_super_learner(meta: MetaFrame, roster_models: Sequence[TrainedModel], *,
                        model_id: str = "StackedEnsemble", with_cv: bool = True) -> StackedModel:
    """Fit the meta-learner on ``meta``; ``roster_models`` are the full-data base models
    matching ``meta``'s columns in order."""
    if meta.n_models != len(roster_models):
        raise ConfigError(f"meta frame has {meta.n_models} columns but roster has {len(roster_models)} models")
    learner = fit_meta_learner(meta.matrix, meta.response)
    cv = cv_meta_predictions(meta) if with_cv else None
    return StackedModel(tuple(roster_models), learner, meta.folds, model_id, cv)


def sub_meta(meta: MetaFrame, model_ids: Sequence[str]) -> MetaFrame:
    pos = [meta.model_ids.index(i) for i in model_ids]
    return MetaFrame(
        matrix=meta.matrix[:, pos],
        response=meta.response,
        model_ids=tuple(model_ids),
        folds=meta.folds,
        producer_fold=meta.producer_fold[:, pos],
        replica_rows={(new, f): meta.replica_rows[(old, f)]
                      for new, old in enumerate(pos) for f in range(meta.folds.k)},
    )


def best_of_family(models: Sequence[TrainedModel], scores: Sequence[float], metric: str = "auc") -> list[TrainedModel]:
    """Best model of each family under ``metric``; earlier models win ties."""
    if len(models) != len(scores):
        raise ConfigError("one score per model is required")
    if not np.all(np.isfinite(scores)):
        raise DataError("scores must be finite")
    best: dict[str, int] = {}
    for i, m in enumerate(models):
        j = best.get(m.family)
        if j is None or better(metric, scores[i], scores[j]):
            best[m.family] = i
    return [models[best[f]] for f in FAMILIES if f in best]


def score_subsets(meta: MetaFrame, metric: str = "auc") -> list[tuple[tuple[str, ...], float]]:
    """Cross-validated ``metric`` of a super learner on every non-empty column subset.

    Subsets come out ordered by size, then lexicographically by sorted id.
    """
    ids = sorted(meta.model_ids)
    out = []
    for size in range(1, len(ids) + 1):
        for subset in itertools.combinations(ids, size):
            preds = cv_meta_predictions(meta, subset)
            out.append((subset, report(meta.response, preds).value(metric)))
    return out


def best_subset_search(models: Sequence[TrainedModel], train_frame: Frame, folds: FoldAssignment,
                       metric: str = "auc", *, meta: MetaFrame | None = None,
                       model_id: str = "StackedEnsemble_BestSubset", workers: int = 1) -> StackedModel:
    """Try a super learner on every non-empty subset of ``models`` and keep the best.

    Ties go to the smaller subset, then the lexicographically smaller id
    tuple. ``meta`` may carry precomputed out-of-fold columns for the
    models (matched by model id); otherwise they are rebuilt from the
    models' configs.
    """
    if not 1 <= len(models) <= SUBSET_CAP:
        raise ConfigError(f"subset search takes 1 to {SUBSET_CAP} models, got {len(models)}")
    ids = [m.model_id for m in models]
    if len(set(ids)) != len(ids) or not all(ids):
        raise ConfigError("models need distinct, non-empty model ids")
    if meta is None:
        meta = build_meta_features([m.config for m in models], train_frame, folds, model_ids=ids, workers=workers)
    else:
        meta = sub_meta(meta, ids)

    scored = score_subsets(meta, metric)
    best_ids, best_score = scored[0]
    for subset, score in scored[1:]:
        if better(metric, score, best_score):
            best_ids, best_score = subset, score

    by_id = {m.model_id: m for m in models}
    chosen = sub_meta(meta, best_ids)
    stacked = train_super_learner(chosen, [by_id[i] for i in best_ids], model_id=model_id)
    return StackedModel(stacked.roster, stacked.meta, stacked.folds, model_id,
                        stacked.cv_predictions, tuple(scored))

"""Budgeted random search over the four families plus two super learners.

Candidates are drawn round-robin in the order LR, DL, GBM, RF. Each one
is cross-validated on the shared folds (its out-of-fold predictions double
as meta-features) and refitted on the full training frame. Once the
budget is spent, one super learner is fitted over every candidate and one
over the best candidate of each family, and everything is ranked on the
test frame.
"""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import BudgetError, ConfigError, DataError
from .frame import Frame, class_counts
from .learners import DL, GBM, LR, RF, HyperparameterSpace, TrainedModel, default_space, sample_config, train
from .metrics import METRICS, MetricsReport, report, sort_key
from .preprocess import DEFAULT_K, FoldAssignment, assign_folds
from .stacking import assemble_meta_frame, best_of_family, out_of_fold, sub_meta, train_super_learner

logger = logging.getLogger(__name__)

FAMILY_ORDER = (LR, DL, GBM, RF)
ALL_MODELS_ID = "StackedEnsemble_AllModels"
BEST_OF_FAMILY_ID = "StackedEnsemble_BestOfFamily"
ENSEMBLE = "StackedEnsemble"


@dataclass(frozen=True)
class Budget:
    max_models: int | None = None
    max_runtime_secs: float | None = None

    def __post_init__(self):
        if self.max_models is None and self.max_runtime_secs is None:
            raise BudgetError("set max_models, max_runtime_secs, or both")
        if self.max_models is not None and self.max_models < 1:
            raise BudgetError("max_models must be at least 1")
        if self.max_runtime_secs is not None and self.max_runtime_secs < 0:
            raise BudgetError("max_runtime_secs must be non-negative")


@dataclass(frozen=True)
class AutoMLRun:
    train: Frame
    test: Frame
    budget: Budget
    k: int = DEFAULT_K
    seed: int = 0
    metric: str = "auc"
    workers: int = 1
    folds: FoldAssignment | None = None
    spaces: Mapping[str, HyperparameterSpace] | None = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ConfigError(f"unknown ranking metric {self.metric!r}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")


@dataclass(frozen=True)
class LeaderboardEntry:
    model_id: str
    kind: str
    metrics: MetricsReport
    cv_metrics: MetricsReport | None = None


@dataclass(frozen=True, eq=False)
class Leaderboard:
    entries: tuple[LeaderboardEntry, ...]
    metric: str
    models: dict = field(default_factory=dict, repr=False)
    test_predictions: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        if not isinstance(other, Leaderboard):
            return NotImplemented
        return self.metric == other.metric and self.entries == other.entries

    __hash__ = None

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(e.model_id for e in self.entries)

    def entry(self, model_id: str) -> LeaderboardEntry:
        return next(e for e in self.entries if e.model_id == model_id)

    def format_table(self) -> str:
        header = f"{'model_id':<32} {'kind':<16} {'auc':>7} {'accuracy':>9} {'f_score':>8} {'logloss':>8} {'cv_' + self.metric:>10}"
        lines = [header, "-" * len(header)]
        for e in self.entries:
            m = e.metrics
            cv = f"{e.cv_metrics.value(self.metric):.4f}" if e.cv_metrics else "-"
            lines.append(f"{e.model_id:<32} {e.kind:<16} {m.auc:7.4f} {m.accuracy:9.4f} "
                         f"{m.f_score:8.4f} {m.log_loss:8.4f} {cv:>10}")
        return "\n".join(lines)

    def to_csv(self) -> str:
        cols = ["model_id", "kind"] + list(METRICS) + [f"cv_{m}" for m in METRICS]
        lines = [",".join(cols)]
        for e in self.entries:
            cv = [repr(e.cv_metrics.value(m)) if e.cv_metrics else "" for m in METRICS]
            lines.append(",".join([e.model_id, e.kind] + [repr(e.metrics.value(m)) for m in METRICS] + cv))
        return "\n".join(lines) + "\n"


def leaderboard_rank(entries: Sequence[LeaderboardEntry], metric: str, **extra) -> Leaderboard:
    """Stable sort, best first; log loss ascends, the other metrics descend."""
    ranked = sorted(entries, key=lambda e: sort_key(metric, e.metrics.value(metric)))
    return Leaderboard(tuple(ranked), metric, **extra)


def select_best(board: Leaderboard) -> str:
    if not board.entries:
        raise ConfigError("cannot select from an empty leaderboard")
    return board.entries[0].model_id


def candidate_seed(master_seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(master_seed), int(index)]).generate_state(1)[0])


def candidate_config(index: int, master_seed: int, spaces: Mapping[str, HyperparameterSpace]):
    family = FAMILY_ORDER[index % len(FAMILY_ORDER)]
    return sample_config(spaces[family], candidate_seed(master_seed, index))


@dataclass(frozen=True, eq=False)
class _Candidate:
    model: TrainedModel
    oof: object
    seconds: float


def _check_frames(run: AutoMLRun):
    if run.train.feature_names != run.test.feature_names or run.train.response_name != run.test.response_name:
        raise DataError("train and test frames do not share a schema")
    for name, frame in (("train", run.train), ("test", run.test)):
        n_pos, n_neg = class_counts(frame)
        if n_pos == 0 or n_neg == 0:
            raise DataError(f"{name} frame must contain both classes")


def run_automl(run: AutoMLRun) -> Leaderboard:
    _check_frames(run)
    spaces = {f: default_space(f) for f in FAMILY_ORDER}
    if run.spaces:
        spaces.update(run.spaces)
    folds = run.folds if run.folds is not None else assign_folds(run.train, run.k, run.seed)
    budget = run.budget

    def fit_candidate(i: int) -> _Candidate:
        t0 = time.perf_counter()
        config = candidate_config(i, run.seed, spaces)
        model_id = f"{config.family}_{i + 1}"
        oof = out_of_fold(config, run.train, folds)
        model = train(config, run.train).named(model_id)
        return _Candidate(model, oof, time.perf_counter() - t0)

    candidates: list[_Candidate] = []
    started = time.perf_counter()

    def time_left() -> bool:
        return budget.max_runtime_secs is None or time.perf_counter() - started < budget.max_runtime_secs

    def models_left() -> bool:
        return budget.max_models is None or len(candidates) < budget.max_models

    if run.workers == 1:
        while models_left() and time_left():
            candidates.append(fit_candidate(len(candidates)))
            logger.info("trained %s in %.1fs", candidates[-1].model.model_id, candidates[-1].seconds)
    else:
        with ThreadPoolExecutor(run.workers) as pool:
            while models_left() and time_left():
                # Without a time budget, dispatch everything at once; with one,
                # go in waves so the budget is re-checked between them.
                if budget.max_runtime_secs is None:
                    wave = budget.max_models
                else:
                    wave = run.workers if budget.max_models is None else min(
                        run.workers, budget.max_models - len(candidates))
                start = len(candidates)
                candidates.extend(pool.map(fit_candidate, range(start, start + wave)))

    if not candidates:
        raise BudgetError("the budget ran out before any candidate model finished")

    models = [c.model for c in candidates]
    ids = [m.model_id for m in models]
    meta = assemble_meta_frame([c.oof for c in candidates], ids, run.train.response, folds)
    cv_reports = {m.model_id: report(meta.response, c.oof.predictions) for m, c in zip(models, candidates)}

    ensembles = [train_super_learner(meta, models, model_id=ALL_MODELS_ID)]
    if len({m.family for m in models}) >= 2:
        scores = [cv_reports[i].value(run.metric) for i in ids]
        best = best_of_family(models, scores, run.metric)
        best_ids = [m.model_id for m in best]
        ensembles.append(train_super_learner(sub_meta(meta, best_ids), best, model_id=BEST_OF_FAMILY_ID))

    entries, registry, preds = [], {}, {}
    y_test = run.test.response
    for m in models:
        p = m.predict_proba(run.test)
        entries.append(LeaderboardEntry(m.model_id, m.family, report(y_test, p), cv_reports[m.model_id]))
        registry[m.model_id], preds[m.model_id] = m, p
    for s in ensembles:
        p = s.predict_proba(run.test)
        entries.append(LeaderboardEntry(s.model_id, ENSEMBLE, report(y_test, p),
                                        report(meta.response, s.cv_predictions)))
        registry[s.model_id], preds[s.model_id] = s, p
    return leaderboard_rank(entries, run.metric, models=registry, test_predictions=preds)


# ---------------------------------------------------------------------------
# Run manifests


@dataclass(frozen=True)
class RunManifest:
    dataset: str
    response: str
    categorical: tuple[str, ...] = ()
    k: int = DEFAULT_K
    seed: int = 0
    max_models: int | None = None
    max_runtime_secs: float | None = None
    metric: str = "auc"
    workers: int = 1
    test_fraction: float = 0.2
    undersample: bool = True
    delimiter: str = ","
    drop: tuple[str, ...] = ()
    response_labels: Mapping[str, int] | None = None
    space_overrides: str | None = None


_INT_KEYS = {"k", "seed", "max_models", "workers"}
_FLOAT_KEYS = {"max_runtime_secs", "test_fraction"}
_LIST_KEYS = {"categorical", "drop"}


def parse_manifest(text: str, base_dir: str = ".") -> RunManifest:
    """Parse ``key = value`` lines; relative paths resolve against ``base_dir``."""
    values: dict = {}
    known = set(RunManifest.__dataclass_fields__)
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"manifest line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"manifest line {lineno}: unknown key {key!r}")
        try:
            if key in _INT_KEYS:
                value = int(raw)
            elif key in _FLOAT_KEYS:
                value = float(raw)
            elif key in _LIST_KEYS:
                value = tuple(s.strip() for s in raw.split(",") if s.strip())
            elif key == "undersample":
                value = raw.lower() in ("1", "true", "yes", "on")
            elif key == "response_labels":
                value = {a.strip(): int(b) for a, b in (pair.split(":") for pair in raw.split(","))}
            elif key == "delimiter":
                value = {"comma": ",", "semicolon": ";", "tab": "\t"}.get(raw, raw)
            else:
                value = raw
        except ValueError:
            raise ConfigError(f"manifest line {lineno}: bad value {raw!r} for {key}") from None
        values[key] = value
    for required in ("dataset", "response"):
        if required not in values:
            raise ConfigError(f"manifest is missing {required!r}")
    for key in ("dataset", "space_overrides"):
        if key in values and not os.path.isabs(values[key]):
            values[key] = os.path.join(base_dir, values[key])
    return RunManifest(**values)


def load_manifest(path) -> RunManifest:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        return parse_manifest(fh.read(), os.path.dirname(os.path.abspath(path)))


def run_manifest(manifest: RunManifest) -> Leaderboard:
    """Load, balance, split, encode and search, as configured by the manifest."""
    from .frame import load_csv, split_train_test
    from .learners import load_space_overrides
    from .preprocess import encode_pair, undersample

    frame = load_csv(manifest.dataset, manifest.response, manifest.categorical,
                     delimiter=manifest.delimiter, drop_names=manifest.drop,
                     response_labels=manifest.response_labels)
    if manifest.undersample:
        frame = undersample(frame, manifest.seed)
    train_raw, test_raw = split_train_test(frame, manifest.test_fraction, manifest.seed)
    train_frame, test_frame, _ = encode_pair(train_raw, test_raw)
    spaces = load_space_overrides(manifest.space_overrides) if manifest.space_overrides else None
    run = AutoMLRun(
        train=train_frame, test=test_frame,
        budget=Budget(manifest.max_models, manifest.max_runtime_secs),
        k=manifest.k, seed=manifest.seed, metric=manifest.metric,
        workers=manifest.workers, spaces=spaces,
    )
    return run_automl(run)

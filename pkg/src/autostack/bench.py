"""Case-study harness: manual tuned stack versus AutoML on identical partitions.

Expected local files (downloaded and, where noted, converted by hand):

``credit_risk``
    ``default_of_credit_card_clients.csv``: the UCI "default of credit card
    clients" spreadsheet exported to CSV with the second header row kept,
    the ``ID`` column left in place (it is dropped on load) and the last
    column renamed from ``default payment next month`` to ``default``.
    https://archive.ics.uci.edu/ml/datasets/default+of+credit+card+clients
``claims``
    ``porto_seguro_train.csv``: ``train.csv`` of the Porto Seguro Safe Driver
    Prediction competition, renamed.
    https://www.kaggle.com/c/porto-seguro-safe-driver-prediction/data
``marketing``
    ``bank-full.csv`` from the UCI Bank Marketing archive, unmodified
    (semicolon-delimited, ``yes``/``no`` response).
    https://archive.ics.uci.edu/ml/datasets/Bank+Marketing

Metric deltas are reported as stacked minus AutoML, so a positive AUC,
accuracy or F-score delta, and a negative log-loss delta, favour the
manual stack.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_EVEN, Decimal
from typing import Mapping, Sequence

import numpy as np

from .automl import AutoMLRun, Budget, Leaderboard, run_automl, select_best
from .errors import ConfigError, MissingColumnError, MissingFileError, SchemaMismatchError
from .frame import Frame, class_counts, load_csv, split_indices
from .learners import DL, GBM, RF, HyperparameterSpace, default_space, enumerate_grid, sample_config, train
from .metrics import METRICS, MetricsReport, auc, log_loss, report
from .preprocess import FoldAssignment, assign_folds, encode_pair, undersample
from .stacking import assemble_meta_frame, best_subset_search, out_of_fold

logger = logging.getLogger(__name__)

MANUAL_FAMILIES = (RF, GBM, DL)
METHOD_LABELS = {RF: "Random Forest", GBM: "Gradient Boosting", DL: "Deep Learning"}
STACKED, AUTOML, DELTA = "Stacked Ensemble", "AutoML", "Delta (stacked - AutoML)"
CASE_LABELS = {"credit_risk": "Credit Risk", "claims": "Claims Prediction", "marketing": "Marketing"}

# Documented dataset shapes: total rows, y = 0, y = 1, feature count.
DATASET_SHAPES = {
    "credit_risk": (30000, 23364, 6636, 23),
    "claims": (595212, 573518, 21694, 57),
    "marketing": (45211, 39922, 5289, 16),
}

CLAIMS_CATEGORICAL = (
    "ps_ind_02_cat", "ps_ind_04_cat", "ps_ind_05_cat",
    *(f"ps_car_{i:02d}_cat" for i in range(1, 12)),
)


@dataclass(frozen=True)
class CaseStudyConfig:
    name: str
    csv_path: str
    response: str
    categorical: tuple[str, ...] = ()
    drop: tuple[str, ...] = ()
    delimiter: str = ","
    response_labels: dict | None = None
    undersample_seed: int = 0
    split_seed: int = 0
    fold_seed: int = 0
    search_seed: int = 0
    k: int = 5
    test_fraction: float = 0.2
    manual_grid_points: int = 3
    manual_random_draws: int = 25
    automl_max_models: int = 20
    automl_max_runtime_secs: float | None = None
    workers: int = 1
    # family -> HyperparameterSpace replacing the defaults in both arms
    spaces: Mapping[str, HyperparameterSpace] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.name not in DATASET_SHAPES:
            raise ConfigError(f"unknown case study {self.name!r}; choose from {sorted(DATASET_SHAPES)}")

    @property
    def expected_features(self) -> int:
        return DATASET_SHAPES[self.name][3]

    @property
    def seeds(self) -> dict[str, int]:
        return {"undersample": self.undersample_seed, "split": self.split_seed,
                "folds": self.fold_seed, "search": self.search_seed}

    def reseeded(self, offset: int) -> CaseStudyConfig:
        return replace(self, undersample_seed=self.undersample_seed + offset,
                       split_seed=self.split_seed + offset, fold_seed=self.fold_seed + offset,
                       search_seed=self.search_seed + offset)


_CASES = {
    "credit_risk": dict(filename="default_of_credit_card_clients.csv", response="default",
                        categorical=("SEX", "EDUCATION", "MARRIAGE"), drop=("ID",)),
    "claims": dict(filename="porto_seguro_train.csv", response="target",
                   categorical=CLAIMS_CATEGORICAL, drop=("id",)),
    "marketing": dict(filename="bank-full.csv", response="y", delimiter=";",
                      response_labels={"yes": 1, "no": 0},
                      categorical=("job", "marital", "education", "default", "housing", "loan",
                                   "contact", "month", "poutcome")),
}
CASE_NAMES = tuple(_CASES)


def case_filename(name: str) -> str:
    return _CASES[name]["filename"]


def case_config(name: str, data_dir=".", **overrides) -> CaseStudyConfig:
    """Documented configuration of a case study whose file lives in ``data_dir``."""
    if name not in _CASES:
        raise ConfigError(f"unknown case study {name!r}; choose from {sorted(_CASES)}")
    entry = dict(_CASES[name])
    path = os.path.join(os.fspath(data_dir), entry.pop("filename"))
    return CaseStudyConfig(name=name, csv_path=path, **{**entry, **overrides})


def _expected_shape(cfg: CaseStudyConfig) -> str:
    total, n0, n1, n_feat = DATASET_SHAPES[cfg.name]
    return (f"the {cfg.name} dataset should have {n_feat} features plus the response "
            f"{cfg.response!r} ({total} rows: {n0} with y=0, {n1} with y=1)")


def load_case_frame(cfg: CaseStudyConfig) -> Frame:
    try:
        frame = load_csv(cfg.csv_path, cfg.response, cfg.categorical, delimiter=cfg.delimiter,
                         drop_names=cfg.drop, response_labels=cfg.response_labels)
    except MissingFileError as exc:
        raise MissingFileError(f"{exc}; {_expected_shape(cfg)}") from None
    except MissingColumnError as exc:
        raise SchemaMismatchError(f"{exc}; {_expected_shape(cfg)}") from None
    if len(frame.feature_names) != cfg.expected_features:
        raise SchemaMismatchError(
            f"{cfg.csv_path}: found {len(frame.feature_names)} feature columns; {_expected_shape(cfg)}"
        )
    return frame


@dataclass(frozen=True, eq=False)
class PreparedCase:
    raw_counts: tuple[int, int, int]
    balanced_counts: tuple[int, int]
    train: Frame
    test: Frame
    folds: FoldAssignment
    train_rows: np.ndarray
    test_rows: np.ndarray


def prepare_case(cfg: CaseStudyConfig, frame: Frame | None = None) -> PreparedCase:
    """Balance, split 80:20 (stratified) and one-hot encode; fix the CV folds."""
    frame = load_case_frame(cfg) if frame is None else frame
    n_pos, n_neg = class_counts(frame)
    balanced = undersample(frame, cfg.undersample_seed)
    b_pos, b_neg = class_counts(balanced)
    train_rows, test_rows = split_indices(balanced, cfg.test_fraction, cfg.split_seed)
    train_frame, test_frame, _ = encode_pair(balanced.take(train_rows), balanced.take(test_rows))
    folds = assign_folds(train_frame, cfg.k, cfg.fold_seed)
    return PreparedCase((frame.n_rows, n_neg, n_pos), (b_neg, b_pos), train_frame, test_frame,
                        folds, train_rows, test_rows)


@dataclass(frozen=True, eq=False)
class ManualResult:
    base_reports: dict[str, MetricsReport]
    base_cv_reports: dict[str, MetricsReport]
    stacked_report: MetricsReport
    stacked_cv_log_loss: float
    winning_subset: tuple[str, ...]
    subset_scores: tuple
    configs: dict
    test_predictions: dict[str, np.ndarray] = field(repr=False)


def manual_candidates(family: str, cfg: CaseStudyConfig):
    space = (cfg.spaces or {}).get(family) or default_space(family)
    grid = enumerate_grid(space, cfg.manual_grid_points, seed=cfg.search_seed)
    draws = [sample_config(space, cfg.search_seed * 100_003 + 7919 * j + 1)
             for j in range(cfg.manual_random_draws)]
    return grid + draws


def run_manual_pipeline(cfg: CaseStudyConfig, prepared: PreparedCase | None = None) -> ManualResult:
    """Tune RF, GBM and DL by cross-validated AUC, then search their stacking subsets."""
    prepared = prepare_case(cfg) if prepared is None else prepared
    train_frame, test_frame, folds = prepared.train, prepared.test, prepared.folds
    y_train = train_frame.response

    models, oofs, configs, cv_reports = [], [], {}, {}
    for family in MANUAL_FAMILIES:
        best = None
        for config in manual_candidates(family, cfg):
            oof = out_of_fold(config, train_frame, folds, workers=cfg.workers)
            score = auc(y_train, oof.predictions)
            if best is None or score > best[0]:
                best = (score, config, oof)
        _, config, oof = best
        logger.info("%s tuned: %s (cv auc %.4f)", family, config.describe(), best[0])
        models.append(train(config, train_frame).named(family))
        oofs.append(oof)
        configs[family] = config
        cv_reports[family] = report(y_train, oof.predictions)

    meta = assemble_meta_frame(oofs, [m.model_id for m in models], y_train, folds)
    stacked = best_subset_search(models, train_frame, folds, "auc", meta=meta, model_id="StackedEnsemble")

    preds = {m.model_id: m.predict_proba(test_frame) for m in models}
    preds[STACKED] = stacked.predict_proba(test_frame)
    y_test = test_frame.response
    return ManualResult(
        base_reports={f: report(y_test, preds[f]) for f in MANUAL_FAMILIES},
        base_cv_reports=cv_reports,
        stacked_report=report(y_test, preds[STACKED]),
        stacked_cv_log_loss=log_loss(y_train, stacked.cv_predictions),
        winning_subset=stacked.roster_ids,
        subset_scores=stacked.subset_scores,
        configs=configs,
        test_predictions=preds,
    )


@dataclass(frozen=True, eq=False)
class BenchReport:
    name: str
    raw_counts: tuple[int, int, int]
    balanced_counts: tuple[int, int]
    split_sizes: tuple[int, int]
    manual: ManualResult
    leaderboard: Leaderboard
    automl_best: str
    automl_report: MetricsReport
    deltas: dict[str, float]
    timings: dict[str, float]
    seeds: dict[str, int]
    test_labels: np.ndarray = field(repr=False)

    @property
    def stacked_report(self) -> MetricsReport:
        return self.manual.stacked_report

    def rows(self) -> list[tuple[str, str, dict[str, float]]]:
        """(case label, method label, metric values) in table order."""
        case = CASE_LABELS[self.name]
        out = [(case, METHOD_LABELS[f], self.manual.base_reports[f].as_dict()) for f in MANUAL_FAMILIES]
        out.append((case, STACKED, self.stacked_report.as_dict()))
        out.append((case, AUTOML, self.automl_report.as_dict()))
        out.append((case, DELTA, dict(self.deltas)))
        return out

    def predictions_table(self) -> tuple[list[str], np.ndarray]:
        """Per-row test predictions of every reported model, for audit."""
        names = ["label"] + list(MANUAL_FAMILIES) + [STACKED, f"{AUTOML}:{self.automl_best}"]
        cols = [self.test_labels.astype(float)]
        cols += [self.manual.test_predictions[f] for f in MANUAL_FAMILIES]
        cols += [self.manual.test_predictions[STACKED], self.leaderboard.test_predictions[self.automl_best]]
        return names, np.column_stack(cols)

    def __eq__(self, other):
        if not isinstance(other, BenchReport):
            return NotImplemented
        return emit_report(self, "csv") == emit_report(other, "csv") and \
            np.array_equal(self.predictions_table()[1], other.predictions_table()[1])

    __hash__ = None


def run_case_study(cfg: CaseStudyConfig, frame: Frame | None = None) -> BenchReport:
    """Both arms on byte-identical partitions and folds."""
    t0 = time.perf_counter()
    prepared = prepare_case(cfg, frame)
    t1 = time.perf_counter()
    manual = run_manual_pipeline(cfg, prepared)
    t2 = time.perf_counter()
    board = run_automl(AutoMLRun(
        train=prepared.train, test=prepared.test, folds=prepared.folds, k=cfg.k,
        budget=Budget(cfg.automl_max_models, cfg.automl_max_runtime_secs),
        seed=cfg.search_seed, metric="auc", workers=cfg.workers, spaces=cfg.spaces,
    ))
    t3 = time.perf_counter()
    best = select_best(board)
    automl_report = board.entry(best).metrics
    deltas = {m: manual.stacked_report.value(m) - automl_report.value(m) for m in METRICS}
    return BenchReport(
        name=cfg.name,
        raw_counts=prepared.raw_counts,
        balanced_counts=prepared.balanced_counts,
        split_sizes=(prepared.train.n_rows, prepared.test.n_rows),
        manual=manual,
        leaderboard=board,
        automl_best=best,
        automl_report=automl_report,
        deltas=deltas,
        timings={"prepare": t1 - t0, "manual": t2 - t1, "automl": t3 - t2},
        seeds=cfg.seeds,
        test_labels=prepared.test.response.copy(),
    )


def run_multi_seed(cfg: CaseStudyConfig, n_seeds: int = 5) -> list[BenchReport]:
    return [run_case_study(cfg.reseeded(s)) for s in range(n_seeds)]


def round3(value: float) -> str:
    """Three decimals, rounding half to even on the shortest decimal repr."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN))


_TABLE_METRICS = (("auc", "AUC"), ("accuracy", "Accuracy"), ("f_score", "F-score"), ("log_loss", "Logloss"))


def emit_report(reports: BenchReport | Sequence[BenchReport], fmt: str = "table") -> str:
    """Render one or more reports as an aligned text table or as full-precision CSV."""
    if isinstance(reports, BenchReport):
        reports = [reports]
    rows = [r for rep in reports for r in rep.rows()]
    if fmt == "csv":
        lines = ["case_study,method," + ",".join(m for m, _ in _TABLE_METRICS)]
        lines += [f"{case},{method}," + ",".join(repr(float(vals[m])) for m, _ in _TABLE_METRICS)
                  for case, method, vals in rows]
        return "\n".join(lines) + "\n"
    if fmt != "table":
        raise ConfigError(f"unknown report format {fmt!r}")
    header = ["Case Study", "Method"] + [label for _, label in _TABLE_METRICS]
    body = [[case, method] + [round3(vals[m]) for m, _ in _TABLE_METRICS] for case, method, vals in rows]
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    fmt_row = lambda r: "  ".join(c.ljust(w) if i < 2 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths)))
    lines = [fmt_row(header), "  ".join("-" * w for w in widths)] + [fmt_row(r) for r in body]
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> list[tuple[str, str, dict[str, float]]]:
    lines = text.strip().splitlines()
    names = lines[0].split(",")[2:]
    out = []
    for line in lines[1:]:
        case, method, *vals = line.split(",")
        out.append((case, method, {n: float(v) for n, v in zip(names, vals)}))
    return out


def summarize_seeds(reports: Sequence[BenchReport]) -> str:
    """Mean and range across seeds for every (method, metric) of one case study."""
    by_method: dict[tuple[str, str], list[dict]] = {}
    for rep in reports:
        for case, method, vals in rep.rows():
            by_method.setdefault((case, method), []).append(vals)
    lines = [f"{len(reports)} seeds: mean [min, max]"]
    for (case, method), vals in by_method.items():
        cells = []
        for m, label in _TABLE_METRICS:
            xs = np.array([v[m] for v in vals])
            cells.append(f"{label} {round3(xs.mean())} [{round3(xs.min())}, {round3(xs.max())}]")
        lines.append(f"{case} | {method} | " + " | ".join(cells))
    return "\n".join(lines) + "\n"


def write_outputs(reports: Sequence[BenchReport], out_dir) -> list[str]:
    """Write table, CSV and per-row prediction files; returns the paths."""
    out_dir = os.fspath(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, text in (("report.txt", emit_report(reports, "table")), ("report.csv", emit_report(reports, "csv"))):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        paths.append(path)
    for i, rep in enumerate(reports):
        names, table = rep.predictions_table()
        path = os.path.join(out_dir, f"predictions_{rep.name}_seedset{i}.csv")
        np.savetxt(path, table, delimiter=",", header=",".join(names), comments="", fmt="%.17g")
        paths.append(path)
    return paths

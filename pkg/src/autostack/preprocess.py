"""Class balancing, one-hot encoding and cross-validation folds.

The benchmark protocol balances the full dataset first and splits
afterwards. That ordering lets the held-out rows influence which majority
rows survive into training; it matches how the balanced dataset sizes are
reported, but it is a (mild) form of leakage worth keeping in mind when
reading test metrics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .frame import CATEGORICAL, NUMERIC, ColumnSchema, Frame

MISSING_LEVEL = "missing(NA)"
DEFAULT_K = 5


def undersample_indices(frame: Frame, seed: int) -> np.ndarray:
    y = frame.response
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if pos.size == 0 or neg.size == 0:
        raise DataError("undersampling needs at least one row of each class")
    minority, majority = (pos, neg) if pos.size <= neg.size else (neg, pos)
    rng = np.random.default_rng(seed)
    kept = rng.choice(majority, size=minority.size, replace=False)
    return np.sort(np.concatenate([minority, kept]))


def undersample(frame: Frame, seed: int) -> Frame:
    """Randomly drop majority-class rows until both classes have the minority count.

    Every minority row is kept and the surviving rows keep their original
    order.
    """
    return frame.take(undersample_indices(frame, seed))


@dataclass(frozen=True)
class EncodingMap:
    """Fitted one-hot layout: for each categorical column its observed levels.

    Every column gets one extra output column that absorbs missing cells
    and levels never seen at fit time.
    """

    levels: dict[str, tuple[str, ...]]

    def output_columns(self, name: str) -> tuple[str, ...]:
        return tuple(f"{name}.{lvl}" for lvl in self.levels[name]) + (f"{name}.{MISSING_LEVEL}",)

    @property
    def output_names(self) -> tuple[str, ...]:
        return tuple(c for name in self.levels for c in self.output_columns(name))


def fit_one_hot(frame: Frame) -> EncodingMap:
    levels = {}
    for name in frame.columns_of_kind(CATEGORICAL):
        values = frame.column(name)
        seen = sorted({v for v in values if v is not None})
        levels[name] = tuple(seen)
    return EncodingMap(levels)


def apply_one_hot(frame: Frame, encoding: EncodingMap) -> Frame:
    """Replace each mapped categorical column by its N+1 indicator columns.

    Output columns are laid out in the source frame's column order, with
    indicator blocks in place of their categorical column.
    """
    for name in encoding.levels:
        if frame.kind_of(name) != CATEGORICAL:
            raise DataError(f"column {name!r} is not categorical in this frame")

    schema, columns = [], {}
    for col in frame.schema:
        values = frame.column(col.name)
        if col.kind == CATEGORICAL and col.name in encoding.levels:
            levels = encoding.levels[col.name]
            position = {lvl: i for i, lvl in enumerate(levels)}
            reserved = len(levels)
            codes = np.fromiter(
                (position.get(v, reserved) for v in values), dtype=np.intp, count=len(values)
            )
            for j, out_name in enumerate(encoding.output_columns(col.name)):
                schema.append(ColumnSchema(out_name, NUMERIC))
                columns[out_name] = (codes == j).astype(np.float64)
        else:
            schema.append(col)
            columns[col.name] = values
    return Frame(schema, columns)


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of_row: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.fold_of_row, dtype=np.intp).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "fold_of_row", arr)

    def __eq__(self, other):
        if not isinstance(other, FoldAssignment):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.fold_of_row, other.fold_of_row)

    __hash__ = None

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row != fold)

    def held_out_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row == fold)


def stratified_folds(y: np.ndarray, k: int, seed: int) -> FoldAssignment:
    """Deal each shuffled class round-robin into ``k`` folds."""
    if k < 2:
        raise ConfigError(f"need k >= 2 folds, got {k}")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    fold_of_row = np.empty(y.size, dtype=np.intp)
    # The second class continues where the first stopped so total fold
    # sizes also stay within one of each other.
    offset = 0
    for label in (0, 1):
        members = np.flatnonzero(y == label)
        if members.size < k:
            raise DataError(f"class {label} has {members.size} rows, fewer than k={k} folds")
        members = rng.permutation(members)
        fold_of_row[members] = (np.arange(members.size) + offset) % k
        offset = (offset + members.size) % k
    return FoldAssignment(k, fold_of_row)


def assign_folds(frame: Frame, k: int = DEFAULT_K, seed: int = 0) -> FoldAssignment:
    return stratified_folds(frame.response, k, seed)


def encode_pair(train: Frame, test: Frame) -> tuple[Frame, Frame, EncodingMap]:
    """Fit the encoding on ``train`` and apply it to both frames."""
    encoding = fit_one_hot(train)
    return apply_one_hot(train, encoding), apply_one_hot(test, encoding), encoding


__all__ = [
    "DEFAULT_K",
    "MISSING_LEVEL",
    "EncodingMap",
    "FoldAssignment",
    "apply_one_hot",
    "assign_folds",
    "encode_pair",
    "fit_one_hot",
    "stratified_folds",
    "undersample",
    "undersample_indices",
]

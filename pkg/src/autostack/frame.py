"""Immutable columnar datasets and CSV ingestion."""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigError,
    DataError,
    MissingColumnError,
    MissingFileError,
    RaggedRowError,
    ResponseValueError,
)

logger = logging.getLogger(__name__)

NUMERIC = "numeric"
CATEGORICAL = "categorical"
RESPONSE = "response"
KINDS = (NUMERIC, CATEGORICAL, RESPONSE)

MISSING_TOKENS = frozenset({"", "NA"})
# Above this fraction of rows with a missing numeric cell, those rows are
# dropped instead of median-imputed.
MISSING_ROW_LIMIT = 0.001


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    declared_levels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown column kind {self.kind!r} for {self.name!r}")
        if self.declared_levels is not None:
            if self.kind != CATEGORICAL:
                raise ConfigError(f"declared_levels given for non-categorical column {self.name!r}")
            levels = tuple(self.declared_levels)
            if len(set(levels)) != len(levels):
                raise ConfigError(f"duplicate declared levels in column {self.name!r}")
            object.__setattr__(self, "declared_levels", levels)


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


class Frame:
    """A typed, immutable table with exactly one binary response column.

    Numeric columns are float64 arrays, categorical columns are object
    arrays of ``str`` (``None`` marks a missing cell) and the response is
    an int8 array of 0/1 labels.
    """

    __slots__ = ("_schema", "_columns", "_n_rows")

    def __init__(self, schema: Sequence[ColumnSchema], columns: Mapping[str, Sequence]):
        schema = tuple(schema)
        names = [c.name for c in schema]
        if len(set(names)) != len(names):
            raise DataError("duplicate column names")
        n_response = sum(c.kind == RESPONSE for c in schema)
        if n_response != 1:
            raise DataError(f"a frame needs exactly one response column, got {n_response}")
        if set(columns) != set(names):
            raise DataError("columns do not match schema")

        stored = {}
        n_rows = None
        for col in schema:
            raw = columns[col.name]
            if col.kind == NUMERIC:
                arr = np.asarray(raw, dtype=np.float64)
            elif col.kind == RESPONSE:
                arr = np.asarray(raw)
                if arr.size and not np.all((arr == 0) | (arr == 1)):
                    raise ResponseValueError(f"response column {col.name!r} has values outside {{0, 1}}")
                arr = arr.astype(np.int8)
            else:
                arr = np.empty(len(raw), dtype=object)
                arr[:] = [None if v is None else str(v) for v in raw]
            if arr.ndim != 1:
                raise DataError(f"column {col.name!r} is not one-dimensional")
            if n_rows is None:
                n_rows = len(arr)
            elif len(arr) != n_rows:
                raise DataError(f"column {col.name!r} has {len(arr)} rows, expected {n_rows}")
            stored[col.name] = _freeze(arr)

        object.__setattr__(self, "_schema", schema)
        object.__setattr__(self, "_columns", MappingProxyType(stored))
        object.__setattr__(self, "_n_rows", int(n_rows or 0))

    def __setattr__(self, name, value):
        raise AttributeError("Frame is immutable")

    def __repr__(self):
        return f"Frame(n_rows={self.n_rows}, columns={list(self.names)})"

    def __eq__(self, other):
        if not isinstance(other, Frame) or self.schema != other.schema:
            return NotImplemented if not isinstance(other, Frame) else False
        return all(np.array_equal(self._columns[n], other._columns[n]) for n in self.names)

    __hash__ = None

    @property
    def schema(self) -> tuple[ColumnSchema, ...]:
        return self._schema

    @property
    def n_rows(self) -> int:
        return self._n_rows

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self._schema)

    @property
    def response_name(self) -> str:
        return next(c.name for c in self._schema if c.kind == RESPONSE)

    @property
    def response(self) -> np.ndarray:
        return self._columns[self.response_name]

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self._schema if c.kind != RESPONSE)

    def kind_of(self, name: str) -> str:
        return self.column_schema(name).kind

    def column_schema(self, name: str) -> ColumnSchema:
        for col in self._schema:
            if col.name == name:
                return col
        raise MissingColumnError(f"no column named {name!r}")

    def column(self, name: str) -> np.ndarray:
        try:
            return self._columns[name]
        except KeyError:
            raise MissingColumnError(f"no column named {name!r}") from None

    def columns_of_kind(self, kind: str) -> tuple[str, ...]:
        return tuple(c.name for c in self._schema if c.kind == kind)

    def take(self, indices) -> Frame:
        """Rows at ``indices`` (in that order) as a new frame."""
        idx = np.asarray(indices, dtype=np.intp)
        return Frame(self._schema, {n: self._columns[n][idx] for n in self.names})

    def feature_matrix(self) -> np.ndarray:
        """Feature columns as an ``(n_rows, n_features)`` float64 matrix.

        Only valid on fully numeric (encoded) frames.
        """
        cats = self.columns_of_kind(CATEGORICAL)
        if cats:
            raise DataError(f"frame still has categorical columns {list(cats)}; encode it first")
        names = self.feature_names
        if not names:
            return np.empty((self.n_rows, 0), dtype=np.float64)
        return np.column_stack([self._columns[n] for n in names]).astype(np.float64, copy=False)


def class_counts(frame: Frame) -> tuple[int, int]:
    """Return ``(n_pos, n_neg)``."""
    y = frame.response
    n_pos = int(np.count_nonzero(y))
    return n_pos, frame.n_rows - n_pos


def _parse_response(values: Sequence[str], name: str, labels: Mapping[str, int] | None) -> np.ndarray:
    out = np.empty(len(values), dtype=np.int8)
    for i, raw in enumerate(values):
        token = raw.strip()
        if labels is not None:
            if token not in labels:
                raise ResponseValueError(f"response {name!r} row {i + 1}: unexpected label {token!r}")
            value = labels[token]
        else:
            try:
                value = float(token)
            except ValueError:
                raise ResponseValueError(f"response {name!r} row {i + 1}: {token!r} is not 0 or 1") from None
        if value not in (0, 1):
            raise ResponseValueError(f"response {name!r} row {i + 1}: {token!r} is not 0 or 1")
        out[i] = int(value)
    return out


def _try_numeric(values: Sequence[str]) -> np.ndarray | None:
    """Parse a column as floats with NaN for missing cells, or None if any cell is text."""
    try:
        return np.asarray(values, dtype=np.float64)
    except ValueError:
        pass
    out = np.empty(len(values), dtype=np.float64)
    for i, raw in enumerate(values):
        token = raw.strip()
        if token in MISSING_TOKENS:
            out[i] = np.nan
            continue
        try:
            out[i] = float(token)
        except ValueError:
            return None
    return out


def load_csv(
    path,
    response_name: str,
    categorical_names: Iterable[str] = (),
    *,
    delimiter: str = ",",
    drop_names: Iterable[str] = (),
    response_labels: Mapping[str, int] | None = None,
) -> Frame:
    """Read a headed CSV file into a :class:`Frame`.

    Columns named in ``categorical_names`` become categorical; other
    columns become numeric when every non-missing cell parses as a
    decimal number and categorical otherwise. ``response_labels`` maps
    raw response tokens (e.g. ``{"yes": 1, "no": 0}``) when the file does
    not already use 0/1.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise MissingFileError(f"no such file: {path}")
    categorical_names = set(categorical_names)
    drop_names = set(drop_names)

    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: file is empty, a header row is required") from None
        rows = []
        for row in reader:
            if not row:
                continue
            if len(row) != len(header):
                raise RaggedRowError(
                    f"{path}: line {reader.line_num} has {len(row)} fields, header has {len(header)}"
                )
            rows.append(row)

    if response_name not in header:
        raise MissingColumnError(f"{path}: response column {response_name!r} not in header")
    missing = (categorical_names | drop_names) - set(header)
    if missing:
        raise MissingColumnError(f"{path}: columns {sorted(missing)} not in header")

    raw_columns = list(zip(*rows)) if rows else [() for _ in header]
    schema = []
    columns = {}
    for name, values in zip(header, raw_columns):
        if name in drop_names:
            continue
        if name == response_name:
            schema.append(ColumnSchema(name, RESPONSE))
            columns[name] = _parse_response(values, name, response_labels)
            continue
        parsed = None if name in categorical_names else _try_numeric(values)
        if parsed is None:
            cells = [None if v.strip() in MISSING_TOKENS else v.strip() for v in values]
            levels = tuple(sorted({c for c in cells if c is not None}))
            schema.append(ColumnSchema(name, CATEGORICAL, levels))
            columns[name] = cells
        else:
            schema.append(ColumnSchema(name, NUMERIC))
            columns[name] = parsed

    numeric = [c.name for c in schema if c.kind == NUMERIC]
    if numeric and rows:
        holes = np.zeros(len(rows), dtype=bool)
        for name in numeric:
            holes |= np.isnan(columns[name])
        n_holes = int(holes.sum())
        if n_holes and n_holes / len(rows) > MISSING_ROW_LIMIT:
            logger.warning("%s: dropped %d rows with missing numeric cells", path, n_holes)
            keep = ~holes
            for name in columns:
                col = columns[name]
                columns[name] = (
                    np.asarray(col)[keep] if not isinstance(col, list)
                    else [v for v, k in zip(col, keep) if k]
                )
        elif n_holes:
            logger.warning("%s: median-imputed %d rows with missing numeric cells", path, n_holes)
            for name in numeric:
                col = columns[name]
                nan = np.isnan(col)
                if nan.any():
                    fill = float(np.median(col[~nan])) if (~nan).any() else 0.0
                    col = col.copy()
                    col[nan] = fill
                    columns[name] = col

    return Frame(schema, columns)


def split_indices(frame: Frame, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Stratified train/test row indices (each sorted ascending).

    Each class contributes ``round(test_fraction * class_size)`` rows to
    the test side (numpy rounding, half to even).
    """
    if not 0 < test_fraction < 1:
        raise ConfigError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    y = frame.response
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in (0, 1):
        members = np.flatnonzero(y == label)
        if members.size == 0:
            raise DataError(f"cannot stratify: class {label} has no rows")
        members = rng.permutation(members)
        n_test = int(np.rint(test_fraction * members.size))
        test.append(members[:n_test])
        train.append(members[n_test:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split_train_test(frame: Frame, test_fraction: float = 0.2, seed: int = 0) -> tuple[Frame, Frame]:
    train_idx, test_idx = split_indices(frame, test_fraction, seed)
    return frame.take(train_idx), frame.take(test_idx)

from collections import Counter
from itertools import combinations

import numpy as np
import pytest

from autostack.errors import ConfigError, DataError
from autostack.frame import class_counts
from autostack.preprocess import (MISSING_LEVEL, apply_one_hot, assign_folds, encode_pair,
                                  fit_one_hot, undersample, undersample_indices)
from conftest import mixed_frame, numeric_frame


def test_undersample_credit_counts():
    y = np.array([0] * 23364 + [1] * 6636)
    balanced = undersample(numeric_frame(np.arange(y.size), y), seed=1)
    assert class_counts(balanced) == (6636, 6636)


def test_undersample_keeps_every_minority_row():
    y = np.array([0] * 7 + [1] * 3)
    frame = numeric_frame(np.arange(10), y)
    idx = undersample_indices(frame, seed=5)
    assert set(range(7, 10)) <= set(idx.tolist())
    assert class_counts(frame.take(idx)) == (3, 3)
    assert np.array_equal(idx, undersample_indices(frame, seed=5))


def test_undersample_subset_is_uniform():
    # Oracle: over many seeds every one of the C(7,3) = 35 majority subsets
    # should turn up with roughly equal frequency.
    y = np.array([0] * 7 + [1] * 3)
    frame = numeric_frame(np.arange(10), y)
    counts = Counter(tuple(undersample_indices(frame, s)[:3]) for s in range(7000))
    assert set(counts) == set(combinations(range(7), 3))
    expected = 7000 / 35
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < 70  # 34 dof, p < 1e-3 above this


def test_undersample_balanced_is_fixed_point():
    frame = numeric_frame(np.arange(6), [0, 1, 0, 1, 1, 0])
    assert undersample(frame, 9) == frame


def test_undersample_single_class_errors():
    with pytest.raises(DataError):
        undersample(numeric_frame(np.arange(3), [1, 1, 1]), 0)


def _cat_frame(values, y=None):
    y = y if y is not None else [i % 2 for i in range(len(values))]
    return mixed_frame({"n": np.arange(len(values), dtype=float)}, {"c": values}, y)


def test_one_hot_n_plus_one_columns():
    enc = fit_one_hot(_cat_frame(["a", "b", "c", "a"]))
    assert enc.output_columns("c") == ("c.a", "c.b", "c.c", f"c.{MISSING_LEVEL}")
    assert len(fit_one_hot(_cat_frame(["z", "z"])).output_columns("c")) == 2


def test_one_hot_no_categoricals():
    enc = fit_one_hot(numeric_frame(np.arange(4), [0, 1, 0, 1]))
    assert enc.levels == {}
    assert enc.output_names == ()


def test_one_hot_indicator_rows():
    enc = fit_one_hot(_cat_frame(["a", "b", "c", "a"]))
    test = _cat_frame(["b", "z", None, "a"])
    out = apply_one_hot(test, enc)
    block = np.column_stack([out.column(n) for n in enc.output_columns("c")])
    assert block.tolist() == [[0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 0, 1], [1, 0, 0, 0]]
    assert np.array_equal(out.column("n"), test.column("n"))
    assert np.array_equal(out.response, test.response)


def test_encoded_column_count_and_order():
    train = mixed_frame({"n1": np.zeros(4), "n2": np.ones(4)},
                        {"c1": ["a", "b", "c", "a"], "c2": ["u", "v", "u", "v"]}, [0, 1, 0, 1])
    test = mixed_frame({"n1": np.zeros(2), "n2": np.ones(2)},
                       {"c1": ["q", "a"], "c2": ["v", None]}, [1, 0])
    tr, te, enc = encode_pair(train, test)
    assert len(te.names) == 2 + (3 + 1) + (2 + 1) + 1
    assert tr.names == te.names


def test_folds_balanced_example():
    y = np.array([0, 1] * 50)
    folds = assign_folds(numeric_frame(np.arange(100), y), k=5, seed=2)
    for f in range(5):
        held = folds.held_out_rows(f)
        assert np.sum(y[held] == 1) == 10 and np.sum(y[held] == 0) == 10
    assert folds == assign_folds(numeric_frame(np.arange(100), y), k=5, seed=2)


def test_folds_smallest_case():
    y = np.array([0, 1, 1, 0])
    folds = assign_folds(numeric_frame(np.arange(4), y), k=2, seed=0)
    for f in range(2):
        assert sorted(y[folds.held_out_rows(f)].tolist()) == [0, 1]


def test_folds_train_and_held_out_partition():
    folds = assign_folds(numeric_frame(np.arange(30), [0, 1, 1] * 10), k=3, seed=4)
    for f in range(3):
        merged = np.concatenate([folds.train_rows(f), folds.held_out_rows(f)])
        assert np.array_equal(np.sort(merged), np.arange(30))


def test_folds_errors():
    frame = numeric_frame(np.arange(6), [0, 0, 0, 0, 1, 1])
    with pytest.raises(DataError):
        assign_folds(frame, k=3)
    with pytest.raises(ConfigError):
        assign_folds(frame, k=1)

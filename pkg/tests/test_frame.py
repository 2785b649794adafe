import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autostack.errors import (ConfigError, DataError, MissingColumnError, MissingFileError,
                              RaggedRowError, ResponseValueError)
from autostack.frame import (CATEGORICAL, NUMERIC, RESPONSE, class_counts, load_csv,
                             split_indices, split_train_test)
from conftest import numeric_frame


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_types_and_levels(tmp_path):
    path = write(tmp_path, 'a,b,c,y\n1,x,"q, r",1\n2.5,y,s,0\n-3,x,s,1\n')
    frame = load_csv(path, "y")
    assert frame.kind_of("a") == NUMERIC
    assert frame.kind_of("b") == CATEGORICAL
    assert frame.kind_of("y") == RESPONSE
    assert frame.column("a").dtype == np.float64
    assert frame.column_schema("b").declared_levels == ("x", "y")
    assert list(frame.column("c")) == ["q, r", "s", "s"]
    assert class_counts(frame) == (2, 1)


def test_declared_categorical_overrides_numeric_detection(tmp_path):
    path = write(tmp_path, "code,y\n3,1\n1,0\n3,0\n")
    frame = load_csv(path, "y", ["code"])
    assert frame.kind_of("code") == CATEGORICAL
    assert frame.column_schema("code").declared_levels == ("1", "3")


def test_header_only_gives_empty_frame(tmp_path):
    frame = load_csv(write(tmp_path, "a,b,y\n"), "y")
    assert frame.n_rows == 0
    assert class_counts(frame) == (0, 0)


def test_missing_file(tmp_path):
    with pytest.raises(MissingFileError):
        load_csv(tmp_path / "absent.csv", "y")


def test_missing_response_column(tmp_path):
    with pytest.raises(MissingColumnError):
        load_csv(write(tmp_path, "a,b\n1,2\n"), "y")


def test_bad_response_value(tmp_path):
    with pytest.raises(ResponseValueError):
        load_csv(write(tmp_path, "a,y\n1,0\n2,2\n"), "y")


def test_ragged_row(tmp_path):
    with pytest.raises(RaggedRowError):
        load_csv(write(tmp_path, "a,b,y\n1,2,0\n1,1\n"), "y")


def test_error_classes_are_distinct():
    kinds = {MissingFileError, MissingColumnError, ResponseValueError, RaggedRowError}
    assert len(kinds) == 4
    assert all(issubclass(k, DataError) for k in kinds)


def test_response_labels_and_delimiter(tmp_path):
    path = write(tmp_path, 'a;"y"\n1;"yes"\n2;"no"\n')
    frame = load_csv(path, "y", delimiter=";", response_labels={"yes": 1, "no": 0})
    assert list(frame.response) == [1, 0]


def test_drop_names(tmp_path):
    frame = load_csv(write(tmp_path, "ID,a,y\n1,5,0\n2,6,1\n"), "y", drop_names=["ID"])
    assert frame.feature_names == ("a",)


def test_sparse_missing_numeric_is_median_imputed(tmp_path):
    # 1 hole in 2000 rows is 0.05%, under the drop limit
    lines = ["a,b,y"] + [f"{i},{i % 3},{i % 2}" for i in range(2000)]
    lines[5] = ",4,0"
    frame = load_csv(write(tmp_path, "\n".join(lines) + "\n"), "y")
    assert frame.n_rows == 2000
    rest = np.array([i for i in range(2000) if i != 4], dtype=float)
    assert frame.column("a")[4] == np.median(rest)


def test_frequent_missing_numeric_rows_are_dropped(tmp_path):
    lines = ["a,y"] + [f"{i},{i % 2}" for i in range(100)]
    lines[3] = "NA,1"
    lines[7] = ",0"
    frame = load_csv(write(tmp_path, "\n".join(lines) + "\n"), "y")
    assert frame.n_rows == 98
    assert not np.isnan(frame.column("a")).any()


def test_missing_categorical_is_none(tmp_path):
    frame = load_csv(write(tmp_path, "c,y\nx,1\n,0\nNA,1\n"), "y", ["c"])
    assert list(frame.column("c")) == ["x", None, None]


def test_reload_is_value_identical(tmp_path):
    path = write(tmp_path, "a,b,y\n1,u,0\n2,v,1\n3,u,1\n")
    assert load_csv(path, "y") == load_csv(path, "y")


def test_frame_is_immutable(toy_frame):
    with pytest.raises(AttributeError):
        toy_frame.foo = 1
    with pytest.raises(ValueError):
        toy_frame.column("x0")[0] = 99.0


def test_feature_matrix_rejects_categoricals(tmp_path):
    frame = load_csv(write(tmp_path, "c,y\nx,1\nz,0\n"), "y")
    with pytest.raises(DataError):
        frame.feature_matrix()


def test_split_balanced_credit_sized():
    y = np.array([0] * 6636 + [1] * 6636)
    frame = numeric_frame(np.arange(y.size), y)
    train, test = split_train_test(frame, 0.2, seed=42)
    assert abs(train.n_rows - 10618) <= 1
    assert abs(test.n_rows - 2654) <= 1


def test_split_small_stratified():
    frame = numeric_frame(np.arange(10), [1] * 5 + [0] * 5)
    _, test = split_train_test(frame, 0.2, seed=3)
    assert class_counts(test) == (1, 1)


def test_split_deterministic(toy_frame):
    a = split_indices(toy_frame, 0.2, 11)
    b = split_indices(toy_frame, 0.2, 11)
    assert all(np.array_equal(x, z) for x, z in zip(a, b))


def test_split_errors():
    frame = numeric_frame(np.arange(4), [1, 1, 1, 1])
    with pytest.raises(DataError):
        split_train_test(frame, 0.2, 0)
    with pytest.raises(ConfigError):
        split_train_test(numeric_frame(np.arange(4), [0, 1, 0, 1]), 1.0, 0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=2, max_size=80), st.integers(0, 2**31), st.floats(0.05, 0.95))
def test_split_partition_is_exact(labels, seed, frac):
    y = np.array(labels)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    frame = numeric_frame(np.arange(y.size), y)
    train, test = split_indices(frame, frac, seed)
    assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(y.size))
    for label in (0, 1):
        size = int(np.sum(y == label))
        assert abs(int(np.sum(y[test] == label)) - frac * size) <= 1
    n_pos, n_neg = class_counts(frame)
    assert n_pos + n_neg == frame.n_rows

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from autostack.errors import DataError
from autostack.metrics import (EPS, MetricsReport, accuracy, auc, better, clip_probabilities,
                               error_rate, evaluate, f_score, log_loss, report, sort_key)
from oracles import auc_pairs


def test_auc_example_matches_pair_oracle():
    labels, scores = (0, 0, 1, 1), (0.1, 0.4, 0.35, 0.8)
    assert auc_pairs(labels, scores) == 0.75
    assert auc(labels, scores) == 0.75


def test_auc_edge_cases():
    assert auc([0, 1, 0, 1], [0.3] * 4) == 0.5
    assert auc([0, 0, 1], [0.1, 0.2, 0.9]) == 1.0
    with pytest.raises(DataError):
        auc([1, 1], [0.2, 0.3])


def test_accuracy_and_f_examples():
    labels, scores = (1, 0, 1, 0), (0.6, 0.7, 0.3, 0.2)
    assert accuracy(labels, scores, 0.5) == 0.5
    assert f_score(labels, scores, 0.5) == 0.5
    assert accuracy([1, 0], [0.9, 0.1]) == 1.0
    assert f_score([1, 0], [0.9, 0.1]) == 1.0
    assert f_score([1, 0], [0.1, 0.1]) == 0.0


def test_threshold_boundary_counts_positive():
    assert accuracy([1], [0.5]) == 1.0


def test_degenerate_inputs():
    with pytest.raises(DataError):
        accuracy([], [])
    with pytest.raises(DataError):
        f_score([0, 0], [0.1, 0.2])
    with pytest.raises(DataError):
        log_loss([0, 1], [0.5])


def test_log_loss_examples():
    assert math.isclose(log_loss([0, 1, 1], [0.5] * 3), math.log(2), rel_tol=0, abs_tol=1e-15)
    # -(ln 0.8 + ln 0.6) / 2 evaluated by hand
    assert abs(log_loss([1, 0], [0.8, 0.4]) - 0.3669845875401002) < 1e-12
    assert abs(log_loss([1, 0], [0.8, 0.4]) + (math.log(0.8) + math.log(0.6)) / 2) < 1e-15
    perfect = log_loss([1, 0], [1.0, 0.0])
    assert 0 < perfect < 1e-10


def test_clipping_bounds():
    p = clip_probabilities([0.0, 1.0, 0.3])
    assert p[0] == EPS and p[1] == 1 - EPS and p[2] == 0.3


def test_report_matches_individual_calls():
    rng = np.random.default_rng(0)
    y, s = rng.integers(0, 2, 50), rng.random(50)
    rep = report(y, s)
    assert rep == MetricsReport(auc(y, s), accuracy(y, s), f_score(y, s), log_loss(y, s), 0.5)
    assert rep.value("log_loss") == rep.log_loss
    with pytest.raises(KeyError):
        rep.value("mse")


def test_evaluate_constant_predictor(toy_frame):
    class Half:
        def predict_proba(self, frame):
            return np.full(frame.n_rows, 0.5)

    rep = evaluate(Half(), toy_frame)
    assert rep.auc == 0.5
    assert rep.accuracy == np.mean(toy_frame.response == 1)
    assert math.isclose(rep.log_loss, math.log(2), abs_tol=1e-15)


def test_report_rejects_non_finite():
    with pytest.raises(DataError):
        MetricsReport(float("nan"), 0.5, 0.5, 0.5)


def test_better_and_sort_key():
    assert better("log_loss", 0.1, 0.2) and not better("auc", 0.1, 0.2)
    assert sorted([0.3, 0.1, 0.2], key=lambda v: sort_key("auc", v)) == [0.3, 0.2, 0.1]
    assert sorted([0.3, 0.1, 0.2], key=lambda v: sort_key("log_loss", v)) == [0.1, 0.2, 0.3]


labelled = st.integers(2, 60).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 1), min_size=n, max_size=n),
    st.lists(st.integers(0, 1000).map(lambda k: k / 1000), min_size=n, max_size=n)))


@settings(max_examples=150, deadline=None)
@given(labelled)
def test_auc_invariant_under_increasing_maps(data):
    labels, scores = data
    labels[0], labels[1] = 0, 1
    s = np.array(scores)
    base = auc(labels, s)
    assert base == auc_pairs(labels, scores)
    assert abs(auc(labels, 2 * s + 1) - base) < 1e-12
    assert abs(auc(labels, s ** 3) - base) < 1e-12


@settings(max_examples=150, deadline=None)
@given(labelled)
def test_accuracy_plus_error_rate_and_log_loss_bounds(data):
    labels, scores = data
    assert accuracy(labels, scores) + error_rate(labels, scores) == 1.0
    assert log_loss(labels, scores) > 0

import numpy as np
import pytest

from autostack import bench
from autostack.errors import MissingFileError, SchemaMismatchError
from autostack.metrics import report
from autostack.synthetic import write_surrogate

TINY = dict(manual_grid_points=1, manual_random_draws=1, automl_max_models=4, k=3)


@pytest.fixture(scope="module")
def credit_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("credit")
    write_surrogate("credit_risk", d / bench.case_filename("credit_risk"), 700, seed=1)
    return d


@pytest.fixture(scope="module")
def credit_report(credit_dir):
    return bench.run_case_study(bench.case_config("credit_risk", credit_dir, **TINY))


def test_report_shape(credit_report):
    rep = credit_report
    n, n_neg, n_pos = rep.raw_counts
    assert n == 700 and n_neg + n_pos == 700
    assert rep.balanced_counts == (n_pos, n_pos)
    assert sum(rep.split_sizes) == 2 * n_pos
    methods = [m for _, m, _ in rep.rows()]
    assert methods[:3] == ["Random Forest", "Gradient Boosting", "Deep Learning"]
    assert len(rep.manual.base_reports) == 3
    assert len(rep.leaderboard) == 6
    assert set(rep.manual.winning_subset) <= {"RF", "GBM", "DL"}
    assert len(rep.manual.subset_scores) == 7


def test_deltas_are_stacked_minus_automl(credit_report):
    rep = credit_report
    for m, d in rep.deltas.items():
        assert d == rep.stacked_report.value(m) - rep.automl_report.value(m)


def test_metrics_recomputable_from_predictions(credit_report):
    names, table = credit_report.predictions_table()
    labels = table[:, 0]
    for j, name in enumerate(names[1:4], start=1):
        assert report(labels, table[:, j]) == credit_report.manual.base_reports[name]
    assert report(labels, table[:, 4]) == credit_report.stacked_report
    assert report(labels, table[:, 5]) == credit_report.automl_report


def test_same_config_twice_is_identical(credit_dir, credit_report):
    again = bench.run_case_study(bench.case_config("credit_risk", credit_dir, **TINY))
    assert again == credit_report


def test_arms_share_partitions(credit_dir, monkeypatch):
    cfg = bench.case_config("credit_risk", credit_dir, **TINY)
    expected = bench.prepare_case(cfg)
    seen = {}
    real_manual, real_automl = bench.run_manual_pipeline, bench.run_automl

    def manual(c, prepared):
        seen["manual"] = prepared
        return real_manual(c, prepared)

    def automl(run):
        seen["automl"] = run
        return real_automl(run)

    monkeypatch.setattr(bench, "run_manual_pipeline", manual)
    monkeypatch.setattr(bench, "run_automl", automl)
    bench.run_case_study(cfg)
    for train, test, folds in ((seen["manual"].train, seen["manual"].test, seen["manual"].folds),
                               (seen["automl"].train, seen["automl"].test, seen["automl"].folds)):
        assert train == expected.train and test == expected.test and folds == expected.folds


def test_round3_half_even():
    assert bench.round3(0.77649) == "0.776"
    assert bench.round3(0.0015) == "0.002"
    assert bench.round3(0.0025) == "0.002"
    assert bench.round3(1.0) == "1.000"


def test_csv_and_table_agree(credit_report):
    table = bench.emit_report(credit_report, "table").strip().splitlines()
    csv_text = bench.emit_report(credit_report, "csv")
    assert len(csv_text.strip().splitlines()) == len(table) - 1  # the table adds a rule line
    parsed = bench.parse_report_csv(csv_text)
    expected = [(c, m, {k: v[k] for k in ("auc", "accuracy", "f_score", "log_loss")})
                for c, m, v in credit_report.rows()]
    assert parsed == expected
    headline = table[0].split()
    assert headline[:3] == ["Case", "Study", "Method"]


def test_write_outputs(tmp_path, credit_report):
    paths = bench.write_outputs([credit_report], tmp_path)
    assert len(paths) == 3
    names, table = credit_report.predictions_table()
    saved = np.loadtxt(paths[2], delimiter=",", skiprows=1)
    assert np.array_equal(saved, table)


def test_summarize_seeds(credit_report):
    text = bench.summarize_seeds([credit_report, credit_report])
    assert text.startswith("2 seeds")
    assert "Stacked Ensemble" in text


def test_missing_file_and_schema_mismatch(tmp_path):
    with pytest.raises(MissingFileError) as err:
        bench.load_case_frame(bench.case_config("claims", tmp_path))
    assert "595212 rows" in str(err.value)
    path = tmp_path / bench.case_filename("marketing")
    path.write_text('age;"y"\n30;"no"\n40;"yes"\n')
    with pytest.raises(SchemaMismatchError) as err:
        bench.load_case_frame(bench.case_config("marketing", tmp_path))
    assert "16 features" in str(err.value) and "45211" in str(err.value)


@pytest.mark.parametrize("case", ["claims", "marketing"])
def test_surrogates_match_documented_schema(tmp_path, case):
    write_surrogate(case, tmp_path / bench.case_filename(case), 300, seed=0)
    cfg = bench.case_config(case, tmp_path)
    frame = bench.load_case_frame(cfg)
    assert len(frame.feature_names) == cfg.expected_features
    assert set(cfg.categorical) == set(frame.columns_of_kind("categorical"))

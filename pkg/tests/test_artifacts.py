import json

import numpy as np
import pytest

from metaqa.artifacts import (
    read_csv_report,
    read_feature_table,
    read_model,
    read_predictions,
    read_profile,
    read_score_report,
    write_csv_report,
    write_feature_table,
    write_model,
    write_predictions,
    write_profile,
    write_score_report,
)
from metaqa.errors import ArtifactError, FormatVersionError
from metaqa.forest import ForestParams, extract_features, fit_forest, predict_many
from metaqa.model import FEATURE_NAMES, QualityControl
from metaqa.profiler import build_profile_set
from metaqa.scoring import score_corpus
from metaqa.synthetic import synthetic_oer_corpus


@pytest.fixture(scope="module")
def corpus():
    return synthetic_oer_corpus(400, seed=2)


@pytest.fixture(scope="module")
def fitted(corpus):
    return build_profile_set(corpus)


@pytest.fixture(scope="module")
def model():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(200, 6))
    y = (X[:, 0] > 0).astype(int)
    return fit_forest(X, y, ForestParams(n_trees=100), seed=5)


def test_profile_round_trip(tmp_path, fitted, canned):
    for ps in (fitted, canned):
        path = tmp_path / "p.json"
        write_profile(path, ps)
        assert read_profile(path) == ps
        assert json.loads(path.read_text())["format"] == "metaqa-profile/1"


def test_model_round_trip_predictions(tmp_path, model):
    path = tmp_path / "m.json"
    write_model(path, model)
    again = read_model(path)
    assert again.trees == model.trees
    assert again.importances == model.importances and again.params == model.params
    X = np.random.default_rng(1).normal(size=(50, 6))
    assert predict_many(again, X)[0] == predict_many(model, X)[0]
    assert np.array_equal(predict_many(again, X)[1], predict_many(model, X)[1])


def test_truncated_model_rejected(tmp_path, model):
    path = tmp_path / "m.json"
    write_model(path, model)
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ArtifactError):
        read_model(path)


def test_version_mismatch_names_both(tmp_path, canned):
    path = tmp_path / "p.json"
    write_profile(path, canned)
    path.write_text(path.read_text().replace("metaqa-profile/1", "metaqa-profile/9"))
    with pytest.raises(FormatVersionError, match="metaqa-profile/1.*metaqa-profile/9"):
        read_profile(path)


def test_wrong_artifact_kind(tmp_path, canned):
    path = tmp_path / "p.json"
    write_profile(path, canned)
    with pytest.raises(FormatVersionError):
        read_model(path)


@pytest.mark.parametrize("suffix", [".jsonl", ".csv"])
def test_score_report_round_trip(tmp_path, corpus, fitted, suffix):
    reports = score_corpus(corpus[:50], fitted)
    path = tmp_path / f"s{suffix}"
    write_score_report(path, reports)
    assert read_score_report(path) == reports


def test_csv_report_header(tmp_path):
    path = tmp_path / "r.csv"
    write_csv_report(path, "demo", ["a", "b"], [[1, 0.1], ["x", 2.5]])
    assert path.read_text().splitlines()[0] == "# metaqa-report/1 demo"
    assert read_csv_report(path, "demo") == [{"a": "1", "b": "0.1"}, {"a": "x", "b": "2.5"}]
    with pytest.raises(ArtifactError):
        read_csv_report(path, "other")


def test_feature_table_round_trip(tmp_path, corpus, fitted):
    data = [extract_features(r, fitted) for r in corpus[:30]]
    path = tmp_path / "f.jsonl"
    write_feature_table(path, data, FEATURE_NAMES)
    assert read_feature_table(path) == (data, FEATURE_NAMES)


@pytest.mark.parametrize("suffix", [".jsonl", ".csv"])
def test_predictions_round_trip(tmp_path, suffix):
    rows = [("u1", QualityControl.WITH, 0.75), ("u2", QualityControl.WITHOUT, 0.5)]
    path = tmp_path / f"p{suffix}"
    write_predictions(path, rows)
    assert read_predictions(path) == rows


def test_missing_artifact(tmp_path):
    with pytest.raises(ArtifactError):
        read_profile(tmp_path / "none.json")

import json
import math
import random
from datetime import date

import pytest

from metaqa.artifacts import read_csv_report
from metaqa.errors import MetaqaError
from metaqa.forest import ForestModel, ForestParams, Tree
from metaqa.harness import (
    availability_crosstab,
    explore,
    length_histograms,
    rating_std,
    summarize_by_subject,
    validate_by_subject,
    write_explore_report,
    write_validation_report,
    yearly_control_proportion,
)
from metaqa.model import FIELDS, Field, OerRecord, QualityControl, VideoRecord
from metaqa.synthetic import synthetic_oer_corpus

W, O = QualityControl.WITH, QualityControl.WITHOUT


def test_crosstab_diagonal():
    recs = [OerRecord("a", level="l", quality_control=W), OerRecord("b", quality_control=O)]
    ct = availability_crosstab(recs)[Field.LEVEL]
    assert ct.get(W, True) == 1 and ct.get(O, False) == 1
    assert ct.get(W, False) == 0 and ct.get(O, True) == 0


def test_crosstab_all_present():
    rec = dict(title="t", description="d", subjects=("s",), level="l", languages=("en",),
               time_required="PT1H", accessibilities=("a",))
    recs = [OerRecord(f"u{i}", quality_control=(W if i % 2 else O), **rec) for i in range(6)]
    for ct in availability_crosstab(recs).values():
        assert ct.get(W, False) == 0 and ct.get(O, False) == 0
        assert ct.total == 6


def test_crosstab_sums_and_permutation():
    recs = synthetic_oer_corpus(300, seed=1) + [OerRecord("unk", title="t")]
    shuffled = recs[:]
    random.Random(0).shuffle(shuffled)
    a, b = availability_crosstab(recs), availability_crosstab(shuffled)
    assert a == b
    assert all(ct.total == len(recs) for ct in a.values())


def test_yearly_proportion_fixture():
    recs = [
        OerRecord("a", date_available=date(2019, 1, 1), quality_control=W),
        OerRecord("b", date_available=date(2019, 6, 1), quality_control=O),
        OerRecord("c", date_issued=date(2020, 2, 2), quality_control=W),
        OerRecord("d", quality_control=W),
    ]
    series = yearly_control_proportion(recs)
    assert series.points == [(2019, 0.5), (2020, 1.0)]
    assert series.excluded == 1


def test_yearly_no_dates():
    recs = [OerRecord(f"u{i}") for i in range(4)]
    series = yearly_control_proportion(recs)
    assert series.points == [] and series.excluded == 4


def test_yearly_synthetic_decreases():
    points = yearly_control_proportion(synthetic_oer_corpus(3000, seed=4)).points
    assert points[-1][1] < points[0][1]


def test_length_histogram_fixture():
    recs = [OerRecord(f"u{i}", title=t, quality_control=W) for i, t in enumerate(["a b", "c d", "a b c d e"])]
    recs.append(OerRecord("x", title="not counted at all", quality_control=O))
    hist = length_histograms(recs)
    assert hist[Field.TITLE] == {2: 2, 5: 1}
    assert hist[Field.SUBJECTS] == {}


def test_length_histogram_empty():
    assert all(h == {} for h in length_histograms([OerRecord("u", title="t", quality_control=O)]).values())


def video(url, rating, subjects, title="t"):
    return VideoRecord(url, title, rating=rating, subjects=subjects, length_seconds=60)


def test_identical_groups_give_zero():
    vids = [video("a", 4.0, ("s",)), video("b", 4.0, ("s",))]
    s = summarize_by_subject(vids, [W, O])
    row = s.rows[0]
    assert row.rating_difference == 0 and row.sign == "0" and row.valid


def test_group_means_difference():
    vids = [video("a", 0.8, ("s",)), video("b", 0.7, ("s",))]
    row = summarize_by_subject(vids, [W, O]).rows[0]
    assert row.rating_difference == pytest.approx(0.10)
    assert row.sign == "+"


def test_summary_semantics():
    vids = [
        video("a", 4.5, ("x", "y")), video("b", 4.0, ("x",)), video("c", 3.0, ("y",)),
        video("d", 4.9, ("y",)), video("e", 4.0, ("z",)),
    ]
    labels = [W, O, O, W, W]
    s = summarize_by_subject(vids, labels)
    rows = {r.subject: r for r in s.rows}
    assert rows["x"].rating_difference == pytest.approx(0.5)
    assert rows["y"].rating_difference == pytest.approx(4.7 - 3.0)
    assert rows["z"].sign == "0" and not rows["z"].valid
    # unweighted mean over subjects with both groups
    assert s.average_difference == pytest.approx((0.5 + 1.7) / 2)
    assert s.positive_count == 2 and s.negative_count == 0
    for r in s.rows:
        assert r.n_with + r.n_without == sum(r.subject in v.subjects for v in vids)
    assert (s.n_predicted_with, s.n_predicted_without) == (3, 2)


def test_validate_requires_subjects(canned):
    model = ForestModel([Tree([-1], [0.0], [-1], [-1], [[1, 0]])], 0, ForestParams(n_trees=1))
    with pytest.raises(MetaqaError):
        validate_by_subject([video("a", 4.0, ())], model, canned)


def test_validate_with_threshold_model(canned):
    # a single split on level availability
    tree = Tree([2, -1, -1], [0.5, 0.0, 0.0], [1, -1, -1], [2, -1, -1], [[2, 2], [2, 0], [0, 2]])
    model = ForestModel([tree], 0, ForestParams(n_trees=1))
    vids = [video("a", 4.8, ("s",), "Python for Beginners"), video("b", 4.1, ("s",), "Python tricks")]
    s = validate_by_subject(vids, model, canned)
    assert s.predictions == {"a": W, "b": O}
    assert s.rows[0].rating_difference == pytest.approx(0.7)


def test_rating_std():
    assert rating_std([video("a", 0.5, ("s",)), video("b", 1.0, ("s",))]) == pytest.approx(0.35355339, abs=1e-8)
    assert rating_std([video(f"v{i}", 3.0, ("s",)) for i in range(3)]) == 0
    with pytest.raises(MetaqaError):
        rating_std([video("a", 1.0, ("s",))])


def test_validation_report_file(tmp_path):
    vids = [video("a", 0.8, ("s",)), video("b", 0.7, ("s",))]
    path = tmp_path / "v.csv"
    write_validation_report(path, summarize_by_subject(vids, [W, O]))
    rows = read_csv_report(path, "validation")
    assert [r["subject"] for r in rows] == ["s", "Average"]
    assert rows[0]["sign"] == "+" and rows[0]["n_with"] == "1"


def test_explore_report_files(tmp_path):
    report = explore(synthetic_oer_corpus(200, seed=3))
    paths = write_explore_report(report, tmp_path, svg=True)
    names = {p.name for p in paths}
    assert {"availability_crosstab.csv", "yearly_control_proportion.csv", "length_histograms.csv", "summary.json"} <= names
    assert "histogram_title.svg" in names
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["corpus_size"] == 200
    rows = read_csv_report(tmp_path / "availability_crosstab.csv", "availability_crosstab")
    for f in FIELDS:
        assert sum(int(r["count"]) for r in rows if r["field"] == f.value) == 200

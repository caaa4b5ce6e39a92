"""Checks that only make sense on the published reference corpora; skipped when absent."""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from metaqa import cli
from metaqa.forest import SplitSpec, extract_features, split
from metaqa.harness import explore, histogram_mean, rating_std
from metaqa.ingest import parse_oer_corpus, parse_video_corpus
from metaqa.model import Field, QualityControl
from metaqa.profiler import build_profile_set
from metaqa.scoring import score_corpus

ROOT = Path(__file__).resolve().parents[1]


def _path(env: str, stem: str) -> Path:
    if os.environ.get(env):
        return Path(os.environ[env])
    for suffix in (".csv", ".jsonl"):
        if (ROOT / "data" / f"{stem}{suffix}").exists():
            return ROOT / "data" / f"{stem}{suffix}"
    pytest.skip(f"{env} not set and no data/{stem}.csv")


@pytest.fixture(scope="module")
def oer():
    records, _ = parse_oer_corpus(_path("METAQA_SKILLSCOMMONS", "skillscommons"))
    return records


@pytest.fixture(scope="module")
def videos():
    records, _ = parse_video_corpus(_path("METAQA_VIDEOS", "videos"))
    return records


def test_corpus_counts(oer):
    assert len(oer) == 8887
    assert sum(r.quality_control is QualityControl.WITH for r in oer) == 4651
    assert sum(r.quality_control is QualityControl.WITHOUT for r in oer) == 4236


def test_video_counts(videos):
    assert len(videos) == 884
    assert len({s for v in videos for s in v.subjects}) == 32


def test_rating_std(videos):
    assert abs(rating_std(videos) - 0.25) <= 0.05


def test_all_reports_satisfy_invariant(oer):
    reports = score_corpus(oer, build_profile_set(oer))
    assert len(reports) == 8887
    assert all(r.norm_score <= r.avail_score for r in reports)


def test_split_size(oer):
    data = [extract_features(r, build_profile_set(oer), for_training=True) for r in oer]
    train, _ = split(data, SplitSpec(0.8, True, cli.DEFAULT_SEED))
    assert len(train) in (7109, 7110)


def test_exploration_narrative(oer):
    report = explore(oer)
    level = report.crosstab[Field.LEVEL]
    assert level.get(QualityControl.WITH, True) > 4000
    assert 2500 <= level.get(QualityControl.WITHOUT, False) <= 3500
    points = report.yearly.points
    assert points[-1][1] < points[0][1]
    assert abs(histogram_mean(report.histograms[Field.TITLE]) - 5.5) <= 0.5
    assert abs(histogram_mean(report.histograms[Field.SUBJECTS]) - 4.5) <= 0.5

"""Exploratory reports over an OER corpus and cross-repository validation."""

from __future__ import annotations

import json
import math
import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import REPORT_FORMAT
from .artifacts import write_csv_report
from .errors import MetaqaError
from .forest import ForestModel, extract_features, feature_matrix, predict_many
from .ingest import MappingRules, video_to_oer
from .model import FIELDS, LENGTH_FIELDS, Field, OerRecord, ProfileSet, QualityControl, VideoRecord

# -- exploration ----------------------------------------------------------------


@dataclass(frozen=True)
class FieldCrosstab:
    """Counts of records per (quality-control label, field available)."""

    field: Field
    counts: dict[tuple[QualityControl, bool], int]

    def get(self, label: QualityControl, available: bool) -> int:
        return self.counts.get((label, available), 0)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def availability_crosstab(records: Sequence[OerRecord]) -> dict[Field, FieldCrosstab]:
    out = {}
    for f in FIELDS:
        counts: Counter = Counter((r.quality_control, r.is_available(f)) for r in records)
        cells = {(q, a): counts.get((q, a), 0) for q in (QualityControl.WITH, QualityControl.WITHOUT) for a in (True, False)}
        for (q, a), c in counts.items():
            if q is QualityControl.UNKNOWN:
                cells[(q, a)] = c
        out[f] = FieldCrosstab(f, cells)
    return out


def record_year(record: OerRecord) -> Optional[int]:
    d: Optional[date] = record.date_available or record.date_issued
    return d.year if d else None


@dataclass(frozen=True)
class YearlySeries:
    points: list[tuple[int, float]]
    totals: dict[int, int]
    excluded: int  # records without any usable date


def yearly_control_proportion(records: Sequence[OerRecord]) -> YearlySeries:
    """Share of WithControl records per calendar year.

    The year comes from ``date_available``, falling back to ``date_issued``.
    """
    controlled: Counter = Counter()
    totals: Counter = Counter()
    excluded = 0
    for r in records:
        year = record_year(r)
        if year is None:
            excluded += 1
            continue
        totals[year] += 1
        if r.quality_control is QualityControl.WITH:
            controlled[year] += 1
    points = [(y, controlled[y] / totals[y]) for y in sorted(totals)]
    return YearlySeries(points, dict(sorted(totals.items())), excluded)


def length_histograms(records: Sequence[OerRecord]) -> dict[Field, dict[int, int]]:
    """Integer-binned length counts over the WithControl records where the field is present."""
    controlled = [r for r in records if r.quality_control is QualityControl.WITH]
    return {
        f: dict(sorted(Counter(r.length(f) for r in controlled if r.is_available(f)).items()))
        for f in LENGTH_FIELDS
    }


def histogram_mean(hist: dict[int, int]) -> float:
    n = sum(hist.values())
    return math.fsum(k * c for k, c in hist.items()) / n if n else math.nan


@dataclass
class ExploreReport:
    crosstab: dict[Field, FieldCrosstab]
    yearly: YearlySeries
    histograms: dict[Field, dict[int, int]]
    corpus_size: int


def explore(records: Sequence[OerRecord]) -> ExploreReport:
    return ExploreReport(
        availability_crosstab(records),
        yearly_control_proportion(records),
        length_histograms(records),
        len(records),
    )


def _svg_histogram(title: str, hist: dict[int, int], width: int = 480, height: int = 240) -> str:
    pad = 30
    if not hist:
        bars = ""
    else:
        lo, hi = min(hist), max(hist)
        span = hi - lo + 1
        top = max(hist.values())
        bw = (width - 2 * pad) / span
        bars = "".join(
            f'<rect x="{pad + (k - lo) * bw:.2f}" y="{height - pad - (c / top) * (height - 2 * pad):.2f}" '
            f'width="{max(bw - 1, 0.5):.2f}" height="{(c / top) * (height - 2 * pad):.2f}" fill="#4c72b0"/>'
            for k, c in hist.items()
        )
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">'
        f'<text x="{pad}" y="18" font-size="13">{title}</text>{bars}'
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/></svg>\n'
    )


def write_explore_report(report: ExploreReport, out_dir, svg: bool = False) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    path = out_dir / "availability_crosstab.csv"
    rows = []
    for f, ct in report.crosstab.items():
        for (q, a), c in sorted(ct.counts.items(), key=lambda kv: (kv[0][0].value, not kv[0][1])):
            rows.append([f.value, q.value, "available" if a else "missing", c])
    write_csv_report(path, "availability_crosstab", ["field", "quality_control", "availability", "count"], rows)
    written.append(path)

    path = out_dir / "yearly_control_proportion.csv"
    write_csv_report(
        path,
        "yearly_control_proportion",
        ["year", "proportion_with_control", "n_records"],
        ([y, p, report.yearly.totals[y]] for y, p in report.yearly.points),
    )
    written.append(path)

    path = out_dir / "length_histograms.csv"
    write_csv_report(
        path,
        "length_histograms",
        ["field", "length", "count"],
        ([f.value, k, c] for f, h in report.histograms.items() for k, c in h.items()),
    )
    written.append(path)

    summary = {
        "format": REPORT_FORMAT,
        "kind": "explore_summary",
        "corpus_size": report.corpus_size,
        "records_without_date": report.yearly.excluded,
        "year_source": "date_available, falling back to date_issued",
        "availability_by_control": {
            f.value: {f"{q.value}/{'available' if a else 'missing'}": c for (q, a), c in ct.counts.items()}
            for f, ct in report.crosstab.items()
        },
        "length_means_with_control": {f.value: histogram_mean(h) if h else None for f, h in report.histograms.items()},
    }
    path = out_dir / "summary.json"
    path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    written.append(path)

    if svg:
        for f, h in report.histograms.items():
            path = out_dir / f"histogram_{f.value}.svg"
            path.write_text(_svg_histogram(f"{f.value} length (WithControl)", h), encoding="utf-8")
            written.append(path)
    return written


# -- validation -----------------------------------------------------------------


@dataclass(frozen=True)
class SubjectValidationRow:
    subject: str
    mean_rating_with: float  # nan when the group is empty
    mean_rating_without: float
    rating_difference: float
    sign: str  # "+", "-" or "0"
    n_with: int
    n_without: int

    @property
    def valid(self) -> bool:
        return self.n_with > 0 and self.n_without > 0


@dataclass
class ValidationSummary:
    rows: list[SubjectValidationRow]
    average_difference: float
    positive_count: int
    negative_count: int
    n_predicted_with: int
    n_predicted_without: int
    predictions: dict[str, QualityControl] = field(default_factory=dict)

    @property
    def n_valid_subjects(self) -> int:
        return sum(1 for r in self.rows if r.valid)

    def table(self) -> str:
        lines = [f"{'subject':<28}{'difference':>12}{'sign':>6}{'n_with':>8}{'n_without':>11}"]
        for r in self.rows:
            lines.append(f"{r.subject:<28}{r.rating_difference:>12.3f}{r.sign:>6}{r.n_with:>8}{r.n_without:>11}")
        avg_sign = _sign(self.average_difference) if not math.isnan(self.average_difference) else "0"
        lines.append(f"{'Average':<28}{self.average_difference:>12.3f}{avg_sign:>6}")
        lines.append(
            f"predicted WithControl {self.n_predicted_with}, WithoutControl {self.n_predicted_without}; "
            f"positive in {self.positive_count} of {self.n_valid_subjects} subjects"
        )
        return "\n".join(lines)


def _sign(x: float) -> str:
    return "+" if x > 0 else "-" if x < 0 else "0"


def classify_videos(
    videos: Sequence[VideoRecord], model: ForestModel, profiles: ProfileSet, rules: MappingRules = MappingRules()
) -> list[QualityControl]:
    if not videos:
        return []
    feats = [extract_features(video_to_oer(v, rules), profiles) for v in videos]
    labels, _ = predict_many(model, feature_matrix(feats))
    return labels


def summarize_by_subject(videos: Sequence[VideoRecord], labels: Sequence[QualityControl]) -> ValidationSummary:
    """Per-subject mean rating of the predicted-WithControl group minus the other group.

    Subjects where either group is empty get sign "0" and are left out of the
    average and the sign tally. The average is unweighted across subjects.
    """
    groups: dict[str, dict[QualityControl, list[float]]] = defaultdict(
        lambda: {QualityControl.WITH: [], QualityControl.WITHOUT: []}
    )
    for v, label in zip(videos, labels):
        for s in dict.fromkeys(v.subjects):
            groups[s][label].append(v.rating)
    rows = []
    for subject in sorted(groups):
        w, o = groups[subject][QualityControl.WITH], groups[subject][QualityControl.WITHOUT]
        mw = statistics.fmean(w) if w else math.nan
        mo = statistics.fmean(o) if o else math.nan
        if w and o:
            diff = mw - mo
            sign = _sign(diff)
        else:
            diff, sign = 0.0, "0"
        rows.append(SubjectValidationRow(subject, mw, mo, diff, sign, len(w), len(o)))
    valid = [r for r in rows if r.valid]
    avg = statistics.fmean(r.rating_difference for r in valid) if valid else math.nan
    return ValidationSummary(
        rows=rows,
        average_difference=avg,
        positive_count=sum(1 for r in valid if r.sign == "+"),
        negative_count=sum(1 for r in valid if r.sign == "-"),
        n_predicted_with=sum(1 for l in labels if l is QualityControl.WITH),
        n_predicted_without=sum(1 for l in labels if l is QualityControl.WITHOUT),
        predictions={v.url: l for v, l in zip(videos, labels)},
    )


def validate_by_subject(
    videos: Sequence[VideoRecord],
    model: ForestModel,
    profiles: ProfileSet,
    rules: MappingRules = MappingRules(),
) -> ValidationSummary:
    for v in videos:
        if not v.subjects:
            raise MetaqaError(f"video {v.url} has no subject")
    return summarize_by_subject(videos, classify_videos(videos, model, profiles, rules))


def rating_std(videos: Sequence[VideoRecord]) -> float:
    if len(videos) < 2:
        raise MetaqaError(f"need at least 2 videos for a standard deviation, got {len(videos)}")
    return statistics.stdev(v.rating for v in videos)


def write_validation_report(path, summary: ValidationSummary) -> None:
    rows: list[list] = [
        [r.subject, r.rating_difference, r.sign, r.n_with, r.n_without, r.mean_rating_with, r.mean_rating_without]
        for r in summary.rows
    ]
    avg = summary.average_difference
    rows.append(["Average", avg, _sign(avg) if not math.isnan(avg) else "0",
                 summary.n_predicted_with, summary.n_predicted_without, "", ""])
    write_csv_report(
        path,
        "validation",
        ["subject", "rating_difference", "sign", "n_with", "n_without", "mean_rating_with", "mean_rating_without"],
        rows,
    )

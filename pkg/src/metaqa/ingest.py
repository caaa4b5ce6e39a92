"""Parse raw corpus files into canonical records.

Two input layouts are accepted:

* ``jsonl``: one JSON object per line, keys named exactly as the record
  attributes. An absent field is simply omitted (``null`` is tolerated).
* ``csv``: a header row using the same names. List-valued columns
  (``subjects``, ``accessibilities``, ``languages``) hold ``|``-separated
  entries. Columns missing from the header are treated as absent.

The canonical on-disk form written by :func:`write_oer_records` is the jsonl
layout, so ``parse_oer_corpus(write_oer_records(...))`` round-trips.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Optional, Sequence

from .errors import CorpusError
from .model import OerRecord, QualityControl, VideoRecord

log = logging.getLogger(__name__)

LIST_DELIMITER = "|"
MAX_MALFORMED_FRACTION = 0.10

OER_COLUMNS = (
    "url",
    "title",
    "description",
    "educational_type",
    "date_available",
    "date_issued",
    "subjects",
    "level",
    "time_required",
    "accessibilities",
    "languages",
    "quality_control",
)
VIDEO_COLUMNS = (
    "url",
    "title",
    "description",
    "dislikes",
    "length_seconds",
    "likes",
    "rating",
    "subjects",
    "views",
)
_LIST_COLUMNS = {"subjects", "accessibilities", "languages"}

_QC_ALIASES = {
    "withcontrol": QualityControl.WITH,
    "with control": QualityControl.WITH,
    "with_control": QualityControl.WITH,
    "controlled": QualityControl.WITH,
    "1": QualityControl.WITH,
    "true": QualityControl.WITH,
    "yes": QualityControl.WITH,
    "withoutcontrol": QualityControl.WITHOUT,
    "without control": QualityControl.WITHOUT,
    "without_control": QualityControl.WITHOUT,
    "uncontrolled": QualityControl.WITHOUT,
    "0": QualityControl.WITHOUT,
    "false": QualityControl.WITHOUT,
    "no": QualityControl.WITHOUT,
    "unknown": QualityControl.UNKNOWN,
    "": QualityControl.UNKNOWN,
}


class Source(str, Enum):
    SKILLS_COMMONS = "SkillsCommons"
    VIDEO_PLATFORM = "VideoPlatform"
    GENERIC = "Generic"


@dataclass
class CorpusManifest:
    source: Source
    record_count: int = 0
    fields_present: list[str] = field(default_factory=list)
    rejected_count: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def input_count(self) -> int:
        return self.record_count + self.rejected_count

    def summary(self) -> str:
        return (
            f"{self.source.value}: {self.record_count} records, "
            f"{self.rejected_count} rejected, {len(self.warnings)} warnings"
        )


DEFAULT_LEVEL_KEYWORDS = (
    "beginner",
    "intermediate",
    "advanced",
    "intro",
    "introduction",
    "basics",
    "fundamentals",
    "101",
)


@dataclass(frozen=True)
class MappingRules:
    """How video properties stand in for OER metadata fields.

    A title word starting with any of ``level_keywords`` (case-insensitive)
    marks the level as available, so "beginner" also matches "Beginners".
    """

    level_keywords: tuple[str, ...] = DEFAULT_LEVEL_KEYWORDS
    language: Optional[str] = None
    accessibilities: tuple[str, ...] = ()

    def match_level(self, title: Optional[str]) -> Optional[str]:
        if not title or not self.level_keywords:
            return None
        for kw in self.level_keywords:
            if re.search(r"(?<!\w)" + re.escape(kw.lower()), title.lower()):
                return kw.lower()
        return None


def video_to_oer(video: VideoRecord, rules: MappingRules = MappingRules()) -> OerRecord:
    return OerRecord(
        url=video.url,
        title=video.title,
        description=video.description,
        educational_type="video",
        subjects=video.subjects,
        level=rules.match_level(video.title),
        # every video carries a length, so the field always counts as present
        time_required=f"PT{int(round(video.length_seconds))}S",
        languages=(rules.language,) if rules.language else (),
        accessibilities=rules.accessibilities,
        quality_control=QualityControl.UNKNOWN,
    )


# -- raw row access -----------------------------------------------------------


def _iter_rows(path: Path, fmt: str) -> Iterator[tuple[int, Optional[dict], Optional[str], list[str]]]:
    """Yield ``(line_no, row, error, header)``; ``row`` is None on a malformed line."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    with fh:
        if fmt == "jsonl":
            for no, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    yield no, None, f"invalid JSON ({exc.msg})", []
                    continue
                if not isinstance(obj, dict):
                    yield no, None, "line is not a JSON object", []
                    continue
                yield no, obj, None, list(obj)
        elif fmt == "csv":
            reader = csv.DictReader(fh)
            header = list(reader.fieldnames or [])
            for row in reader:
                no = reader.line_num
                if None in row:
                    yield no, None, "more cells than header columns", header
                elif any(v is None for v in row.values()):
                    yield no, None, "fewer cells than header columns", header
                else:
                    yield no, _csv_row(row), None, header
        else:
            raise CorpusError(f"unknown format {fmt!r}; expected csv or jsonl")


def _csv_row(row: dict[str, str]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in row.items():
        key = key.strip()
        if key in _LIST_COLUMNS:
            out[key] = [v for v in value.split(LIST_DELIMITER)]
        else:
            out[key] = value
    return out


def _optional_str(value: Any) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, (dict, list)):
        raise ValueError(f"expected text, got {type(value).__name__}")
    return str(value)


def _as_list(value: Any) -> list[str]:
    if value is None or value == "":
        return []
    if isinstance(value, str):
        return value.split(LIST_DELIMITER)
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value if v is not None]
    raise ValueError(f"expected list, got {type(value).__name__}")


def _parse_date(value: Any, what: str, warnings: list[str]) -> Optional[date]:
    text = _optional_str(value)
    if text is None or not text.strip():
        return None
    text = text.strip()
    try:
        # tolerate full timestamps by keeping the calendar part
        return date.fromisoformat(text[:10])
    except ValueError:
        warnings.append(f"unparseable {what} {text!r} treated as absent")
        log.warning("unparseable %s %r treated as absent", what, text)
        return None


def _parse_qc(value: Any) -> QualityControl:
    if value is None:
        return QualityControl.UNKNOWN
    if isinstance(value, bool):
        return QualityControl.WITH if value else QualityControl.WITHOUT
    key = str(value).strip().lower()
    try:
        return _QC_ALIASES[key]
    except KeyError:
        raise ValueError(f"unrecognised quality_control value {value!r}") from None


def oer_from_dict(row: dict[str, Any], warnings: Optional[list[str]] = None) -> OerRecord:
    warnings = warnings if warnings is not None else []
    return OerRecord(
        url=_optional_str(row.get("url")) or "",
        title=_optional_str(row.get("title")),
        description=_optional_str(row.get("description")),
        educational_type=_optional_str(row.get("educational_type")),
        date_available=_parse_date(row.get("date_available"), "date_available", warnings),
        date_issued=_parse_date(row.get("date_issued"), "date_issued", warnings),
        subjects=_as_list(row.get("subjects")),
        level=_optional_str(row.get("level")),
        time_required=_optional_str(row.get("time_required")),
        accessibilities=_as_list(row.get("accessibilities")),
        languages=_as_list(row.get("languages")),
        quality_control=_parse_qc(row.get("quality_control")),
    )


def oer_to_dict(rec: OerRecord) -> dict[str, Any]:
    """Canonical jsonl object: absent fields omitted, keys in schema order."""
    out: dict[str, Any] = {}
    for name in OER_COLUMNS:
        value = getattr(rec, name)
        if value is None or value == ():
            continue
        if isinstance(value, date):
            value = value.isoformat()
        elif isinstance(value, tuple):
            value = list(value)
        elif isinstance(value, QualityControl):
            value = value.value
        out[name] = value
    return out


def _num(value: Any, name: str, integer: bool) -> float:
    if value is None or (isinstance(value, str) and not value.strip()):
        return 0
    if isinstance(value, bool):
        raise ValueError(f"{name}: expected a number")
    x = float(value)
    if integer:
        if x != int(x):
            raise ValueError(f"{name}: expected a whole number, got {value!r}")
        return int(x)
    return x


def video_from_dict(row: dict[str, Any]) -> VideoRecord:
    if "rating" not in row or row["rating"] in (None, ""):
        raise ValueError("rating missing")
    length = row.get("length_seconds", row.get("length"))
    return VideoRecord(
        url=_optional_str(row.get("url")) or "",
        title=_optional_str(row.get("title")) or "",
        description=_optional_str(row.get("description")),
        dislikes=_num(row.get("dislikes"), "dislikes", True),
        length_seconds=_num(length, "length_seconds", False),
        likes=_num(row.get("likes"), "likes", True),
        rating=_num(row.get("rating"), "rating", False),
        subjects=_as_list(row.get("subjects")),
        views=_num(row.get("views"), "views", True),
    )


def video_to_dict(v: VideoRecord) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for name in VIDEO_COLUMNS:
        value = getattr(v, name)
        if value is None:
            continue
        out[name] = list(value) if isinstance(value, tuple) else value
    return out


def _format_for(path: Path, fmt: Optional[str]) -> str:
    if fmt:
        return fmt
    return "csv" if path.suffix.lower() == ".csv" else "jsonl"


# -- public parsers -----------------------------------------------------------


def parse_oer_corpus(
    path, fmt: Optional[str] = None, source: Source = Source.SKILLS_COMMONS
) -> tuple[list[OerRecord], CorpusManifest]:
    """Read an OER corpus.

    Malformed rows (bad JSON, ragged CSV, missing or duplicate url, an
    unrecognised quality-control value) are skipped and counted. More than
    10% malformed rows is fatal.
    """
    path = Path(path)
    fmt = _format_for(path, fmt)
    manifest = CorpusManifest(source=source)
    records: list[OerRecord] = []
    seen: set[str] = set()
    observed: dict[str, None] = {}
    for no, row, error, header in _iter_rows(path, fmt):
        for key in header:
            observed.setdefault(key)
        if row is not None:
            try:
                rec = oer_from_dict(row, manifest.warnings)
                if rec.url in seen:
                    raise ValueError(f"duplicate url {rec.url!r}")
            except (ValueError, TypeError) as exc:
                error = str(exc)
            else:
                seen.add(rec.url)
                records.append(rec)
                continue
        manifest.rejected_count += 1
        manifest.warnings.append(f"{path}:{no}: skipped malformed row: {error}")
        log.warning("%s:%d: skipped malformed row: %s", path, no, error)

    total = manifest.rejected_count + len(records)
    if total and manifest.rejected_count / total > MAX_MALFORMED_FRACTION:
        raise CorpusError(
            f"{path}: {manifest.rejected_count} of {total} rows malformed "
            f"(limit {MAX_MALFORMED_FRACTION:.0%})"
        )
    manifest.record_count = len(records)
    manifest.fields_present = [c for c in OER_COLUMNS if c in observed]
    return records, manifest


def parse_video_corpus(path, fmt: Optional[str] = None) -> tuple[list[VideoRecord], CorpusManifest]:
    """Read a video corpus; out-of-range ratings and negative counts are rejected, never clamped."""
    path = Path(path)
    fmt = _format_for(path, fmt)
    manifest = CorpusManifest(source=Source.VIDEO_PLATFORM)
    records: list[VideoRecord] = []
    observed: dict[str, None] = {}
    for no, row, error, header in _iter_rows(path, fmt):
        for key in header:
            observed.setdefault(key)
        if row is not None:
            try:
                records.append(video_from_dict(row))
                continue
            except (ValueError, TypeError) as exc:
                error = str(exc)
        manifest.rejected_count += 1
        manifest.warnings.append(f"{path}:{no}: rejected video: {error}")
        log.warning("%s:%d: rejected video: %s", path, no, error)
    manifest.record_count = len(records)
    manifest.fields_present = [c for c in VIDEO_COLUMNS if c in observed]
    return records, manifest


def _write_jsonl(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def write_oer_records(path, records: Sequence[OerRecord]) -> None:
    _write_jsonl(path, (oer_to_dict(r) for r in records))


def write_video_records(path, videos: Sequence[VideoRecord]) -> None:
    _write_jsonl(path, (video_to_dict(v) for v in videos))

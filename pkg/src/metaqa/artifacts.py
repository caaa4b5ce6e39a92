"""Read and write versioned artifacts: profiles, models, reports, feature tables.

JSON artifacts carry a top-level ``format`` key. Line-delimited artifacts
start with a header object carrying it, and CSV reports start with a
``# <format> <kind>`` comment line. Floats are written with ``repr`` so every
artifact round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from . import FEATURES_FORMAT, MODEL_FORMAT, PROFILE_FORMAT, REPORT_FORMAT
from .errors import ArtifactError, FormatVersionError
from .forest import ForestModel, ForestParams, Tree
from .model import (
    FIELDS,
    BooleanRating,
    Field,
    FieldProfile,
    LabeledFeatures,
    NormalFit,
    ProfileSet,
    QualityControl,
    ScoreReport,
)


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_json(path, expected: str) -> dict:
    text = _read_text(path)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        found = _sniff_format(text)
        if found is not None and found != expected:
            raise FormatVersionError(expected, found) from None
        raise ArtifactError(f"{path}: not a valid {expected} file ({exc.msg} at line {exc.lineno})") from None
    _check_format(obj, expected)
    return obj


def _sniff_format(text: str) -> Optional[str]:
    # best effort on a damaged file: the format tag is written first
    marker = '"format":'
    i = text.find(marker)
    if i < 0:
        return None
    rest = text[i + len(marker):].lstrip()
    if not rest.startswith('"'):
        return None
    end = rest.find('"', 1)
    return rest[1:end] if end > 0 else None


def _check_format(obj: Any, expected: str) -> None:
    found = obj.get("format") if isinstance(obj, dict) else None
    if found != expected:
        raise FormatVersionError(expected, found)


def _dumps(obj: Any, compact: bool = False) -> str:
    if compact:
        return json.dumps(obj, ensure_ascii=False, separators=(",", ":")) + "\n"
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


# -- profiles -------------------------------------------------------------------


def profile_to_dict(ps: ProfileSet) -> dict:
    profiles = []
    for p in ps.profiles:
        if isinstance(p.rating_fn, NormalFit):
            fn = {"kind": "normal", "mean": p.rating_fn.mean, "scale": p.rating_fn.scale}
        else:
            fn = {"kind": "boolean"}
        profiles.append(
            {
                "field": p.field.value,
                "importance_rate": p.importance_rate,
                "normalized_importance_rate": p.normalized_importance_rate,
                "rating_fn": fn,
            }
        )
    return {
        "format": PROFILE_FORMAT,
        "canned": ps.canned,
        "source_corpus_size": ps.source_corpus_size,
        "controlled_subset_size": ps.controlled_subset_size,
        "provenance": dict(ps.provenance),
        "profiles": profiles,
    }


def profile_from_dict(obj: dict) -> ProfileSet:
    _check_format(obj, PROFILE_FORMAT)
    try:
        profiles = []
        for p in obj["profiles"]:
            fn = p["rating_fn"]
            if fn["kind"] == "normal":
                rating_fn = NormalFit(float(fn["mean"]), float(fn["scale"]))
            elif fn["kind"] == "boolean":
                rating_fn = BooleanRating()
            else:
                raise ValueError(f"unknown rating function {fn['kind']!r}")
            profiles.append(
                FieldProfile(
                    Field(p["field"]),
                    float(p["importance_rate"]),
                    float(p["normalized_importance_rate"]),
                    rating_fn,
                )
            )
        return ProfileSet(
            tuple(profiles),
            source_corpus_size=int(obj["source_corpus_size"]),
            controlled_subset_size=int(obj["controlled_subset_size"]),
            canned=bool(obj["canned"]),
            provenance=dict(obj.get("provenance", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"invalid profile: {exc}") from exc


def write_profile(path, ps: ProfileSet) -> None:
    _write_text(path, _dumps(profile_to_dict(ps)))


def read_profile(path) -> ProfileSet:
    return profile_from_dict(_load_json(path, PROFILE_FORMAT))


# -- models ---------------------------------------------------------------------


def model_to_dict(model: ForestModel) -> dict:
    p = model.params
    return {
        "format": MODEL_FORMAT,
        "seed": model.seed,
        "params": {
            "n_trees": p.n_trees,
            "max_depth": p.max_depth,
            "min_samples_leaf": p.min_samples_leaf,
            "max_features": p.max_features,
            "bootstrap": p.bootstrap,
        },
        "feature_names": list(model.feature_names),
        "importances": list(model.importances),
        "importances_degenerate": model.importances_degenerate,
        "single_class": model.single_class.value if model.single_class else None,
        "provenance": model.provenance,
        "trees": [t.to_dict() for t in model.trees],
    }


def model_from_dict(obj: dict) -> ForestModel:
    _check_format(obj, MODEL_FORMAT)
    try:
        params = ForestParams(**obj["params"])
        trees = [Tree.from_dict(t) for t in obj["trees"]]
        if len(trees) != params.n_trees:
            raise ValueError(f"expected {params.n_trees} trees, found {len(trees)}")
        single = obj.get("single_class")
        return ForestModel(
            trees=trees,
            seed=int(obj["seed"]),
            params=params,
            feature_names=tuple(obj["feature_names"]),
            importances=tuple(float(v) for v in obj["importances"]),
            importances_degenerate=bool(obj["importances_degenerate"]),
            single_class=QualityControl(single) if single else None,
            provenance=dict(obj.get("provenance", {})),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"invalid model: {exc}") from exc


def write_model(path, model: ForestModel) -> None:
    _write_text(path, _dumps(model_to_dict(model), compact=True))


def read_model(path) -> ForestModel:
    return model_from_dict(_load_json(path, MODEL_FORMAT))


# -- line-delimited and CSV reports -------------------------------------------


def _write_jsonl(path, header: dict, rows: Iterable[dict]) -> None:
    parts = [_dumps(header, compact=True)]
    parts.extend(_dumps(r, compact=True) for r in rows)
    _write_text(path, "".join(parts))


def _read_jsonl(path, expected: str) -> tuple[dict, list[dict]]:
    lines = [ln for ln in _read_text(path).splitlines() if ln.strip()]
    if not lines:
        raise FormatVersionError(expected, None)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError:
        raise FormatVersionError(expected, None) from None
    _check_format(header, expected)
    try:
        return header, [json.loads(ln) for ln in lines[1:]]
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: malformed line ({exc.msg})") from None


def write_csv_report(path, kind: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    buf = io.StringIO()
    buf.write(f"# {REPORT_FORMAT} {kind}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    _write_text(path, buf.getvalue())


def read_csv_report(path, kind: str) -> list[dict[str, str]]:
    text = _read_text(path)
    first, _, body = text.partition("\n")
    tag = first[1:].split() if first.startswith("#") else []
    found = tag[0] if tag else None
    if found != REPORT_FORMAT:
        raise FormatVersionError(REPORT_FORMAT, found)
    if len(tag) < 2 or tag[1] != kind:
        raise ArtifactError(f"{path}: expected a {kind!r} report, found {tag[1:] or 'none'}")
    return list(csv.DictReader(io.StringIO(body)))


def _is_csv(path, fmt: Optional[str]) -> bool:
    return (fmt or ("csv" if Path(path).suffix.lower() == ".csv" else "jsonl")) == "csv"


_SCORE_COLUMNS = (
    ["url", "avail_score", "norm_score"]
    + [f"rating_{f.value}" for f in FIELDS]
    + [f"available_{f.value}" for f in FIELDS]
)


def write_score_report(
    path, reports: Sequence[ScoreReport], fmt: Optional[str] = None, provenance: Optional[Mapping] = None
) -> None:
    if _is_csv(path, fmt):
        rows = (
            [r.url, r.avail_score, r.norm_score]
            + [r.per_field_rating[f] for f in FIELDS]
            + [int(r.per_field_available[f]) for f in FIELDS]
            for r in reports
        )
        write_csv_report(path, "scores", _SCORE_COLUMNS, rows)
        return
    header = {"format": REPORT_FORMAT, "kind": "scores", "provenance": dict(provenance or {})}
    rows = (
        {
            "url": r.url,
            "avail_score": r.avail_score,
            "norm_score": r.norm_score,
            "ratings": {f.value: r.per_field_rating[f] for f in FIELDS},
            "available": {f.value: r.per_field_available[f] for f in FIELDS},
        }
        for r in reports
    )
    _write_jsonl(path, header, rows)


def read_score_report(path, fmt: Optional[str] = None) -> list[ScoreReport]:
    try:
        if _is_csv(path, fmt):
            return [
                ScoreReport(
                    row["url"],
                    float(row["avail_score"]),
                    float(row["norm_score"]),
                    {f: float(row[f"rating_{f.value}"]) for f in FIELDS},
                    {f: row[f"available_{f.value}"] == "1" for f in FIELDS},
                )
                for row in read_csv_report(path, "scores")
            ]
        header, rows = _read_jsonl(path, REPORT_FORMAT)
        if header.get("kind") != "scores":
            raise ArtifactError(f"{path}: not a score report")
        return [
            ScoreReport(
                r["url"],
                float(r["avail_score"]),
                float(r["norm_score"]),
                {f: float(r["ratings"][f.value]) for f in FIELDS},
                {f: bool(r["available"][f.value]) for f in FIELDS},
            )
            for r in rows
        ]
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"invalid score report {path}: {exc}") from exc


def write_feature_table(path, data: Sequence[LabeledFeatures], feature_names: Sequence[str]) -> None:
    header = {"format": FEATURES_FORMAT, "feature_names": list(feature_names)}
    rows = ({"url": d.url, "features": list(d.features), "label": d.label.value} for d in data)
    _write_jsonl(path, header, rows)


def read_feature_table(path) -> tuple[list[LabeledFeatures], tuple[str, ...]]:
    header, rows = _read_jsonl(path, FEATURES_FORMAT)
    try:
        data = [LabeledFeatures(r["url"], tuple(r["features"]), QualityControl(r["label"])) for r in rows]
        return data, tuple(header["feature_names"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"invalid feature table {path}: {exc}") from exc


def write_predictions(path, rows: Sequence[tuple[str, QualityControl, float]], provenance: Optional[Mapping] = None) -> None:
    if _is_csv(path, None):
        write_csv_report(path, "predictions", ["url", "label", "confidence"], ((u, l.value, c) for u, l, c in rows))
        return
    header = {"format": REPORT_FORMAT, "kind": "predictions", "provenance": dict(provenance or {})}
    _write_jsonl(path, header, ({"url": u, "label": l.value, "confidence": c} for u, l, c in rows))


def read_predictions(path) -> list[tuple[str, QualityControl, float]]:
    try:
        if _is_csv(path, None):
            rows = read_csv_report(path, "predictions")
        else:
            header, rows = _read_jsonl(path, REPORT_FORMAT)
            if header.get("kind") != "predictions":
                raise ArtifactError(f"{path}: not a predictions report")
        return [(r["url"], QualityControl(r["label"]), float(r["confidence"])) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise ArtifactError(f"invalid predictions report {path}: {exc}") from exc

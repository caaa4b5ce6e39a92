"""Command-line entry point: ``metaqa <subcommand> ...``.

Exit codes: 0 success, 1 bad input or configuration, 2 internal invariant
violation. All randomness comes from ``--seed`` (default 0).
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import FEATURES_FORMAT, MODEL_FORMAT, PROFILE_FORMAT, REPORT_FORMAT, __version__
from . import artifacts, harness, ingest, profiler, scoring, synthetic
from .errors import InvariantViolation, MetaqaError
from .forest import (
    ForestParams,
    SplitSpec,
    evaluate,
    extract_features,
    feature_matrix,
    predict_many,
    split,
    train_forest,
)
from .model import FEATURE_NAMES, QualityControl

log = logging.getLogger("metaqa")

DEFAULT_SEED = 0
# never recorded in provenance, so reruns into another directory stay byte-identical
_NOT_CONFIG = {"func", "output", "output_dir", "features_out", "verbose", "threads"}
_INPUT_FILES = {"input", "records", "profile", "model", "videos"}


def _file_digest(path: str) -> dict:
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    return {"file": Path(path).name, "sha256": digest}


def _config(args: argparse.Namespace) -> dict:
    """Effective settings; input files are identified by name and content hash, not location."""
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in _NOT_CONFIG:
            continue
        out[k] = _file_digest(v) if k in _INPUT_FILES and v else v
    return out


def _load_records(path: str, fmt: Optional[str]):
    records, manifest = ingest.parse_oer_corpus(path, fmt)
    if manifest.rejected_count:
        log.warning("%s", manifest.summary())
    return records


def cmd_ingest(args) -> int:
    if args.kind == "oer":
        records, manifest = ingest.parse_oer_corpus(args.input, args.format)
        ingest.write_oer_records(args.output, records)
    else:
        records, manifest = ingest.parse_video_corpus(args.input, args.format)
        ingest.write_video_records(args.output, records)
    print(manifest.summary())
    print("fields present: " + ", ".join(manifest.fields_present))
    return 0


def cmd_profile(args) -> int:
    if args.canned:
        ps = profiler.canned_profile_set()
    else:
        if not args.records:
            raise MetaqaError("profile needs --records or --canned")
        records = _load_records(args.records, args.format)
        ps = profiler.build_profile_set(records)
        ps = replace(ps, provenance={**ps.provenance, "config": _config(args)})
    artifacts.write_profile(args.output, ps)
    for p in ps.profiles:
        fn = p.rating_fn
        shape = f"normal(mean={fn.mean:.3f}, scale={fn.scale:.3f})" if hasattr(fn, "mean") else "boolean"
        print(f"{p.field.value:<16} rate {p.importance_rate:.4f}  normalized {p.normalized_importance_rate:.4f}  {shape}")
    return 0


def cmd_score(args) -> int:
    records = _load_records(args.records, args.format)
    ps = artifacts.read_profile(args.profile)
    reports = scoring.score_corpus(records, ps)
    for r in reports:
        if r.norm_score > r.avail_score:
            raise InvariantViolation(f"{r.url}: norm_score {r.norm_score} exceeds avail_score {r.avail_score}")
    artifacts.write_score_report(args.output, reports, args.report_format, {"config": _config(args)})
    print(f"scored {len(reports)} records")
    return 0


def _forest_params(args) -> ForestParams:
    return ForestParams(
        n_trees=args.n_trees,
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        max_features=args.max_features,
        bootstrap=not args.no_bootstrap,
    )


def cmd_train(args) -> int:
    records = _load_records(args.records, args.format)
    ps = artifacts.read_profile(args.profile)
    labelled = [r for r in records if r.quality_control is not QualityControl.UNKNOWN]
    if len(labelled) < len(records):
        log.warning("ignoring %d records with Unknown quality control", len(records) - len(labelled))
    data = [extract_features(r, ps, for_training=True) for r in labelled]
    train, test = split(data, SplitSpec(args.train_fraction, not args.no_stratify, args.seed))
    model = train_forest(train, _forest_params(args), args.seed, n_jobs=args.threads)
    metrics = evaluate(model, test)
    model.provenance = {
        "config": _config(args),
        "training_corpus_sha256": profiler.corpus_hash(labelled),
        "n_train": len(train),
        "n_test": len(test),
        "test_metrics": metrics.to_dict(),
    }
    artifacts.write_model(args.output, model)
    if args.features_out:
        artifacts.write_feature_table(args.features_out, data, FEATURE_NAMES)
    print(f"trained {model.n_trees} trees on {len(train)} records, tested on {len(test)}")
    print(metrics.summary())
    print("importances: " + ", ".join(f"{n}={v:.3f}" for n, v in zip(model.feature_names, model.importances)))
    return 0


def cmd_predict(args) -> int:
    records = _load_records(args.records, args.format)
    ps = artifacts.read_profile(args.profile)
    model = artifacts.read_model(args.model)
    feats = [extract_features(r, ps) for r in records]
    labels, confidence = predict_many(model, feature_matrix(feats))
    rows = [(r.url, l, float(c)) for r, l, c in zip(records, labels, confidence)]
    artifacts.write_predictions(args.output, rows, {"config": _config(args)})
    n_with = sum(1 for l in labels if l is QualityControl.WITH)
    print(f"predicted {n_with} WithControl, {len(labels) - n_with} WithoutControl")
    return 0


def _rules(args) -> ingest.MappingRules:
    keywords = ingest.DEFAULT_LEVEL_KEYWORDS
    if args.level_keywords is not None:
        keywords = tuple(k.strip() for k in args.level_keywords.split(",") if k.strip())
    return ingest.MappingRules(keywords, args.language, tuple(args.accessibility or ()))


def cmd_validate(args) -> int:
    videos, manifest = ingest.parse_video_corpus(args.videos, args.format)
    if manifest.rejected_count:
        log.warning("%s", manifest.summary())
    ps = artifacts.read_profile(args.profile)
    model = artifacts.read_model(args.model)
    summary = harness.validate_by_subject(videos, model, ps, _rules(args))
    harness.write_validation_report(args.output, summary)
    print(summary.table())
    if len(videos) >= 2:
        print(f"rating standard deviation {harness.rating_std(videos):.4f}")
    return 0


def cmd_explore(args) -> int:
    records = _load_records(args.records, args.format)
    report = harness.explore(records)
    for path in harness.write_explore_report(report, args.output_dir, svg=args.svg):
        print(path)
    return 0


def cmd_synth(args) -> int:
    if args.kind == "oer":
        ingest.write_oer_records(args.output, synthetic.synthetic_oer_corpus(args.n, args.seed))
    else:
        videos, _ = synthetic.synthetic_videos(n_subjects=args.subjects, seed=args.seed)
        ingest.write_video_records(args.output, videos)
    print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metaqa", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version",
        action="version",
        version=f"metaqa {__version__} ({PROFILE_FORMAT}, {MODEL_FORMAT}, {REPORT_FORMAT}, {FEATURES_FORMAT})",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--threads", type=int, default=1, help="worker processes for tree training")
    sub = parser.add_subparsers(dest="command", required=True)

    def records_args(p, required=True):
        p.add_argument("--records", required=required)
        p.add_argument("--format", choices=("csv", "jsonl"), help="default: from file extension")

    p = sub.add_parser("ingest", help="parse a raw corpus into canonical records")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--kind", choices=("oer", "video"), default="oer")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("profile", help="derive field benchmarks from controlled records")
    records_args(p, required=False)
    p.add_argument("--canned", action="store_true", help="write the published rounded constants instead")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("score", help="availability and normal scores per record")
    records_args(p)
    p.add_argument("--profile", required=True)
    p.add_argument("--report-format", choices=("csv", "jsonl"))
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("train", help="train and evaluate the quality classifier")
    records_args(p)
    p.add_argument("--profile", required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--max-features", type=int)
    p.add_argument("--no-bootstrap", action="store_true")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--features-out", help="also write the labelled feature table here")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify records with a trained model")
    records_args(p)
    p.add_argument("--profile", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("validate", help="compare video ratings between predicted groups")
    p.add_argument("--videos", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"))
    p.add_argument("--profile", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--level-keywords", help="comma-separated; replaces the default list")
    p.add_argument("--language", help="language assumed for every video (default: absent)")
    p.add_argument("--accessibility", action="append", help="accessibility assumed for every video")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("explore", help="availability, yearly and length reports")
    records_args(p)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--svg", action="store_true", help="also emit SVG histograms")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("synth", help="write a seeded synthetic corpus")
    p.add_argument("--kind", choices=("oer", "video"), default="oer")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--subjects", type=int, default=32)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except (MetaqaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

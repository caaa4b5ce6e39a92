"""Derive field benchmarks from the quality-controlled part of a corpus."""

from __future__ import annotations

import hashlib
import json
import logging
import math
import statistics
from typing import Mapping, Sequence

from .errors import ProfilingError
from .ingest import oer_to_dict
from .model import (
    FIELDS,
    LENGTH_FIELDS,
    BooleanRating,
    Field,
    FieldProfile,
    NormalFit,
    OerRecord,
    ProfileSet,
    QualityControl,
)

log = logging.getLogger(__name__)


def compute_importance_rates(records: Sequence[OerRecord]) -> dict[Field, float]:
    """Fraction of ``records`` in which each field is available.

    Callers pass the quality-controlled subset; no label filtering happens here.
    """
    if not records:
        raise ProfilingError("cannot compute importance rates: no quality-controlled records")
    n = len(records)
    return {f: sum(1 for r in records if r.is_available(f)) / n for f in FIELDS}


def normalize_rates(rates: Mapping[Field, float]) -> dict[Field, float]:
    total = math.fsum(rates.values())
    if total <= 0:
        raise ProfilingError("cannot normalize importance rates: all rates are zero")
    return {f: r / total for f, r in rates.items()}


def fit_normal(samples: Sequence[int]) -> tuple[float, float]:
    """Sample mean and n-1 standard deviation.

    A zero spread is returned as-is; the resulting profile is degenerate and
    rates only the exact mean as 1.
    """
    if len(samples) < 2:
        raise ProfilingError(f"need at least 2 samples to fit a normal, got {len(samples)}")
    mean = statistics.fmean(samples)
    return mean, statistics.stdev(samples, mean)


def corpus_hash(records: Sequence[OerRecord]) -> str:
    h = hashlib.sha256()
    for rec in records:
        h.update(json.dumps(oer_to_dict(rec), sort_keys=True, ensure_ascii=False).encode())
        h.update(b"\n")
    return h.hexdigest()


def build_profile_set(records: Sequence[OerRecord]) -> ProfileSet:
    controlled = [r for r in records if r.quality_control is QualityControl.WITH]
    rates = compute_importance_rates(controlled)
    normalized = normalize_rates(rates)
    profiles = []
    for f in FIELDS:
        if f in LENGTH_FIELDS:
            # absent fields contribute no zero-length sample
            lengths = [r.length(f) for r in controlled if r.is_available(f)]
            try:
                mean, scale = fit_normal(lengths)
            except ProfilingError as exc:
                raise ProfilingError(f"{f.value}: {exc}") from None
            if scale == 0:
                log.warning("%s: all lengths equal %s; profile is degenerate", f.value, mean)
            rating_fn = NormalFit(mean, scale)
        else:
            rating_fn = BooleanRating()
        profiles.append(FieldProfile(f, rates[f], normalized[f], rating_fn))
    return ProfileSet(
        tuple(profiles),
        source_corpus_size=len(records),
        controlled_subset_size=len(controlled),
        provenance={"corpus_sha256": corpus_hash(records)},
    )


# Published benchmark constants, rounded as printed.
PUBLISHED_BENCHMARK = {
    Field.TITLE: (1.0, 0.17, NormalFit(5.5, 2.5)),
    Field.DESCRIPTION: (1.0, 0.17, NormalFit(54.5, 40.0)),
    Field.SUBJECTS: (0.86, 0.145, NormalFit(4.5, 3.5)),
    Field.LEVEL: (0.98, 0.165, BooleanRating()),
    Field.LANGUAGE: (0.92, 0.155, BooleanRating()),
    Field.TIME_REQUIRED: (0.58, 0.098, BooleanRating()),
    Field.ACCESSIBILITIES: (0.59, 0.099, BooleanRating()),
}


def canned_profile_set() -> ProfileSet:
    """The published benchmark, usable without a reference corpus."""
    profiles = tuple(FieldProfile(f, rate, norm, fn) for f, (rate, norm, fn) in PUBLISHED_BENCHMARK.items())
    return ProfileSet(profiles, canned=True, provenance={"source": "canned"})

"""Availability and normal scores for a single record.

Length-valued fields are rated ``1 / ceil(|x - mean| / scale)``, with the
exact mean rated 1 before the formula is applied (it would divide by zero).
The ceiling is evaluated on exact rationals so a distance equal to the scale
never rounds across an integer boundary.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from .model import FIELDS, FieldProfile, NormalFit, OerRecord, ProfileSet, ScoreReport


def rate_length(x: int, fit: NormalFit) -> float:
    distance = abs(Fraction(x) - Fraction(fit.mean))
    if distance == 0:
        return 1.0
    if fit.scale == 0:
        return 0.0
    return 1.0 / math.ceil(distance / Fraction(fit.scale))


def rate_field(record: OerRecord, profile: FieldProfile) -> float:
    fld = profile.field
    if not record.is_available(fld):
        return 0.0
    if isinstance(profile.rating_fn, NormalFit):
        return rate_length(record.length(fld), profile.rating_fn)
    return 1.0


def availability_score(record: OerRecord, profiles: ProfileSet) -> float:
    return math.fsum(p.normalized_importance_rate for p in profiles.profiles if record.is_available(p.field))


def normal_score(record: OerRecord, profiles: ProfileSet) -> float:
    return math.fsum(p.normalized_importance_rate * rate_field(record, p) for p in profiles.profiles)


def score_record(record: OerRecord, profiles: ProfileSet) -> ScoreReport:
    ratings = {p.field: rate_field(record, p) for p in profiles.profiles}
    available = {f: record.is_available(f) for f in FIELDS}
    avail = math.fsum(profiles.weight(f) for f in FIELDS if available[f])
    norm = math.fsum(profiles.weight(f) * ratings[f] for f in FIELDS)
    return ScoreReport(record.url, avail, norm, ratings, available)


def score_corpus(records: Sequence[OerRecord], profiles: ProfileSet) -> list[ScoreReport]:
    return [score_record(r, profiles) for r in records]

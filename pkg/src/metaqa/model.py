"""Domain types shared across the toolkit.

Records are canonicalized on construction: blank scalars become ``None``,
list fields become tuples with blank entries removed. Constructing a record
from an already-canonical record is therefore a no-op.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Iterable, Mapping, Optional, Union


class QualityControl(str, Enum):
    WITH = "WithControl"
    WITHOUT = "WithoutControl"
    UNKNOWN = "Unknown"


class Field(str, Enum):
    """The seven metadata fields that carry an importance weight."""

    TITLE = "title"
    DESCRIPTION = "description"
    SUBJECTS = "subjects"
    LEVEL = "level"
    LANGUAGE = "language"
    TIME_REQUIRED = "time_required"
    ACCESSIBILITIES = "accessibilities"


FIELDS: tuple[Field, ...] = tuple(Field)
LENGTH_FIELDS = (Field.TITLE, Field.DESCRIPTION, Field.SUBJECTS)
BOOLEAN_FIELDS = (Field.LEVEL, Field.LANGUAGE, Field.TIME_REQUIRED, Field.ACCESSIBILITIES)

FEATURE_NAMES: tuple[str, ...] = (
    "avail_score",
    "norm_score",
    "level_available",
    "description_word_count",
    "title_word_count",
    "subject_count",
)


def word_count(text: Optional[str]) -> int:
    if not text:
        return 0
    return len(text.split())


def subject_count(subjects: Iterable[str]) -> int:
    return sum(1 for s in subjects if s and s.strip())


def _clean_scalar(value: Optional[str]) -> Optional[str]:
    if value is None:
        return None
    value = str(value).strip()
    return value or None


def _clean_list(values: Optional[Iterable[str]]) -> tuple[str, ...]:
    if not values:
        return ()
    if isinstance(values, str):
        values = [values]
    return tuple(v.strip() for v in values if v is not None and v.strip())


@dataclass(frozen=True)
class OerRecord:
    url: str
    title: Optional[str] = None
    description: Optional[str] = None
    educational_type: Optional[str] = None
    date_available: Optional[date] = None
    date_issued: Optional[date] = None
    subjects: tuple[str, ...] = ()
    level: Optional[str] = None
    time_required: Optional[str] = None
    accessibilities: tuple[str, ...] = ()
    languages: tuple[str, ...] = ()
    quality_control: QualityControl = QualityControl.UNKNOWN

    def __post_init__(self) -> None:
        url = _clean_scalar(self.url)
        if url is None:
            raise ValueError("record url must be non-empty")
        set_ = object.__setattr__
        set_(self, "url", url)
        for name in ("title", "description", "educational_type", "level", "time_required"):
            set_(self, name, _clean_scalar(getattr(self, name)))
        for name in ("subjects", "accessibilities", "languages"):
            set_(self, name, _clean_list(getattr(self, name)))
        set_(self, "quality_control", QualityControl(self.quality_control))

    def value(self, fld: Field):
        return getattr(self, _ATTR[fld])

    def is_available(self, fld: Field) -> bool:
        # canonical form guarantees absent == None or ()
        return bool(self.value(fld))

    def length(self, fld: Field) -> int:
        """Word count for title/description, entry count for subjects."""
        if fld is Field.SUBJECTS:
            return subject_count(self.subjects)
        if fld in (Field.TITLE, Field.DESCRIPTION):
            return word_count(self.value(fld))
        raise ValueError(f"{fld.value} has no length")


_ATTR = {
    Field.TITLE: "title",
    Field.DESCRIPTION: "description",
    Field.SUBJECTS: "subjects",
    Field.LEVEL: "level",
    Field.LANGUAGE: "languages",
    Field.TIME_REQUIRED: "time_required",
    Field.ACCESSIBILITIES: "accessibilities",
}


@dataclass(frozen=True)
class VideoRecord:
    url: str
    title: str
    description: Optional[str] = None
    dislikes: int = 0
    length_seconds: float = 0.0
    likes: int = 0
    rating: float = 0.0
    subjects: tuple[str, ...] = ()
    views: int = 0

    def __post_init__(self) -> None:
        url = _clean_scalar(self.url)
        if url is None:
            raise ValueError("video url must be non-empty")
        object.__setattr__(self, "url", url)
        object.__setattr__(self, "title", self.title or "")
        object.__setattr__(self, "description", _clean_scalar(self.description))
        object.__setattr__(self, "subjects", _clean_list(self.subjects))
        if not (0.0 <= self.rating <= 5.0) or math.isnan(self.rating):
            raise ValueError(f"rating {self.rating} outside [0, 5]")
        for name in ("dislikes", "likes", "views", "length_seconds"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class NormalFit:
    mean: float
    scale: float

    @property
    def degenerate(self) -> bool:
        return self.scale == 0


@dataclass(frozen=True)
class BooleanRating:
    pass


RatingFn = Union[NormalFit, BooleanRating]


@dataclass(frozen=True)
class FieldProfile:
    field: Field
    importance_rate: float
    normalized_importance_rate: float
    rating_fn: RatingFn

    def __post_init__(self) -> None:
        object.__setattr__(self, "field", Field(self.field))
        for name in ("importance_rate", "normalized_importance_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{self.field.value}: {name} {v} outside [0, 1]")
        wants_fit = self.field in LENGTH_FIELDS
        if wants_fit != isinstance(self.rating_fn, NormalFit):
            raise ValueError(f"{self.field.value}: wrong rating function kind")
        if isinstance(self.rating_fn, NormalFit) and self.rating_fn.scale < 0:
            raise ValueError(f"{self.field.value}: negative scale")


@dataclass(frozen=True)
class ProfileSet:
    """One profile per field plus where the numbers came from.

    ``canned`` marks the rounded published constants, whose normalized rates
    only sum to 1 within 0.01; fitted sets must sum to 1 within 1e-9.
    """

    profiles: tuple[FieldProfile, ...]
    source_corpus_size: int = 0
    controlled_subset_size: int = 0
    canned: bool = False
    provenance: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        by_field = {p.field: p for p in self.profiles}
        if len(by_field) != len(FIELDS) or len(self.profiles) != len(FIELDS):
            raise ValueError("a profile set needs exactly one profile per field")
        object.__setattr__(self, "profiles", tuple(by_field[f] for f in FIELDS))
        total = math.fsum(p.normalized_importance_rate for p in self.profiles)
        tol = 0.01 if self.canned else 1e-9
        if abs(total - 1.0) > tol:
            raise ValueError(f"normalized rates sum to {total}, not 1 within {tol}")

    def __getitem__(self, fld: Field) -> FieldProfile:
        return self.profiles[FIELDS.index(Field(fld))]

    def weight(self, fld: Field) -> float:
        return self[fld].normalized_importance_rate


@dataclass(frozen=True)
class ScoreReport:
    url: str
    avail_score: float
    norm_score: float
    per_field_rating: Mapping[Field, float]
    per_field_available: Mapping[Field, bool]


@dataclass(frozen=True)
class LabeledFeatures:
    url: str
    features: tuple[float, ...]
    label: QualityControl

    def __post_init__(self) -> None:
        if len(self.features) != len(FEATURE_NAMES):
            raise ValueError(f"expected {len(FEATURE_NAMES)} features, got {len(self.features)}")
        object.__setattr__(self, "features", tuple(float(x) for x in self.features))
        object.__setattr__(self, "label", QualityControl(self.label))

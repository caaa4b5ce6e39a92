"""Seeded synthetic corpora shaped like the reference data.

Quality-controlled records follow the published benchmark (availability
rates and length distributions); uncontrolled records are sparser and noisier.
Videos come from two latent populations, one that looks like curated
material and one that does not, and the curated-looking population can be
given a rating bonus. Nothing here is used by the scoring or training code
paths; it only feeds tests, demos and the validation property check.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date
from typing import Optional

import numpy as np

from .ingest import DEFAULT_LEVEL_KEYWORDS
from .model import OerRecord, QualityControl, VideoRecord

_SYLLABLES = ("ka", "lo", "mi", "ne", "ru", "sa", "ti", "vo", "de", "pa", "ql", "da", "ta", "ba", "se", "on")
_LEVELS = ("beginner", "intermediate", "advanced")
_LANGS = ("en", "es", "fr")
_ACCESS = ("captions", "screen reader", "transcript", "alt text")
_TOPICS = (
    "cloud computing", "web development", "database design", "computer networks",
    "cyber security", "linux administration", "software testing", "version control",
    "data structures", "algorithms", "operating systems", "mobile apps",
    "javascript", "java programming", "c programming", "spreadsheets",
    "nursing basics", "first aid", "anatomy", "pharmacology",
    "nutrition", "mental health", "public health", "epidemiology",
    "dental hygiene", "physical therapy", "medical ethics", "diabetes care",
    "heart health", "pediatrics", "geriatric care", "infection control",
)


@dataclass(frozen=True)
class FieldShape:
    title_mean: float
    title_sd: float
    desc_mean: float
    desc_sd: float
    subj_mean: float
    subj_sd: float
    p_description: float
    p_subjects: float
    p_level: float
    p_language: float
    p_time: float
    p_access: float


CONTROLLED = FieldShape(5.5, 2.5, 54.5, 40.0, 4.5, 3.5, 1.0, 0.86, 0.98, 0.92, 0.58, 0.59)
UNCONTROLLED = FieldShape(8.5, 4.5, 95.0, 85.0, 2.5, 2.5, 0.92, 0.62, 0.29, 0.6, 0.22, 0.18)


def _text(rng: np.random.Generator, n_words: int) -> str:
    sizes = rng.integers(1, 4, n_words)
    sylls = rng.integers(0, len(_SYLLABLES), int(sizes.sum()))
    ends = np.cumsum(sizes)
    return " ".join("".join(_SYLLABLES[i] for i in sylls[e - k:e]) for k, e in zip(sizes, ends))


def _length(rng: np.random.Generator, mean: float, sd: float) -> int:
    return max(1, int(round(rng.normal(mean, sd))))


def synthetic_oer_record(rng: np.random.Generator, url: str, label: QualityControl, year: Optional[int] = None) -> OerRecord:
    s = CONTROLLED if label is QualityControl.WITH else UNCONTROLLED
    subjects = ()
    if rng.random() < s.p_subjects:
        subjects = tuple(_text(rng, 2) for _ in range(_length(rng, s.subj_mean, s.subj_sd)))
    day = None
    if year is not None:
        day = date(year, int(rng.integers(1, 13)), int(rng.integers(1, 29)))
    return OerRecord(
        url=url,
        title=_text(rng, _length(rng, s.title_mean, s.title_sd)),
        description=_text(rng, _length(rng, s.desc_mean, s.desc_sd)) if rng.random() < s.p_description else None,
        educational_type="course",
        date_available=day,
        subjects=subjects,
        level=str(rng.choice(_LEVELS)) if rng.random() < s.p_level else None,
        languages=(str(rng.choice(_LANGS)),) if rng.random() < s.p_language else (),
        time_required=f"PT{int(rng.integers(1, 40))}H" if rng.random() < s.p_time else None,
        accessibilities=(str(rng.choice(_ACCESS)),) if rng.random() < s.p_access else (),
        quality_control=label,
    )


def synthetic_oer_corpus(n: int = 2000, seed: int = 0, first_year: int = 2013, last_year: int = 2019) -> list[OerRecord]:
    """Labelled corpus whose share of controlled records falls from 0.7 to 0.35 over the years."""
    rng = np.random.default_rng(seed)
    years = np.arange(first_year, last_year + 1)
    p_with = np.linspace(0.7, 0.35, len(years))
    out = []
    for i in range(n):
        k = int(rng.integers(0, len(years)))
        label = QualityControl.WITH if rng.random() < p_with[k] else QualityControl.WITHOUT
        out.append(synthetic_oer_record(rng, f"https://oer.example/{seed}/{i}", label, int(years[k])))
    return out


def synthetic_videos(
    n_subjects: int = 32,
    per_subject: tuple[int, int] = (20, 36),
    seed: int = 0,
    rating_bonus: float = 0.1,
    base_rating: float = 4.4,
    rating_sd: float = 0.25,
) -> tuple[list[VideoRecord], list[bool]]:
    """Videos plus, per video, whether it came from the curated-looking population.

    Curated-looking videos have benchmark-like title/description lengths and
    usually a level keyword in the title; their ratings are drawn
    ``rating_bonus`` higher on average (clipped to [0, 5]).
    """
    if not 1 <= n_subjects <= len(_TOPICS):
        raise ValueError(f"n_subjects must be in [1, {len(_TOPICS)}]")
    rng = np.random.default_rng(seed)
    videos, curated = [], []
    for topic in _TOPICS[:n_subjects]:
        for j in range(int(rng.integers(per_subject[0], per_subject[1] + 1))):
            good = bool(rng.random() < 0.5)
            if good:
                title_words = _length(rng, 5.5, 1.5)
                desc = _text(rng, _length(rng, 55, 30))
                keyword = rng.random() < 0.7
            else:
                title_words = _length(rng, 11, 4)
                desc = _text(rng, _length(rng, 160, 100)) if rng.random() < 0.7 else None
                keyword = rng.random() < 0.1
            words = _text(rng, title_words).split()
            if keyword:
                words[-1] = str(rng.choice(DEFAULT_LEVEL_KEYWORDS))
            rating = float(np.clip(rng.normal(base_rating + (rating_bonus if good else 0.0), rating_sd), 0.0, 5.0))
            total = int(rng.integers(20, 2000))
            likes = int(round(total * (rating - 1) / 4)) if rating > 1 else 0
            videos.append(
                VideoRecord(
                    url=f"https://video.example/{seed}/{topic.replace(' ', '-')}/{j}",
                    title=" ".join(words),
                    description=desc,
                    dislikes=total - likes,
                    length_seconds=float(rng.integers(60, 3600)),
                    likes=likes,
                    rating=rating,
                    subjects=(topic,),
                    views=int(rng.integers(100, 10**6)),
                )
            )
            curated.append(good)
    return videos, curated

import math
import random

import pytest
from hypothesis import given, strategies as st

from metaqa.errors import ProfilingError
from metaqa.model import FIELDS, Field, NormalFit, OerRecord, QualityControl
from metaqa.profiler import (
    PUBLISHED_BENCHMARK,
    build_profile_set,
    canned_profile_set,
    compute_importance_rates,
    fit_normal,
    normalize_rates,
)
from metaqa.synthetic import synthetic_oer_corpus

W, O = QualityControl.WITH, QualityControl.WITHOUT


def test_rates_with_one_of_four_levels():
    recs = [OerRecord(f"u{i}", title="t", level="x" if i == 0 else None, quality_control=W) for i in range(4)]
    rates = compute_importance_rates(recs)
    assert rates[Field.LEVEL] == 0.25
    assert rates[Field.TITLE] == 1.0
    assert rates[Field.DESCRIPTION] == 0.0


def test_rates_all_present():
    rec = OerRecord("u", title="t", description="d", subjects=("s",), level="l", languages=("en",),
                    time_required="PT1H", accessibilities=("a",), quality_control=W)
    assert set(compute_importance_rates([rec]).values()) == {1.0}


def test_rates_need_records():
    with pytest.raises(ProfilingError):
        compute_importance_rates([])


def test_normalize_published_rates():
    # each rate divided by their total of 5.93
    rates = {f: PUBLISHED_BENCHMARK[f][0] for f in FIELDS}
    assert math.isclose(sum(rates.values()), 5.93)
    got = normalize_rates(rates)
    expected = [0.169, 0.169, 0.145, 0.165, 0.155, 0.098, 0.099]
    for f, e in zip(FIELDS, expected):
        assert abs(got[f] - e) <= 0.001, f


def test_normalize_uniform_and_single():
    assert all(math.isclose(v, 1 / 7) for v in normalize_rates({f: 0.4 for f in FIELDS}).values())
    one = normalize_rates({f: (0.3 if f is Field.LEVEL else 0.0) for f in FIELDS})
    assert one[Field.LEVEL] == 1.0 and sum(one.values()) == 1.0


def test_normalize_all_zero():
    with pytest.raises(ProfilingError):
        normalize_rates({f: 0.0 for f in FIELDS})


@given(st.lists(st.floats(0.01, 1.0), min_size=7, max_size=7), st.floats(0.1, 50.0))
def test_normalize_is_scale_invariant(values, c):
    rates = dict(zip(FIELDS, values))
    a = normalize_rates(rates)
    b = normalize_rates({f: v * c for f, v in rates.items()})
    assert all(math.isclose(a[f], b[f], rel_tol=1e-12) for f in FIELDS)
    assert math.isclose(sum(a.values()), 1.0, abs_tol=1e-12)


def test_fit_normal_hand_values():
    mean, scale = fit_normal([4, 6])
    assert mean == 5.0
    assert math.isclose(scale, math.sqrt(2))


def test_fit_normal_degenerate_and_short():
    assert fit_normal([3, 3, 3]) == (3.0, 0.0)
    with pytest.raises(ProfilingError):
        fit_normal([5])


def test_two_record_profile():
    recs = [
        OerRecord("a", title="a b c", description="w x y z", subjects=("s1", "s2"), level="l",
                  languages=("en",), quality_control=W),
        OerRecord("b", title="a b c d e", description="one two", subjects=("s1", "s2", "s3", "s4"),
                  languages=("en",), time_required="PT1H", quality_control=W),
        OerRecord("c", title="ignored because uncontrolled", quality_control=O),
    ]
    ps = build_profile_set(recs)
    assert ps.source_corpus_size == 3 and ps.controlled_subset_size == 2
    # rates 1,1,1,.5,1,.5,0 sum to 5
    expected_norm = [0.2, 0.2, 0.2, 0.1, 0.2, 0.1, 0.0]
    assert [p.normalized_importance_rate for p in ps.profiles] == pytest.approx(expected_norm, abs=1e-15)
    assert ps[Field.TITLE].rating_fn == NormalFit(4.0, pytest.approx(math.sqrt(2)))
    assert ps[Field.DESCRIPTION].rating_fn.mean == 3.0
    assert ps[Field.SUBJECTS].rating_fn.mean == 3.0
    assert math.isclose(ps[Field.SUBJECTS].rating_fn.scale, math.sqrt(2))
    assert ps.provenance["corpus_sha256"]


def test_absent_lengths_excluded_from_fit():
    recs = [OerRecord(f"u{i}", title="a " * n, description="d", subjects=("s",) * 2, quality_control=W)
            for i, n in enumerate([2, 4])] + [OerRecord("u9", description="d", subjects=("s", "t"), quality_control=W)]
    ps = build_profile_set(recs)
    assert ps[Field.TITLE].rating_fn.mean == 3.0
    assert ps[Field.TITLE].importance_rate == pytest.approx(2 / 3)


def test_profile_needs_controlled_records():
    with pytest.raises(ProfilingError):
        build_profile_set([OerRecord("u", title="t", quality_control=O)])


def test_canned_profile():
    ps = canned_profile_set()
    assert ps.canned
    assert ps[Field.TITLE].rating_fn == NormalFit(5.5, 2.5)
    assert ps[Field.DESCRIPTION].rating_fn == NormalFit(54.5, 40.0)
    assert ps[Field.SUBJECTS].rating_fn == NormalFit(4.5, 3.5)
    assert abs(sum(p.normalized_importance_rate for p in ps.profiles) - 1) <= 0.01


def test_rates_invariant_under_permutation():
    recs = synthetic_oer_corpus(300, seed=3)
    controlled = [r for r in recs if r.quality_control is W]
    shuffled = controlled[:]
    random.Random(1).shuffle(shuffled)
    assert compute_importance_rates(controlled) == compute_importance_rates(shuffled)
    others = [r for r in recs if r.quality_control is O]
    assert build_profile_set(recs).profiles == build_profile_set(others + shuffled).profiles


def test_rates_are_exact_fractions():
    recs = synthetic_oer_corpus(400, seed=5)
    controlled = [r for r in recs if r.quality_control is W]
    rates = compute_importance_rates(controlled)
    for f in FIELDS:
        assert rates[f] == sum(r.is_available(f) for r in controlled) / len(controlled)
        assert 0.0 <= rates[f] <= 1.0


def test_synthetic_corpus_recovers_benchmark():
    # the generator draws controlled records from the published benchmark shape
    ps = build_profile_set(synthetic_oer_corpus(6000, seed=11))
    for f in FIELDS:
        assert abs(ps[f].importance_rate - PUBLISHED_BENCHMARK[f][0]) < 0.03, f
    assert abs(ps[Field.TITLE].rating_fn.mean - 5.5) < 0.5
    assert abs(ps[Field.SUBJECTS].rating_fn.mean - 4.5) < 0.6

from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from teacheval.bank import Competence, Polarity, default_bank
from teacheval.errors import IncompleteAnswers, InvalidValue, OutOfRange
from teacheval.scoring import (
    CategoryMark,
    category_mean,
    mark_from_mean,
    questionnaire_report,
    score_item,
)

from . import oracles
from .conftest import make_bank

# Mixed answers for the default 58-item bank; expected values were computed
# with the flat-loop oracle in oracles.py and frozen here.
MIXED_VECTOR = [
    4, 2, 1, 5, 5, 2, 3, 5, 1, 4, 5, 4, 4, 1, 3, 5, 2, 5, 3, 2, 4, 5, 4, 4,
    3, 5, 2, 4, 3, 5, 3, 4, 1, 5, 5, 1, 1, 3, 2, 1, 2, 3, 5, 4, 4, 3, 3, 5,
    4, 1, 3, 1, 4, 3, 1, 2, 2, 3,
]
MIXED_EXPECTED = {
    Competence.SCIENTIFIC: Fraction(23, 8),
    Competence.PSYCHO_PEDAGOGICAL: Fraction(19, 8),
    Competence.PSYCHOSOCIAL: Fraction(3, 1),
    Competence.MANAGERIAL: Fraction(37, 13),
}
MIXED_OVERALL = Fraction(80, 29)


def test_score_item_full_table():
    for response in range(1, 6):
        assert score_item(Polarity.DIRECT, response) == response
        assert score_item(Polarity.REVERSE, response) == 6 - response


def test_score_item_named_cases():
    assert score_item(Polarity.DIRECT, 5) == 5
    assert score_item(Polarity.REVERSE, 1) == 5
    assert score_item(Polarity.REVERSE, 3) == 3


@pytest.mark.parametrize("bad", [0, 6, -1, "3", 2.5, True, None])
def test_score_item_rejects_bad_values(bad):
    with pytest.raises(InvalidValue):
        score_item(Polarity.DIRECT, bad)


@given(st.integers(1, 5))
def test_reversal_is_an_involution(response):
    once = score_item(Polarity.REVERSE, response)
    assert score_item(Polarity.REVERSE, once) == response


@given(st.sampled_from(list(Polarity)), st.integers(1, 5))
def test_scores_stay_on_scale(polarity, response):
    assert score_item(polarity, response) in {1, 2, 3, 4, 5}


def test_category_mean_all_direct_maximum():
    bank = make_bank(
        [
            ("scientific", "direct"),
            ("scientific", "direct"),
            ("psycho_pedagogical", "direct"),
            ("psychosocial", "direct"),
            ("managerial", "direct"),
        ]
    )
    assert category_mean([5] * 5, bank, Competence.SCIENTIFIC) == 5


def test_category_mean_all_reverse_minimum():
    bank = make_bank(
        [
            ("scientific", "reverse"),
            ("scientific", "reverse"),
            ("psycho_pedagogical", "direct"),
            ("psychosocial", "direct"),
            ("managerial", "direct"),
        ]
    )
    assert category_mean([5] * 5, bank, Competence.SCIENTIFIC) == 1


def test_category_mean_requires_complete_answers():
    bank = default_bank()
    with pytest.raises(IncompleteAnswers):
        category_mean([3] * 57, bank, Competence.SCIENTIFIC)
    with pytest.raises(IncompleteAnswers):
        category_mean([3] * 59, bank, Competence.SCIENTIFIC)


def test_category_mean_frozen_mixed_fixture():
    bank = default_bank()
    for competence, expected in MIXED_EXPECTED.items():
        assert category_mean(MIXED_VECTOR, bank, competence) == expected


def test_mark_from_mean_examples():
    assert mark_from_mean(3.0) is CategoryMark.MEDIUM
    assert mark_from_mean(4.5) is CategoryMark.VERY_GOOD
    assert mark_from_mean(1.0) is CategoryMark.VERY_POOR
    assert mark_from_mean(5) is CategoryMark.VERY_GOOD


def test_mark_boundaries_go_to_upper_bin():
    assert mark_from_mean(Fraction(3, 2)) is CategoryMark.POOR
    assert mark_from_mean(Fraction(5, 2)) is CategoryMark.MEDIUM
    assert mark_from_mean(Fraction(7, 2)) is CategoryMark.GOOD
    assert mark_from_mean(Fraction(9, 2)) is CategoryMark.VERY_GOOD


@pytest.mark.parametrize("bad", [0.5, 0, 5.01, 6, -3])
def test_mark_from_mean_out_of_range(bad):
    with pytest.raises(OutOfRange):
        mark_from_mean(bad)


def test_mark_from_mean_monotone_on_grid():
    grid = [Fraction(k, 100) for k in range(100, 501)]
    marks = [mark_from_mean(value) for value in grid]
    assert all(a <= b for a, b in zip(marks, marks[1:]))
    assert set(marks) == set(CategoryMark)


def test_report_all_threes_is_medium_everywhere():
    bank = default_bank()
    report = questionnaire_report([3] * 58, bank)
    for score in report.per_competence.values():
        assert score.mean == 3
        assert score.mark is CategoryMark.MEDIUM
    assert report.overall_mean == 3
    assert report.overall_mark is CategoryMark.MEDIUM


def test_report_all_direct_bank_all_fives():
    bank = make_bank(
        [
            ("scientific", "direct"),
            ("psycho_pedagogical", "direct"),
            ("psychosocial", "direct"),
            ("managerial", "direct"),
        ]
    )
    report = questionnaire_report([5, 5, 5, 5], bank)
    for score in report.per_competence.values():
        assert score.mean == 5
        assert score.mark is CategoryMark.VERY_GOOD


def test_report_frozen_mixed_fixture():
    bank = default_bank()
    report = questionnaire_report(MIXED_VECTOR, bank)
    for competence, expected in MIXED_EXPECTED.items():
        assert report.per_competence[competence].mean == expected
        assert report.per_competence[competence].mark is mark_from_mean(expected)
    assert report.overall_mean == MIXED_OVERALL


def test_report_matches_oracle_on_seeded_vectors():
    bank = default_bank()
    items = oracles.load_default_items()
    rng = random.Random(99)
    for _ in range(25):
        answers = [rng.randint(1, 5) for _ in range(58)]
        report = questionnaire_report(answers, bank)
        expected = oracles.questionnaire_means(answers, items)
        for competence in Competence:
            assert report.per_competence[competence].mean == expected[competence.value]
        assert report.overall_mean == expected["overall"]


@given(
    st.lists(st.integers(1, 5), min_size=4, max_size=4),
    st.integers(0, 3),
)
def test_polarity_flip_symmetry(answers, flip_position):
    """Flipping one item's polarity while replacing its answer by 6-r leaves
    the whole report unchanged."""
    layout = [
        ("scientific", "direct"),
        ("psycho_pedagogical", "reverse"),
        ("psychosocial", "direct"),
        ("managerial", "reverse"),
    ]
    flipped_layout = list(layout)
    comp, pol = layout[flip_position]
    flipped_layout[flip_position] = (comp, "reverse" if pol == "direct" else "direct")
    flipped_answers = list(answers)
    flipped_answers[flip_position] = 6 - answers[flip_position]

    base = questionnaire_report(answers, make_bank(layout))
    flipped = questionnaire_report(flipped_answers, make_bank(flipped_layout))
    assert base.per_competence == flipped.per_competence
    assert base.overall_mean == flipped.overall_mean


def test_means_are_exact_rationals():
    bank = default_bank()
    report = questionnaire_report(MIXED_VECTOR, bank)
    assert isinstance(report.overall_mean, Fraction)
    assert 1 <= report.overall_mean <= 5

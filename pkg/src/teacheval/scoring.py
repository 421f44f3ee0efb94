"""Likert scoring: item reversal, category means, categorical marks.

Raw responses are always captured on the presented 1..5 scale; reversal is
applied here at scoring time. Means are exact rationals so pooled and
mean-of-means formulations compare without float noise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .bank import Competence, Polarity, QuestionBank
from .errors import IncompleteAnswers, InvalidValue, OutOfRange

Number = Union[int, float, Fraction]


class CategoryMark(enum.IntEnum):
    """Quality label ladder, totally ordered worst to best."""

    VERY_POOR = 1
    POOR = 2
    MEDIUM = 3
    GOOD = 4
    VERY_GOOD = 5

    @property
    def label(self) -> str:
        return _MARK_LABELS[self]


_MARK_LABELS = {
    CategoryMark.VERY_POOR: "Very Poor",
    CategoryMark.POOR: "Poor",
    CategoryMark.MEDIUM: "Medium",
    CategoryMark.GOOD: "Good",
    CategoryMark.VERY_GOOD: "Very Good",
}


def ensure_response(value: object) -> int:
    """Validate a raw response; returns it as a plain int in 1..5."""
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidValue(f"response must be an integer 1..5, got {value!r}")
    if not 1 <= value <= 5:
        raise InvalidValue(f"response must be in 1..5, got {value}")
    return int(value)


def score_item(polarity: Polarity, response: int) -> int:
    """Quality score of one answered item; 5 is always best."""
    response = ensure_response(response)
    if polarity is Polarity.REVERSE:
        return 6 - response
    return response


def mark_from_mean(mean: Number) -> CategoryMark:
    """Nearest-label mark for a mean in [1,5]; boundaries go to the upper bin."""
    value = Fraction(mean)
    if not 1 <= value <= 5:
        raise OutOfRange(f"mean {float(value)} outside [1,5]")
    if value < Fraction(3, 2):
        return CategoryMark.VERY_POOR
    if value < Fraction(5, 2):
        return CategoryMark.POOR
    if value < Fraction(7, 2):
        return CategoryMark.MEDIUM
    if value < Fraction(9, 2):
        return CategoryMark.GOOD
    return CategoryMark.VERY_GOOD


def _checked_answers(answers: Sequence[int], bank: QuestionBank) -> list[int]:
    if len(answers) != len(bank.items):
        raise IncompleteAnswers(
            f"expected {len(bank.items)} answers, got {len(answers)}"
        )
    return [ensure_response(a) for a in answers]


def category_mean(answers: Sequence[int], bank: QuestionBank, competence: Competence) -> Fraction:
    """Mean item score over exactly the items of one competence."""
    values = _checked_answers(answers, bank)
    scores = [
        score_item(item.polarity, values[item.index - 1])
        for item in bank.items
        if item.competence is competence
    ]
    return Fraction(sum(scores), len(scores))


@dataclass(frozen=True)
class CompetenceScore:
    mean: Fraction
    mark: CategoryMark


@dataclass(frozen=True)
class QuestionnaireReport:
    per_competence: dict[Competence, CompetenceScore]
    overall_mean: Fraction
    overall_mark: CategoryMark


def questionnaire_report(answers: Sequence[int], bank: QuestionBank) -> QuestionnaireReport:
    """Per-competence and overall means/marks for one complete questionnaire."""
    values = _checked_answers(answers, bank)
    per_competence = {}
    total = 0
    for competence in Competence:
        scores = [
            score_item(item.polarity, values[item.index - 1])
            for item in bank.items
            if item.competence is competence
        ]
        total += sum(scores)
        mean = Fraction(sum(scores), len(scores))
        per_competence[competence] = CompetenceScore(mean=mean, mark=mark_from_mean(mean))
    overall = Fraction(total, len(bank.items))
    return QuestionnaireReport(
        per_competence=per_competence,
        overall_mean=overall,
        overall_mark=mark_from_mean(overall),
    )

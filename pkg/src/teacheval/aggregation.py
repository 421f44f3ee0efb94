"""Statistical rollups: per teacher, chair, faculty, and university.

A unit's means pool every item score of every questionnaire under it, so
each questionnaire weighs equally. Because questionnaires are always
complete, the pooled mean coincides exactly with the mean of per-
questionnaire category means; both are exact rationals here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Union

from .bank import Competence, QuestionBank
from .errors import BankMismatch, IndexOutOfRange, ParseError, UnknownUnit, ValidationError
from .scoring import CompetenceScore, mark_from_mean, score_item
from .store import ResultRecord


class ScopeKind(Enum):
    TEACHER = "teacher"
    CHAIR = "chair"
    FACULTY = "faculty"
    UNIVERSITY = "university"


@dataclass(frozen=True)
class Scope:
    kind: ScopeKind
    unit_id: Optional[str] = None

    @classmethod
    def teacher(cls, teacher_id: str) -> "Scope":
        return cls(ScopeKind.TEACHER, teacher_id)

    @classmethod
    def chair(cls, chair_id: str) -> "Scope":
        return cls(ScopeKind.CHAIR, chair_id)

    @classmethod
    def faculty(cls, faculty_id: str) -> "Scope":
        return cls(ScopeKind.FACULTY, faculty_id)

    @classmethod
    def university(cls) -> "Scope":
        return cls(ScopeKind.UNIVERSITY)


@dataclass
class OrgMap:
    """Teacher → chair → faculty forest with a single university root."""

    university: str = "university"
    teacher_chair: dict[str, str] = field(default_factory=dict)
    chair_faculty: dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        for teacher, chair in self.teacher_chair.items():
            if chair not in self.chair_faculty:
                raise ValidationError(
                    f"teacher {teacher} maps to chair {chair} which has no faculty"
                )

    def ensure_teacher(self, teacher_id: str, chair_id: str, faculty_id: str) -> None:
        """Keep the map in sync when a teacher is created or reassigned."""
        if chair_id:
            self.teacher_chair[teacher_id] = chair_id
            if faculty_id:
                self.chair_faculty.setdefault(chair_id, faculty_id)

    def remove_teacher(self, teacher_id: str) -> None:
        self.teacher_chair.pop(teacher_id, None)

    def faculties(self) -> list[str]:
        return sorted(set(self.chair_faculty.values()))

    def chairs_of(self, faculty_id: str) -> list[str]:
        return sorted(c for c, f in self.chair_faculty.items() if f == faculty_id)

    def teachers_under(self, scope: Scope) -> list[str]:
        """Teachers below a scope; raises UnknownUnit when it does not resolve."""
        if scope.kind is ScopeKind.UNIVERSITY:
            return sorted(self.teacher_chair)
        if scope.kind is ScopeKind.TEACHER:
            if scope.unit_id not in self.teacher_chair:
                raise UnknownUnit(f"teacher {scope.unit_id} is not in the org map")
            return [scope.unit_id]
        if scope.kind is ScopeKind.CHAIR:
            if scope.unit_id not in self.chair_faculty:
                raise UnknownUnit(f"chair {scope.unit_id} is not in the org map")
            return sorted(t for t, c in self.teacher_chair.items() if c == scope.unit_id)
        if scope.unit_id not in self.chair_faculty.values():
            raise UnknownUnit(f"faculty {scope.unit_id} is not in the org map")
        chairs = set(self.chairs_of(scope.unit_id))
        return sorted(t for t, c in self.teacher_chair.items() if c in chairs)

    def to_json(self) -> str:
        return json.dumps(
            {
                "university": self.university,
                "teachers": dict(sorted(self.teacher_chair.items())),
                "chairs": dict(sorted(self.chair_faculty.items())),
            },
            ensure_ascii=False,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "OrgMap":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"org map is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ParseError("org map must be a JSON object")
        org = cls(
            university=data.get("university", "university"),
            teacher_chair=dict(data.get("teachers", {})),
            chair_faculty=dict(data.get("chairs", {})),
        )
        org.validate()
        return org

    @classmethod
    def load(cls, path: Union[str, Path]) -> "OrgMap":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


@dataclass(frozen=True)
class UnitReport:
    scope: Scope
    questionnaire_count: int
    per_competence: dict[Competence, CompetenceScore]
    overall: Optional[CompetenceScore]


@dataclass(frozen=True)
class ItemDistribution:
    item_index: int
    counts: dict[int, int]


def _check_digests(results: Iterable[ResultRecord], bank: QuestionBank) -> list[ResultRecord]:
    checked = []
    for record in results:
        if record.bank_digest != bank.digest:
            raise BankMismatch(
                f"result {record.result_id} was produced under a different bank"
            )
        checked.append(record)
    return checked


def teacher_report(
    results: Iterable[ResultRecord], bank: QuestionBank, scope: Optional[Scope] = None
) -> UnitReport:
    """Pooled per-competence statistics over one teacher's questionnaires."""
    records = _check_digests(results, bank)
    if scope is None:
        scope = Scope.teacher(records[0].teacher_id) if records else Scope.university()
    sums: dict[Competence, int] = {c: 0 for c in Competence}
    counts: dict[Competence, int] = {c: 0 for c in Competence}
    for record in records:
        for item in bank.items:
            score = score_item(item.polarity, record.answers[item.index - 1])
            sums[item.competence] += score
            counts[item.competence] += 1
    per_competence: dict[Competence, CompetenceScore] = {}
    overall = None
    if records:
        for competence in Competence:
            mean = Fraction(sums[competence], counts[competence])
            per_competence[competence] = CompetenceScore(mean, mark_from_mean(mean))
        total_mean = Fraction(sum(sums.values()), sum(counts.values()))
        overall = CompetenceScore(total_mean, mark_from_mean(total_mean))
    return UnitReport(
        scope=scope,
        questionnaire_count=len(records),
        per_competence=per_competence,
        overall=overall,
    )


def unit_report(
    scope: Scope,
    org_map: OrgMap,
    all_results: Iterable[ResultRecord],
    bank: QuestionBank,
) -> UnitReport:
    """Rollup over every teacher under the scope."""
    members = set(org_map.teachers_under(scope))
    selected = [r for r in all_results if r.teacher_id in members]
    return teacher_report(selected, bank, scope=scope)


def item_distribution(
    results: Iterable[ResultRecord], item_index: int, bank: QuestionBank
) -> ItemDistribution:
    """Histogram of raw (pre-reversal) responses for one item."""
    if not isinstance(item_index, int) or not 1 <= item_index <= len(bank.items):
        raise IndexOutOfRange(f"item index {item_index!r} outside 1..{len(bank.items)}")
    counts = {value: 0 for value in range(1, 6)}
    for record in _check_digests(results, bank):
        counts[record.answers[item_index - 1]] += 1
    return ItemDistribution(item_index=item_index, counts=counts)

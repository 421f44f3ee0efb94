"""Anonymous one-shot teaching-staff evaluation service."""

from .bank import (
    Competence,
    Polarity,
    QuestionBank,
    QuestionItem,
    default_bank,
    item_at,
    load_bank,
    parse_bank,
)
from .scoring import (
    CategoryMark,
    CompetenceScore,
    QuestionnaireReport,
    category_mean,
    mark_from_mean,
    questionnaire_report,
    score_item,
)
from .sessions import EvaluationSession, SessionEngine, SessionPhase
from .store import AppStateRecord, ResultRecord, Store, TeacherRecord, ViewerRole

__all__ = [
    "AppStateRecord",
    "CategoryMark",
    "Competence",
    "CompetenceScore",
    "EvaluationSession",
    "Polarity",
    "QuestionBank",
    "QuestionItem",
    "QuestionnaireReport",
    "ResultRecord",
    "SessionEngine",
    "SessionPhase",
    "Store",
    "TeacherRecord",
    "ViewerRole",
    "category_mean",
    "default_bank",
    "item_at",
    "load_bank",
    "mark_from_mean",
    "parse_bank",
    "questionnaire_report",
    "score_item",
]

__version__ = "0.1.0"

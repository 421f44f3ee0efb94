"""Questionnaire session protocol.

A session is anonymous and one-shot: it starts under IP and state gating,
advances strictly one question at a time with no backtracking, and is
promoted exactly once into an anonymized result. Value-level transitions
live here as plain functions on :class:`EvaluationSession`; the
:class:`SessionEngine` binds them to a store so every transition for a
token is serialized and persisted atomically.
"""

from __future__ import annotations

import enum
import secrets
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import TYPE_CHECKING, Optional

from .bank import QuestionBank, QuestionItem, item_at
from .errors import (
    BankMismatch,
    EvaluationInactive,
    IncompleteAnswers,
    InvalidIpEntry,
    IpNotAllowed,
    OutOfOrder,
    SessionAlreadyActiveForIp,
    SessionNotActive,
)
from .scoring import ensure_response

if TYPE_CHECKING:
    from .store import ResultRecord, Store

DEFAULT_TTL_SECONDS = 2 * 60 * 60


class SessionPhase(enum.Enum):
    ACTIVE = "active"
    COMPLETED = "completed"
    ABORTED = "aborted"


def new_token() -> str:
    """URL-safe session token with 192 bits of entropy."""
    return secrets.token_urlsafe(24)


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class EvaluationSession:
    token: str
    teacher_id: str
    bank_digest: str
    client_ip: str
    started_at: datetime
    phase: SessionPhase = SessionPhase.ACTIVE
    answers: list[int] = field(default_factory=list)
    result_id: Optional[int] = None

    @property
    def cursor(self) -> int:
        """1-based index of the next question; only meaningful while active."""
        return len(self.answers) + 1


def current_question(session: EvaluationSession, bank: QuestionBank) -> tuple[int, QuestionItem]:
    """The question the session is waiting on."""
    if session.bank_digest != bank.digest:
        raise BankMismatch("session was started under a different bank")
    if session.phase is not SessionPhase.ACTIVE or session.cursor > len(bank.items):
        raise SessionNotActive("no current question for this session")
    return session.cursor, item_at(bank, session.cursor)


def submit_answer(
    session: EvaluationSession, bank: QuestionBank, index: int, value: int
) -> Optional[int]:
    """Accept the answer for exactly the current question.

    Returns the next question index, or None when the accepted answer was
    the last one. The answer is irrevocable; any other index is rejected.
    """
    if session.bank_digest != bank.digest:
        raise BankMismatch("session was started under a different bank")
    if session.phase is not SessionPhase.ACTIVE:
        raise SessionNotActive("session no longer accepts answers")
    value = ensure_response(value)
    total = len(bank.items)
    if session.cursor > total:
        raise SessionNotActive("questionnaire already fully answered")
    if index != session.cursor:
        raise OutOfOrder(
            f"answer for question {index} rejected; current question is {session.cursor}"
        )
    session.answers.append(value)
    if len(session.answers) == total:
        return None
    return session.cursor


def finalize(session: EvaluationSession, bank: QuestionBank, now: datetime) -> None:
    """Flip a fully answered session to Completed.

    Persistence of the result record is the store's job; this enforces the
    protocol side (complete answers, still active, terminal afterwards).
    """
    if session.phase is not SessionPhase.ACTIVE:
        raise SessionNotActive("session already finalized or aborted")
    if len(session.answers) != len(bank.items):
        raise IncompleteAnswers(
            f"{len(session.answers)}/{len(bank.items)} answers present"
        )
    session.phase = SessionPhase.COMPLETED


def abort_stale(session: EvaluationSession, now: datetime, ttl_seconds: float) -> bool:
    """Abort the session if it outlived the TTL; partial answers are discarded."""
    if session.phase is not SessionPhase.ACTIVE:
        raise SessionNotActive("only active sessions can expire")
    if now - session.started_at > timedelta(seconds=ttl_seconds):
        session.phase = SessionPhase.ABORTED
        session.answers.clear()
        return True
    return False


@dataclass(frozen=True)
class AnswerOutcome:
    """Result of one accepted answer: either the next index or the finished result."""

    next_index: Optional[int]
    result: Optional["ResultRecord"] = None

    @property
    def finished(self) -> bool:
        return self.result is not None


class SessionEngine:
    """Serialized session operations over a store and one active bank."""

    def __init__(self, store: "Store", bank: QuestionBank, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.store = store
        self.bank = bank
        self.ttl_seconds = ttl_seconds

    def start(self, client_ip: str, now: Optional[datetime] = None) -> EvaluationSession:
        """Gate-checked session creation; the session is persisted before the
        token is revealed to the caller."""
        now = now or utcnow()
        with self.store.transaction():
            self.store.abort_stale_sessions(now, self.ttl_seconds)
            state = self.store.get_state()
            if not state.active:
                raise EvaluationInactive("the evaluation is not open")
            try:
                ip = self.store.normalize_ip(client_ip)
            except InvalidIpEntry:
                raise IpNotAllowed(f"unrecognized client address {client_ip!r}") from None
            if ip not in state.allowlist:
                raise IpNotAllowed(f"address {ip} is not allowlisted")
            if self.store.active_session_for_ip(ip) is not None:
                raise SessionAlreadyActiveForIp(
                    f"an evaluation is already in progress from {ip}"
                )
            session = EvaluationSession(
                token=new_token(),
                teacher_id=state.selected_teacher,
                bank_digest=self.bank.digest,
                client_ip=ip,
                started_at=now,
            )
            self.store.insert_session(session)
        return session

    def get(self, token: str) -> EvaluationSession:
        return self.store.load_session(token)

    def question(self, token: str) -> tuple[int, QuestionItem]:
        with self.store.transaction():
            session = self.store.load_session(token)
            return current_question(session, self.bank)

    def answer(
        self, token: str, index: int, value: int, now: Optional[datetime] = None
    ) -> AnswerOutcome:
        """Accept one answer; on the last one, finalization runs in the same
        transaction, so the Completed flip and the result row commit together."""
        now = now or utcnow()
        with self.store.transaction():
            session = self.store.load_session(token)
            next_index = submit_answer(session, self.bank, index, value)
            if next_index is None:
                finalize(session, self.bank, now)
                record = self.store.finalize_session(session, now)
                return AnswerOutcome(next_index=None, result=record)
            self.store.save_session(session)
            return AnswerOutcome(next_index=next_index)

    def sweep_stale(self, now: Optional[datetime] = None) -> int:
        """Abort sessions past the TTL; returns how many were aborted."""
        now = now or utcnow()
        with self.store.transaction():
            return self.store.abort_stale_sessions(now, self.ttl_seconds)

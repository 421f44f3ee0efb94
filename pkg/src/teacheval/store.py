"""Durable persistence for the service's record families.

A single-file embedded SQLite store owned exclusively by one process
(enforced with a data-directory lock). All mutations serialize through one
writer lock; a transaction spans every nested store call, so composite
operations such as finalization commit or roll back as a unit.

Record families: teachers, IP allowlist, admin credential, application
state, in-flight sessions, finalized results, plus role access keys backing
privileged report reads.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import secrets
import sqlite3
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Callable, Iterator, Optional, Sequence, Union

from filelock import FileLock, Timeout

from .errors import (
    AccessDenied,
    AlreadyExists,
    InvalidIpEntry,
    InvalidPhoto,
    NoTeacherSelected,
    NotFound,
    SessionNotActive,
    StoreLocked,
    TeacherInUse,
    UnknownTeacher,
    UnknownToken,
    ValidationError,
)
from .sessions import EvaluationSession, SessionPhase, abort_stale
from .util import canonical_ip, from_iso, to_iso

MAX_PHOTO_BYTES = 2 * 1024 * 1024
JPEG_MAGIC = b"\xff\xd8\xff"

SCRYPT_PARAMS = {"n": 2**14, "r": 8, "p": 1}

_SCHEMA = """
CREATE TABLE IF NOT EXISTS teachers (
    teacher_id TEXT PRIMARY KEY,
    full_name  TEXT NOT NULL,
    photo_ref  TEXT,
    chair_id   TEXT NOT NULL DEFAULT '',
    faculty_id TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS ip_allowlist (
    ip TEXT PRIMARY KEY
);
CREATE TABLE IF NOT EXISTS admin_credentials (
    username TEXT PRIMARY KEY,
    salt     BLOB NOT NULL,
    digest   BLOB NOT NULL,
    params   TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS app_state (
    id INTEGER PRIMARY KEY CHECK (id = 1),
    active INTEGER NOT NULL DEFAULT 0,
    selected_teacher TEXT,
    bank_digest TEXT NOT NULL DEFAULT ''
);
CREATE TABLE IF NOT EXISTS sessions (
    token       TEXT PRIMARY KEY,
    teacher_id  TEXT NOT NULL,
    bank_digest TEXT NOT NULL,
    client_ip   TEXT NOT NULL,
    started_at  TEXT NOT NULL,
    phase       TEXT NOT NULL,
    answers     TEXT NOT NULL,
    result_id   INTEGER
);
CREATE INDEX IF NOT EXISTS sessions_by_ip ON sessions (client_ip, phase);
CREATE TABLE IF NOT EXISTS results (
    result_id    INTEGER PRIMARY KEY AUTOINCREMENT,
    teacher_id   TEXT NOT NULL,
    bank_digest  TEXT NOT NULL,
    completed_at TEXT NOT NULL,
    answers      TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS access_keys (
    key_digest TEXT PRIMARY KEY,
    role       TEXT NOT NULL,
    teacher_id TEXT,
    issued_at  TEXT NOT NULL
);
INSERT OR IGNORE INTO app_state (id, active, selected_teacher, bank_digest)
VALUES (1, 0, NULL, '');
"""

_UNSET = object()


class RoleKind(Enum):
    ADMIN = "admin"
    DEAN = "dean"
    RECTOR = "rector"
    TEACHER = "teacher"
    PUBLIC = "public"


@dataclass(frozen=True)
class ViewerRole:
    """Who is reading: privileged roles see raw results, Public does not."""

    kind: RoleKind
    teacher_id: Optional[str] = None

    @classmethod
    def admin(cls) -> "ViewerRole":
        return cls(RoleKind.ADMIN)

    @classmethod
    def dean(cls) -> "ViewerRole":
        return cls(RoleKind.DEAN)

    @classmethod
    def rector(cls) -> "ViewerRole":
        return cls(RoleKind.RECTOR)

    @classmethod
    def evaluated_teacher(cls, teacher_id: str) -> "ViewerRole":
        return cls(RoleKind.TEACHER, teacher_id)

    @classmethod
    def public(cls) -> "ViewerRole":
        return cls(RoleKind.PUBLIC)


@dataclass(frozen=True)
class TeacherRecord:
    teacher_id: str
    full_name: str
    chair_id: str
    faculty_id: str
    photo_ref: Optional[str] = None


@dataclass(frozen=True)
class AppStateRecord:
    active: bool
    selected_teacher: Optional[str]
    bank_digest: str
    allowlist: frozenset[str]


@dataclass(frozen=True)
class ResultRecord:
    result_id: int
    teacher_id: str
    bank_digest: str
    completed_at: datetime
    answers: tuple[int, ...]


def validate_photo(payload: bytes) -> None:
    if not payload.startswith(JPEG_MAGIC):
        raise InvalidPhoto("photo must be a JPEG (bad magic bytes)")
    if len(payload) > MAX_PHOTO_BYTES:
        raise InvalidPhoto(f"photo exceeds {MAX_PHOTO_BYTES} bytes")


class Store:
    """Embedded store; one instance per process, one process per data dir."""

    def __init__(
        self,
        db_path: Union[str, Path] = ":memory:",
        photos_dir: Optional[Path] = None,
        lock_path: Optional[Path] = None,
    ):
        self._lock = threading.RLock()
        self._txn_depth = 0
        self._file_lock: Optional[FileLock] = None
        if lock_path is not None:
            self._file_lock = FileLock(str(lock_path))
            try:
                self._file_lock.acquire(timeout=0)
            except Timeout:
                raise StoreLocked(f"data directory is in use (lock: {lock_path})") from None
        self.photos_dir = photos_dir
        if photos_dir is not None:
            photos_dir.mkdir(parents=True, exist_ok=True)
        self._mem_photos: dict[str, bytes] = {}
        self._conn = sqlite3.connect(str(db_path), check_same_thread=False)
        self._conn.isolation_level = None
        self._conn.row_factory = sqlite3.Row
        if str(db_path) != ":memory:":
            self._conn.execute("PRAGMA journal_mode=WAL")
            self._conn.execute("PRAGMA synchronous=NORMAL")
        self._conn.executescript(_SCHEMA)
        #: test seam: called with a named point inside critical transactions
        self.fault_hook: Optional[Callable[[str], None]] = None

    @classmethod
    def open(cls, data_dir: Union[str, Path]) -> "Store":
        """Open (creating if needed) the store under a data directory."""
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        return cls(
            db_path=data_dir / "evaluation.db",
            photos_dir=data_dir / "photos",
            lock_path=data_dir / ".teacheval.lock",
        )

    def close(self) -> None:
        self._conn.close()
        if self._file_lock is not None:
            self._file_lock.release()

    @contextmanager
    def transaction(self) -> Iterator[None]:
        """Reentrant write transaction; outermost exit commits, any exception
        rolls the whole unit back."""
        with self._lock:
            if self._txn_depth == 0:
                self._conn.execute("BEGIN IMMEDIATE")
            self._txn_depth += 1
            try:
                yield
            except BaseException:
                self._txn_depth -= 1
                if self._txn_depth == 0:
                    self._conn.execute("ROLLBACK")
                raise
            else:
                self._txn_depth -= 1
                if self._txn_depth == 0:
                    self._conn.execute("COMMIT")

    def _fault(self, point: str) -> None:
        if self.fault_hook is not None:
            self.fault_hook(point)

    @staticmethod
    def normalize_ip(address: str) -> str:
        try:
            return canonical_ip(address)
        except ValueError:
            raise InvalidIpEntry(f"not an IP address: {address!r}") from None

    # -- teachers ----------------------------------------------------------

    def put_teacher(
        self,
        full_name: str,
        chair_id: str = "",
        faculty_id: str = "",
        photo: Optional[bytes] = None,
        teacher_id: Optional[str] = None,
    ) -> TeacherRecord:
        if not full_name.strip():
            raise ValidationError("full_name must be non-empty")
        with self.transaction():
            tid = teacher_id or f"t-{secrets.token_hex(6)}"
            if self._conn.execute(
                "SELECT 1 FROM teachers WHERE teacher_id = ?", (tid,)
            ).fetchone():
                raise AlreadyExists(f"teacher {tid} already exists")
            photo_ref = None
            if photo is not None:
                validate_photo(photo)
                photo_ref = self._write_photo(tid, photo)
            self._conn.execute(
                "INSERT INTO teachers (teacher_id, full_name, photo_ref, chair_id, faculty_id)"
                " VALUES (?, ?, ?, ?, ?)",
                (tid, full_name.strip(), photo_ref, chair_id, faculty_id),
            )
            return self.get_teacher(tid)

    def get_teacher(self, teacher_id: str) -> TeacherRecord:
        row = self._conn.execute(
            "SELECT * FROM teachers WHERE teacher_id = ?", (teacher_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"no teacher {teacher_id}")
        return TeacherRecord(
            teacher_id=row["teacher_id"],
            full_name=row["full_name"],
            chair_id=row["chair_id"],
            faculty_id=row["faculty_id"],
            photo_ref=row["photo_ref"],
        )

    def list_teachers(self) -> list[TeacherRecord]:
        rows = self._conn.execute("SELECT teacher_id FROM teachers ORDER BY teacher_id").fetchall()
        return [self.get_teacher(r["teacher_id"]) for r in rows]

    def update_teacher(
        self,
        teacher_id: str,
        full_name: Optional[str] = None,
        chair_id: Optional[str] = None,
        faculty_id: Optional[str] = None,
        photo: object = _UNSET,
    ) -> TeacherRecord:
        with self.transaction():
            current = self.get_teacher(teacher_id)
            name = current.full_name if full_name is None else full_name.strip()
            if not name:
                raise ValidationError("full_name must be non-empty")
            photo_ref = current.photo_ref
            if photo is None:
                self._delete_photo(current.photo_ref)
                photo_ref = None
            elif photo is not _UNSET:
                validate_photo(photo)  # type: ignore[arg-type]
                photo_ref = self._write_photo(teacher_id, photo)  # type: ignore[arg-type]
            self._conn.execute(
                "UPDATE teachers SET full_name = ?, chair_id = ?, faculty_id = ?, photo_ref = ?"
                " WHERE teacher_id = ?",
                (
                    name,
                    current.chair_id if chair_id is None else chair_id,
                    current.faculty_id if faculty_id is None else faculty_id,
                    photo_ref,
                    teacher_id,
                ),
            )
            return self.get_teacher(teacher_id)

    def delete_teacher(self, teacher_id: str) -> None:
        with self.transaction():
            record = self.get_teacher(teacher_id)
            state = self.get_state()
            if state.selected_teacher == teacher_id:
                if state.active:
                    raise TeacherInUse(
                        f"teacher {teacher_id} is being evaluated right now"
                    )
                self._conn.execute("UPDATE app_state SET selected_teacher = NULL WHERE id = 1")
            self._delete_photo(record.photo_ref)
            self._conn.execute("DELETE FROM teachers WHERE teacher_id = ?", (teacher_id,))

    def _write_photo(self, teacher_id: str, payload: bytes) -> str:
        ref = f"{teacher_id}.jpg"
        if self.photos_dir is None:
            self._mem_photos[ref] = payload
        else:
            (self.photos_dir / ref).write_bytes(payload)
        return ref

    def _delete_photo(self, ref: Optional[str]) -> None:
        if ref is None:
            return
        if self.photos_dir is None:
            self._mem_photos.pop(ref, None)
        else:
            (self.photos_dir / ref).unlink(missing_ok=True)

    def read_photo(self, teacher_id: str) -> Optional[bytes]:
        record = self.get_teacher(teacher_id)
        if record.photo_ref is None:
            return None
        if self.photos_dir is None:
            return self._mem_photos.get(record.photo_ref)
        path = self.photos_dir / record.photo_ref
        return path.read_bytes() if path.exists() else None

    # -- application state -------------------------------------------------

    def get_state(self) -> AppStateRecord:
        row = self._conn.execute("SELECT * FROM app_state WHERE id = 1").fetchone()
        ips = self._conn.execute("SELECT ip FROM ip_allowlist").fetchall()
        return AppStateRecord(
            active=bool(row["active"]),
            selected_teacher=row["selected_teacher"],
            bank_digest=row["bank_digest"],
            allowlist=frozenset(r["ip"] for r in ips),
        )

    def set_state(
        self,
        active: Optional[bool] = None,
        selected_teacher: object = _UNSET,
        allowlist: Optional[Sequence[str]] = None,
    ) -> AppStateRecord:
        """Apply one atomic batch of state changes.

        Flipping the active flag or switching the teacher aborts every
        in-flight session: a result must never mix teachers or survive a
        cancelled campaign.
        """
        with self.transaction():
            current = self.get_state()
            new_active = current.active if active is None else bool(active)
            new_teacher = (
                current.selected_teacher if selected_teacher is _UNSET else selected_teacher
            )
            if new_teacher is not None:
                if not self._conn.execute(
                    "SELECT 1 FROM teachers WHERE teacher_id = ?", (new_teacher,)
                ).fetchone():
                    raise UnknownTeacher(f"no teacher {new_teacher}")
            if new_active and new_teacher is None:
                raise NoTeacherSelected("activation requires a selected teacher")
            if allowlist is not None:
                normalized: list[str] = []
                for entry in allowlist:
                    ip = self.normalize_ip(entry)
                    if ip not in normalized:
                        normalized.append(ip)
                self._conn.execute("DELETE FROM ip_allowlist")
                self._conn.executemany(
                    "INSERT INTO ip_allowlist (ip) VALUES (?)", [(ip,) for ip in normalized]
                )
            disruptive = (new_active != current.active) or (
                new_teacher != current.selected_teacher
            )
            self._conn.execute(
                "UPDATE app_state SET active = ?, selected_teacher = ? WHERE id = 1",
                (int(new_active), new_teacher),
            )
            if disruptive:
                self.abort_active_sessions()
            return self.get_state()

    def set_bank_digest(self, digest: str) -> None:
        """Record the active bank at startup; a digest change aborts any
        sessions left over from the previous bank."""
        with self.transaction():
            current = self.get_state()
            if current.bank_digest != digest:
                self.abort_active_sessions()
                self._conn.execute(
                    "UPDATE app_state SET bank_digest = ? WHERE id = 1", (digest,)
                )

    # -- sessions ------------------------------------------------------------

    def insert_session(self, session: EvaluationSession) -> None:
        with self.transaction():
            self._conn.execute(
                "INSERT INTO sessions (token, teacher_id, bank_digest, client_ip,"
                " started_at, phase, answers, result_id) VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (
                    session.token,
                    session.teacher_id,
                    session.bank_digest,
                    session.client_ip,
                    to_iso(session.started_at),
                    session.phase.value,
                    json.dumps(session.answers),
                    session.result_id,
                ),
            )

    def load_session(self, token: str) -> EvaluationSession:
        row = self._conn.execute(
            "SELECT * FROM sessions WHERE token = ?", (token,)
        ).fetchone()
        if row is None:
            raise UnknownToken("no such session")
        return EvaluationSession(
            token=row["token"],
            teacher_id=row["teacher_id"],
            bank_digest=row["bank_digest"],
            client_ip=row["client_ip"],
            started_at=from_iso(row["started_at"]),
            phase=SessionPhase(row["phase"]),
            answers=list(json.loads(row["answers"])),
            result_id=row["result_id"],
        )

    def save_session(self, session: EvaluationSession) -> None:
        with self.transaction():
            updated = self._conn.execute(
                "UPDATE sessions SET phase = ?, answers = ?, result_id = ? WHERE token = ?",
                (
                    session.phase.value,
                    json.dumps(session.answers),
                    session.result_id,
                    session.token,
                ),
            )
            if updated.rowcount != 1:
                raise UnknownToken("no such session")

    def active_session_for_ip(self, ip: str) -> Optional[str]:
        row = self._conn.execute(
            "SELECT token FROM sessions WHERE client_ip = ? AND phase = 'active' LIMIT 1",
            (ip,),
        ).fetchone()
        return row["token"] if row else None

    def active_session_tokens(self) -> list[str]:
        rows = self._conn.execute(
            "SELECT token FROM sessions WHERE phase = 'active'"
        ).fetchall()
        return [r["token"] for r in rows]

    def abort_active_sessions(self) -> int:
        """Abort all in-flight sessions, discarding their partial answers."""
        with self.transaction():
            cur = self._conn.execute(
                "UPDATE sessions SET phase = 'aborted', answers = '[]' WHERE phase = 'active'"
            )
            return cur.rowcount

    def abort_stale_sessions(self, now: datetime, ttl_seconds: float) -> int:
        with self.transaction():
            count = 0
            for token in self.active_session_tokens():
                session = self.load_session(token)
                if abort_stale(session, now, ttl_seconds):
                    self.save_session(session)
                    count += 1
            return count

    # -- results -------------------------------------------------------------

    def finalize_session(self, session: EvaluationSession, now: datetime) -> ResultRecord:
        """Atomically persist the anonymized result and the Completed flip.

        The result row carries no session token and no client IP; the
        session row keeps a link to the result so the student can view
        their own questionnaire with the token they already hold.
        """
        if session.phase is not SessionPhase.COMPLETED:
            raise SessionNotActive("finalize requires a fully answered session")
        with self.transaction():
            fresh = self._conn.execute(
                "SELECT phase FROM sessions WHERE token = ?", (session.token,)
            ).fetchone()
            if fresh is None:
                raise UnknownToken("no such session")
            if fresh["phase"] != SessionPhase.ACTIVE.value:
                raise SessionNotActive("session already finalized or aborted")
            self._fault("finalize:before-result")
            cur = self._conn.execute(
                "INSERT INTO results (teacher_id, bank_digest, completed_at, answers)"
                " VALUES (?, ?, ?, ?)",
                (
                    session.teacher_id,
                    session.bank_digest,
                    to_iso(now),
                    json.dumps(session.answers),
                ),
            )
            result_id = cur.lastrowid
            self._fault("finalize:between")
            session.result_id = result_id
            self._conn.execute(
                "UPDATE sessions SET phase = ?, answers = ?, result_id = ? WHERE token = ?",
                (
                    SessionPhase.COMPLETED.value,
                    json.dumps(session.answers),
                    result_id,
                    session.token,
                ),
            )
            self._fault("finalize:before-commit")
            return self.get_result(result_id)

    def get_result(self, result_id: int) -> ResultRecord:
        row = self._conn.execute(
            "SELECT * FROM results WHERE result_id = ?", (result_id,)
        ).fetchone()
        if row is None:
            raise NotFound(f"no result {result_id}")
        return ResultRecord(
            result_id=row["result_id"],
            teacher_id=row["teacher_id"],
            bank_digest=row["bank_digest"],
            completed_at=from_iso(row["completed_at"]),
            answers=tuple(json.loads(row["answers"])),
        )

    def list_results(
        self, role: ViewerRole, teacher_id: Optional[str] = None
    ) -> list[ResultRecord]:
        """Raw questionnaire rows, gated by role: full access for
        Admin/Dean/Rector, own rows for an evaluated teacher, nothing for
        Public (aggregate statistics are the public surface)."""
        if role.kind is RoleKind.PUBLIC:
            raise AccessDenied("raw results require a privileged role")
        if role.kind is RoleKind.TEACHER:
            if teacher_id is not None and teacher_id != role.teacher_id:
                raise AccessDenied("teachers may only read their own results")
            teacher_id = role.teacher_id
        query = "SELECT result_id FROM results"
        params: tuple = ()
        if teacher_id is not None:
            query += " WHERE teacher_id = ?"
            params = (teacher_id,)
        rows = self._conn.execute(query + " ORDER BY result_id", params).fetchall()
        return [self.get_result(r["result_id"]) for r in rows]

    def count_results(self, teacher_id: str) -> int:
        self.get_teacher(teacher_id)  # NotFound for unknown teachers
        row = self._conn.execute(
            "SELECT COUNT(*) AS n FROM results WHERE teacher_id = ?", (teacher_id,)
        ).fetchone()
        return row["n"]

    # -- admin credential ----------------------------------------------------

    def has_admin(self) -> bool:
        return bool(self._conn.execute("SELECT 1 FROM admin_credentials").fetchone())

    def init_admin(self, username: str, password: str, force: bool = False) -> None:
        with self.transaction():
            if self.has_admin() and not force:
                raise AlreadyExists("admin credential already initialized")
            salt = secrets.token_bytes(16)
            digest = _scrypt(password, salt, SCRYPT_PARAMS)
            self._conn.execute("DELETE FROM admin_credentials")
            self._conn.execute(
                "INSERT INTO admin_credentials (username, salt, digest, params)"
                " VALUES (?, ?, ?, ?)",
                (username, salt, digest, json.dumps(SCRYPT_PARAMS)),
            )

    def verify_admin(self, username: str, password: str) -> bool:
        row = self._conn.execute(
            "SELECT * FROM admin_credentials WHERE username = ?", (username,)
        ).fetchone()
        if row is None:
            # burn the same work as a real check so unknown usernames are
            # timing-indistinguishable from wrong passwords
            _scrypt(password, _DUMMY_SALT, SCRYPT_PARAMS)
            return False
        expected = row["digest"]
        actual = _scrypt(password, row["salt"], json.loads(row["params"]))
        return hmac.compare_digest(expected, actual)

    # -- access keys -----------------------------------------------------------

    def issue_access_key(self, role: ViewerRole, now: datetime) -> str:
        """Mint a privileged access key (distributed out of band by the admin);
        only its hash is stored."""
        if role.kind not in (RoleKind.DEAN, RoleKind.RECTOR, RoleKind.TEACHER):
            raise AccessDenied(f"no access keys for role {role.kind.value}")
        if role.kind is RoleKind.TEACHER:
            self.get_teacher(role.teacher_id)
        key = secrets.token_urlsafe(24)
        with self.transaction():
            self._conn.execute(
                "INSERT INTO access_keys (key_digest, role, teacher_id, issued_at)"
                " VALUES (?, ?, ?, ?)",
                (_key_digest(key), role.kind.value, role.teacher_id, to_iso(now)),
            )
        return key

    def resolve_access_key(self, key: str) -> Optional[ViewerRole]:
        row = self._conn.execute(
            "SELECT role, teacher_id FROM access_keys WHERE key_digest = ?",
            (_key_digest(key),),
        ).fetchone()
        if row is None:
            return None
        return ViewerRole(RoleKind(row["role"]), row["teacher_id"])


_DUMMY_SALT = b"\x00" * 16


def _scrypt(password: str, salt: bytes, params: dict) -> bytes:
    return hashlib.scrypt(
        password.encode("utf-8"),
        salt=salt,
        n=params["n"],
        r=params["r"],
        p=params["p"],
        dklen=32,
    )


def _key_digest(key: str) -> str:
    return hashlib.sha256(key.encode("utf-8")).hexdigest()

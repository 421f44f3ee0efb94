"""HTTP/JSON surface for students, the administrator, and privileged viewers.

Every service error carries a stable code mapped to exactly one HTTP
status. The client IP used for gating is the TCP peer address; a trusted
reverse-proxy header is honored only when explicitly enabled.
"""

from __future__ import annotations

import base64
import binascii
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, File, Form, Request, UploadFile
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .aggregation import (
    OrgMap,
    Scope,
    ScopeKind,
    UnitReport,
    item_distribution,
    teacher_report,
    unit_report,
)
from .bank import QuestionBank, default_bank, load_bank
from .config import ServiceConfig
from .errors import (
    AccessDenied,
    EvalError,
    InvalidValue,
    NotFound,
    SessionNotActive,
    Unauthenticated,
    ValidationError,
)
from .scoring import score_item
from .sessions import SessionEngine, SessionPhase, utcnow
from .store import MAX_PHOTO_BYTES, ResultRecord, RoleKind, Store, ViewerRole

#: one HTTP status per error code; this table is the API contract
ERROR_STATUS = {
    "parse_error": 400,
    "validation_error": 422,
    "index_out_of_range": 404,
    "out_of_range": 422,
    "invalid_value": 422,
    "incomplete_answers": 409,
    "evaluation_inactive": 409,
    "ip_not_allowed": 403,
    "session_active_for_ip": 409,
    "session_not_active": 409,
    "unknown_token": 404,
    "out_of_order": 409,
    "bank_mismatch": 409,
    "not_found": 404,
    "unknown_teacher": 404,
    "unknown_unit": 404,
    "teacher_in_use": 409,
    "invalid_photo": 422,
    "invalid_ip": 422,
    "no_teacher_selected": 409,
    "access_denied": 403,
    "unauthenticated": 401,
    "already_exists": 409,
    "store_locked": 503,
    "error": 500,
}


@dataclass
class AppContext:
    store: Store
    bank: QuestionBank
    engine: SessionEngine
    org_map: OrgMap
    org_map_path: Optional[Path] = None
    trusted_proxy: bool = False
    ui_dir: Optional[Path] = None
    org_lock: threading.Lock = field(default_factory=threading.Lock)

    def sync_org_map(self) -> None:
        """Mirror teacher records into the org map and persist it."""
        with self.org_lock:
            for teacher in self.store.list_teachers():
                self.org_map.ensure_teacher(
                    teacher.teacher_id, teacher.chair_id, teacher.faculty_id
                )
            if self.org_map_path is not None:
                self.org_map.save(self.org_map_path)


def build_context(config: ServiceConfig) -> AppContext:
    """Open the store, load bank and org map, and wire the session engine."""
    store = Store.open(config.data_dir)
    bank = load_bank(config.bank_path) if config.bank_path else default_bank()
    store.set_bank_digest(bank.digest)
    org_path = config.resolved_org_map_path()
    org_map = OrgMap.load(org_path) if org_path.exists() else OrgMap()
    ctx = AppContext(
        store=store,
        bank=bank,
        engine=SessionEngine(store, bank, ttl_seconds=config.session_ttl),
        org_map=org_map,
        org_map_path=org_path,
        trusted_proxy=config.trusted_proxy,
        ui_dir=config.ui_dir,
    )
    ctx.sync_org_map()
    return ctx


def _question_payload(ctx: AppContext, index: int) -> dict:
    item = ctx.bank.items[index - 1]
    return {
        "index": index,
        "total": len(ctx.bank.items),
        "text": item.text,
        "options": [
            {"value": value, "label": label}
            for value, label in enumerate(ctx.bank.option_labels, start=1)
        ],
    }


def _report_payload(report: UnitReport) -> dict:
    def block(score):
        return {"mean": float(score.mean), "mark": score.mark.label}

    return {
        "scope": {"kind": report.scope.kind.value, "id": report.scope.unit_id},
        "questionnaire_count": report.questionnaire_count,
        "per_competence": {
            comp.value: block(score) for comp, score in report.per_competence.items()
        },
        "overall": block(report.overall) if report.overall else None,
    }


def _own_view_payload(ctx: AppContext, result: ResultRecord, teacher_name: str) -> dict:
    groups: dict[str, list[dict]] = {"direct": [], "reverse": []}
    for item in ctx.bank.items:
        raw = result.answers[item.index - 1]
        entry = {
            "position": len(groups[item.polarity.value]) + 1,
            "item_index": item.index,
            "score": score_item(item.polarity, raw),
            "label": ctx.bank.option_labels[raw - 1],
            "text": item.text,
        }
        groups[item.polarity.value].append(entry)
    return {
        "result_id": result.result_id,
        "teacher": {"id": result.teacher_id, "name": teacher_name},
        "completed_at": result.completed_at.isoformat(),
        "direct": groups["direct"],
        "reverse": groups["reverse"],
    }


def _teacher_payload(record) -> dict:
    return {
        "teacher_id": record.teacher_id,
        "full_name": record.full_name,
        "chair_id": record.chair_id,
        "faculty_id": record.faculty_id,
        "has_photo": record.photo_ref is not None,
    }


def create_app(ctx: AppContext) -> FastAPI:
    app = FastAPI(title="teacheval", docs_url=None, redoc_url=None)
    app.state.ctx = ctx

    @app.exception_handler(EvalError)
    async def eval_error_handler(request: Request, exc: EvalError):
        status = ERROR_STATUS.get(exc.code, 500)
        headers = {"WWW-Authenticate": "Basic"} if status == 401 else None
        return JSONResponse(
            status_code=status,
            content={"code": exc.code, "message": str(exc)},
            headers=headers,
        )

    def client_ip(request: Request) -> str:
        if ctx.trusted_proxy:
            forwarded = request.headers.get("x-forwarded-for")
            if forwarded:
                return forwarded.split(",")[0].strip()
        return request.client.host if request.client else ""

    def require_admin(request: Request) -> None:
        header = request.headers.get("authorization", "")
        if header.lower().startswith("basic "):
            try:
                decoded = base64.b64decode(header[6:], validate=True).decode("utf-8")
            except (binascii.Error, UnicodeDecodeError):
                raise Unauthenticated("malformed authorization header") from None
            username, _, password = decoded.partition(":")
            if ctx.store.verify_admin(username, password):
                return
        raise Unauthenticated("admin credentials required")

    def viewer_role(request: Request) -> ViewerRole:
        """Admin basic auth or an access key; anything else is unauthenticated."""
        header = request.headers.get("authorization", "")
        if header.lower().startswith("basic "):
            require_admin(request)
            return ViewerRole.admin()
        key = request.headers.get("x-access-key")
        if key is None:
            raise Unauthenticated("admin credentials or an access key required")
        role = ctx.store.resolve_access_key(key)
        if role is None:
            raise AccessDenied("access key not recognized")
        return role

    # -- health ------------------------------------------------------------

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    # -- student flow --------------------------------------------------------

    @app.post("/api/session")
    def start_session(request: Request):
        session = ctx.engine.start(client_ip(request))
        teacher = ctx.store.get_teacher(session.teacher_id)
        return {
            "token": session.token,
            "teacher": {"id": teacher.teacher_id, "name": teacher.full_name},
            "total": len(ctx.bank.items),
            "question": _question_payload(ctx, 1),
        }

    @app.get("/api/session/{token}/question")
    def get_question(token: str):
        index, _ = ctx.engine.question(token)
        return _question_payload(ctx, index)

    @app.post("/api/session/{token}/answer")
    def post_answer(token: str, body: dict):
        index = body.get("index")
        value = body.get("value")
        if not isinstance(index, int) or isinstance(index, bool):
            raise InvalidValue("answer index must be an integer")
        outcome = ctx.engine.answer(token, index, value)
        if outcome.finished:
            return {
                "finished": True,
                "result_id": outcome.result.result_id,
                "answers_url": f"/api/results/own/{token}",
            }
        return {"next": _question_payload(ctx, outcome.next_index)}

    @app.get("/api/results/own/{token}")
    def own_results(token: str):
        session = ctx.store.load_session(token)
        if session.phase is not SessionPhase.COMPLETED or session.result_id is None:
            raise SessionNotActive("questionnaire not submitted yet")
        result = ctx.store.get_result(session.result_id)
        teacher = ctx.store.get_teacher(result.teacher_id)
        return _own_view_payload(ctx, result, teacher.full_name)

    # -- public statistics ---------------------------------------------------

    @app.get("/api/stats/{teacher_id}")
    def teacher_stats(teacher_id: str):
        count = ctx.store.count_results(teacher_id)
        results = ctx.store.list_results(ViewerRole.admin(), teacher_id)
        report = teacher_report(results, ctx.bank, scope=Scope.teacher(teacher_id))
        distributions = [
            {
                "index": item.index,
                "counts": {
                    str(v): n
                    for v, n in item_distribution(results, item.index, ctx.bank).counts.items()
                },
            }
            for item in ctx.bank.items
        ]
        return {
            "teacher": {
                "id": teacher_id,
                "name": ctx.store.get_teacher(teacher_id).full_name,
            },
            "count": count,
            "unit_report": _report_payload(report),
            "per_item_distributions": distributions,
        }

    # -- admin: state ----------------------------------------------------------

    @app.get("/api/admin/state")
    def get_state(request: Request):
        require_admin(request)
        state = ctx.store.get_state()
        return {
            "active": state.active,
            "selected_teacher": state.selected_teacher,
            "bank_digest": state.bank_digest,
            "allowlist": sorted(state.allowlist),
        }

    @app.put("/api/admin/state")
    def put_state(request: Request, body: dict):
        require_admin(request)
        kwargs: dict = {}
        if "active" in body:
            if not isinstance(body["active"], bool):
                raise ValidationError("active must be a boolean")
            kwargs["active"] = body["active"]
        if "selected_teacher" in body:
            kwargs["selected_teacher"] = body["selected_teacher"]
        if "allowlist" in body:
            if not isinstance(body["allowlist"], list):
                raise ValidationError("allowlist must be a list of addresses")
            kwargs["allowlist"] = body["allowlist"]
        state = ctx.store.set_state(**kwargs)
        return {
            "active": state.active,
            "selected_teacher": state.selected_teacher,
            "bank_digest": state.bank_digest,
            "allowlist": sorted(state.allowlist),
        }

    # -- admin: teachers ---------------------------------------------------------

    @app.get("/api/admin/teachers")
    def list_teachers(request: Request):
        require_admin(request)
        return [_teacher_payload(t) for t in ctx.store.list_teachers()]

    @app.post("/api/admin/teachers", status_code=201)
    def add_teacher(
        request: Request,
        full_name: str = Form(""),
        chair_id: str = Form(""),
        faculty_id: str = Form(""),
        teacher_id: Optional[str] = Form(None),
        photo: Optional[UploadFile] = File(None),
    ):
        require_admin(request)
        payload = photo.file.read(MAX_PHOTO_BYTES + 1) if photo is not None else None
        record = ctx.store.put_teacher(
            full_name=full_name,
            chair_id=chair_id,
            faculty_id=faculty_id,
            photo=payload,
            teacher_id=teacher_id,
        )
        ctx.sync_org_map()
        return _teacher_payload(record)

    @app.put("/api/admin/teachers/{teacher_id}")
    def update_teacher(
        request: Request,
        teacher_id: str,
        full_name: Optional[str] = Form(None),
        chair_id: Optional[str] = Form(None),
        faculty_id: Optional[str] = Form(None),
        photo: Optional[UploadFile] = File(None),
    ):
        require_admin(request)
        kwargs: dict = {
            "full_name": full_name,
            "chair_id": chair_id,
            "faculty_id": faculty_id,
        }
        if photo is not None:
            kwargs["photo"] = photo.file.read(MAX_PHOTO_BYTES + 1)
        record = ctx.store.update_teacher(teacher_id, **kwargs)
        ctx.sync_org_map()
        return _teacher_payload(record)

    @app.delete("/api/admin/teachers/{teacher_id}")
    def delete_teacher(request: Request, teacher_id: str):
        require_admin(request)
        ctx.store.delete_teacher(teacher_id)
        with ctx.org_lock:
            ctx.org_map.remove_teacher(teacher_id)
            if ctx.org_map_path is not None:
                ctx.org_map.save(ctx.org_map_path)
        return {"deleted": teacher_id}

    @app.get("/api/admin/teachers/{teacher_id}/photo")
    def teacher_photo(request: Request, teacher_id: str):
        require_admin(request)
        payload = ctx.store.read_photo(teacher_id)
        if payload is None:
            raise NotFound("teacher has no photo")
        return Response(content=payload, media_type="image/jpeg")

    # -- admin: reports and raw results ---------------------------------------------

    @app.get("/api/admin/report")
    def admin_report(request: Request, scope: str, id: Optional[str] = None):
        require_admin(request)
        try:
            kind = ScopeKind(scope)
        except ValueError:
            raise ValidationError(f"unknown scope {scope!r}") from None
        if kind is not ScopeKind.UNIVERSITY and not id:
            raise ValidationError(f"scope {scope!r} requires an id")
        target = Scope(kind, id if kind is not ScopeKind.UNIVERSITY else None)
        results = ctx.store.list_results(ViewerRole.admin())
        with ctx.org_lock:
            report = unit_report(target, ctx.org_map, results, ctx.bank)
        return _report_payload(report)

    @app.get("/api/admin/results")
    def admin_results(request: Request, teacher: Optional[str] = None):
        role = viewer_role(request)
        results = ctx.store.list_results(role, teacher)
        return [
            {
                "result_id": r.result_id,
                "teacher_id": r.teacher_id,
                "completed_at": r.completed_at.isoformat(),
                "bank_digest": r.bank_digest,
                "answers": list(r.answers),
            }
            for r in results
        ]

    @app.post("/api/admin/keys", status_code=201)
    def issue_key(request: Request, body: dict):
        require_admin(request)
        role_name = body.get("role")
        teacher_id = body.get("teacher_id")
        if role_name not in ("dean", "rector", "teacher"):
            raise ValidationError("role must be dean, rector, or teacher")
        role = ViewerRole(RoleKind(role_name), teacher_id)
        key = ctx.store.issue_access_key(role, utcnow())
        return {"key": key, "role": role_name, "teacher_id": teacher_id}

    # -- admin: org map ---------------------------------------------------------

    @app.get("/api/admin/orgmap")
    def get_orgmap(request: Request):
        require_admin(request)
        with ctx.org_lock:
            return {
                "university": ctx.org_map.university,
                "teachers": dict(ctx.org_map.teacher_chair),
                "chairs": dict(ctx.org_map.chair_faculty),
            }

    @app.put("/api/admin/orgmap")
    def put_orgmap(request: Request, body: dict):
        require_admin(request)
        replacement = OrgMap(
            university=body.get("university", "university"),
            teacher_chair=dict(body.get("teachers", {})),
            chair_faculty=dict(body.get("chairs", {})),
        )
        replacement.validate()
        with ctx.org_lock:
            ctx.org_map.university = replacement.university
            ctx.org_map.teacher_chair = replacement.teacher_chair
            ctx.org_map.chair_faculty = replacement.chair_faculty
            if ctx.org_map_path is not None:
                ctx.org_map.save(ctx.org_map_path)
        return {"updated": True}

    if ctx.ui_dir is not None and Path(ctx.ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ctx.ui_dir), html=True), name="ui")

    return app

"""Acceptance suite: one test per release criterion.

Each test prints an ``ACCEPTANCE <name>: PASS/FAIL`` line (run with ``-s``
to see them live) and enforces its runtime budget.
"""

from __future__ import annotations

import itertools
import random
import threading
import time
from contextlib import contextmanager
from datetime import datetime, timedelta, timezone
from fractions import Fraction

import httpx
import pytest

from teacheval.aggregation import OrgMap, Scope, unit_report
from teacheval.api import create_app
from teacheval.bank import Competence, Polarity, default_bank
from teacheval.cohort import SimulationSpec, format_summary, run_cohort
from teacheval.config import ServiceConfig
from teacheval.errors import AccessDenied, OutOfOrder, SessionNotActive
from teacheval.scoring import CategoryMark, mark_from_mean, questionnaire_report, score_item
from teacheval.sessions import (
    EvaluationSession,
    SessionEngine,
    SessionPhase,
    new_token,
    utcnow,
)
from teacheval.store import ResultRecord, Store, ViewerRole

from . import oracles
from .conftest import (
    LOOPBACK,
    activate_store,
    live_server,
    make_client,
    six_item_bank,
    tiny_bank,
)

NOW = datetime(2026, 6, 26, 22, 34, tzinfo=timezone.utc)


@contextmanager
def criterion(name: str, budget_seconds: float):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    elapsed = time.perf_counter() - started
    assert elapsed < budget_seconds, f"{name} took {elapsed:.1f}s (budget {budget_seconds}s)"
    print(f"\nACCEPTANCE {name}: PASS ({elapsed:.2f}s)")


def test_scoring_exhaustive():
    with criterion("scoring-exhaustive", 1.0):
        for polarity in Polarity:
            for response in range(1, 6):
                expected = oracles.item_score(polarity.value, response)
                assert score_item(polarity, response) == expected
        for response in range(1, 6):
            assert score_item(Polarity.REVERSE, score_item(Polarity.REVERSE, response)) == response
            assert score_item(Polarity.DIRECT, response) == response


def test_small_bank_brute_force():
    with criterion("small-bank-brute-force", 10.0):
        bank = six_item_bank()
        entries = [
            {"index": it.index, "competence": it.competence.value, "polarity": it.polarity.value}
            for it in bank.items
        ]
        checked = 0
        for vector in itertools.product((1, 2, 3, 4, 5), repeat=6):
            answers = list(vector)
            report = questionnaire_report(answers, bank)
            expected = oracles.questionnaire_means(answers, entries)
            for competence in Competence:
                assert report.per_competence[competence].mean == expected[competence.value]
                assert (
                    report.per_competence[competence].mark.label
                    == oracles.mark_for(expected[competence.value])
                )
            assert report.overall_mean == expected["overall"]
            checked += 1
        assert checked == 5**6 == 15_625


def test_mark_mapping_grid():
    with criterion("mark-mapping-grid", 1.0):
        grid = [Fraction(k, 100) for k in range(100, 501)]
        marks = [mark_from_mean(value) for value in grid]
        assert all(a <= b for a, b in zip(marks, marks[1:])), "marks must be monotone"
        assert set(marks) == set(CategoryMark), "all five marks must appear"
        assert mark_from_mean(Fraction(3, 2)) is CategoryMark.POOR
        assert mark_from_mean(Fraction(5, 2)) is CategoryMark.MEDIUM
        assert mark_from_mean(Fraction(7, 2)) is CategoryMark.GOOD
        assert mark_from_mean(Fraction(9, 2)) is CategoryMark.VERY_GOOD


class _FuzzModel:
    """Reference model for one session's protocol state."""

    def __init__(self, total: int):
        self.total = total
        self.answers: list[int] = []
        self.phase = "active"

    @property
    def cursor(self) -> int:
        return len(self.answers) + 1


def _run_interleaved_sequence(rng, engine, store, model_counter):
    bank = engine.bank
    total = len(bank.items)
    store.abort_active_sessions()
    session = engine.start(LOOPBACK, now=NOW)
    model = _FuzzModel(total)
    cursor_trace = [1]

    def make_script():
        ops = []
        for _ in range(rng.randint(1, 6)):
            roll = rng.random()
            if roll < 0.72:
                aimed = rng.random() < 0.6
                ops.append(("answer", None if aimed else rng.randint(1, total + 1), rng.randint(1, 5)))
            elif roll < 0.88:
                ops.append(("question",))
            else:
                ops.append(("expire", rng.random() < 0.3))
        return ops

    first, second = make_script(), make_script()
    i = j = 0
    sequence = []
    while i < len(first) or j < len(second):
        if j >= len(second) or (i < len(first) and rng.random() < 0.5):
            sequence.append(first[i])
            i += 1
        else:
            sequence.append(second[j])
            j += 1

    for op in sequence:
        if op[0] == "answer":
            _, raw_index, value = op
            index = model.cursor if raw_index is None else raw_index
            try:
                outcome = engine.answer(session.token, index, value, now=NOW)
            except OutOfOrder:
                assert model.phase == "active", "OutOfOrder only valid while active"
                assert index != model.cursor, "correct index must never be rejected"
            except SessionNotActive:
                assert model.phase != "active"
            else:
                assert model.phase == "active" and index == model.cursor
                model.answers.append(value)
                if len(model.answers) == total:
                    assert outcome.finished
                    model.phase = "completed"
                    model_counter["results"] += 1
                else:
                    assert outcome.next_index == model.cursor
                    cursor_trace.append(outcome.next_index)
        elif op[0] == "question":
            try:
                index, item = engine.question(session.token)
            except SessionNotActive:
                assert model.phase != "active"
            else:
                assert model.phase == "active"
                assert index == model.cursor == item.index
                cursor_trace.append(index)
        else:
            _, expire_now = op
            sweep_at = NOW + timedelta(hours=3 if expire_now else 0, minutes=1)
            engine.sweep_stale(now=sweep_at)
            if expire_now and model.phase == "active":
                model.phase = "aborted"
                model.answers = []

    assert cursor_trace == sorted(cursor_trace), "cursor must never decrease"
    stored = store.load_session(session.token)
    assert stored.phase.value == model.phase
    assert stored.answers == model.answers
    assert (stored.result_id is not None) == (model.phase == "completed")


def _run_threaded_race(engine, store, total):
    store.abort_active_sessions()
    session = engine.start(LOOPBACK, now=NOW)
    accepted, rejected = [], []
    barrier = threading.Barrier(2)

    def driver(values):
        barrier.wait()
        for value in values:
            for index in range(1, total + 1):
                try:
                    engine.answer(session.token, index, value, now=NOW)
                    accepted.append((index, value))
                except (OutOfOrder, SessionNotActive):
                    rejected.append((index, value))

    threads = [
        threading.Thread(target=driver, args=([d + 1] * total,)) for d in range(2)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    stored = store.load_session(session.token)
    assert len(accepted) == total, "exactly one winner per question"
    assert stored.phase is SessionPhase.COMPLETED
    assert len(stored.answers) == total
    assert stored.result_id is not None


def test_session_fsm_fuzz():
    with criterion("session-fsm-fuzz", 60.0):
        bank = tiny_bank()
        store = activate_store(Store(), bank)
        engine = SessionEngine(store, bank)
        rng = random.Random(20260626)
        model_counter = {"results": 0}
        interleaved = 9_900
        threaded = 100
        for _ in range(interleaved):
            _run_interleaved_sequence(rng, engine, store, model_counter)
        assert store.count_results("t1") == model_counter["results"]
        for _ in range(threaded):
            _run_threaded_race(engine, store, len(bank.items))
        assert store.count_results("t1") == model_counter["results"] + threaded
        # single-result: every completed session links exactly one result, and
        # every result belongs to exactly one completed session
        completed = store._conn.execute(
            "SELECT COUNT(*) AS n, COUNT(DISTINCT result_id) AS d FROM sessions"
            " WHERE phase = 'completed'"
        ).fetchone()
        results_total = store._conn.execute("SELECT COUNT(*) AS n FROM results").fetchone()
        assert completed["n"] == completed["d"] == results_total["n"]
        orphaned = store._conn.execute(
            "SELECT COUNT(*) AS n FROM sessions WHERE phase = 'completed' AND result_id IS NULL"
        ).fetchone()
        assert orphaned["n"] == 0


def _provision_cohort_dir(base, name):
    data_dir = base / name
    store = Store.open(data_dir)
    store.put_teacher("Prof. dr. Ana Ionescu", "chair-info", "fac-sci", teacher_id="t-001")
    store.init_admin("admin", "acceptance-pw")
    store.set_state(active=True, selected_teacher="t-001", allowlist=[LOOPBACK])
    store.close()
    OrgMap(
        university="Universitatea Test",
        teacher_chair={"t-001": "chair-info"},
        chair_faculty={"chair-info": "fac-sci"},
    ).save(data_dir / "org_map.json")
    return data_dir


def _run_cohort_once(tmp_path, name, spec):
    from teacheval.api import build_context

    data_dir = _provision_cohort_dir(tmp_path, name)
    ctx = build_context(ServiceConfig(data_dir=data_dir))
    try:
        with live_server(ctx) as url:
            summary = run_cohort(url, spec)
            with httpx.Client(base_url=url, timeout=30.0) as client:
                rows = client.get(
                    "/api/admin/results", auth=("admin", "acceptance-pw")
                ).json()
    finally:
        ctx.store.close()
    return summary, rows


def test_end_to_end_cohort(tmp_path):
    with criterion("end-to-end-cohort", 60.0):
        spec = SimulationSpec(seed=42, cohort_size=200, answer_model="uniform")
        summary, rows = _run_cohort_once(tmp_path, "first", spec)
        assert summary["completed"] == 200
        assert summary["count"] == 200
        assert len(rows) == 200

        expected = oracles.pooled_means(
            [row["answers"] for row in rows], oracles.load_default_items()
        )
        report = summary["report"]
        for competence_name, block in report["per_competence"].items():
            assert abs(block["mean"] - float(expected[competence_name])) <= 1e-9
        assert abs(report["overall"]["mean"] - float(expected["overall"])) <= 1e-9

        rerun_summary, rerun_rows = _run_cohort_once(tmp_path, "second", spec)
        assert format_summary(rerun_summary) == format_summary(summary)

        def stable(row):  # completed_at is wall-clock, everything else must match
            return {k: v for k, v in row.items() if k != "completed_at"}

        assert [stable(r) for r in rerun_rows] == [stable(r) for r in rows]


def test_pooled_vs_mean_of_means():
    with criterion("pooled-vs-mean-of-means", 30.0):
        bank = default_bank()
        org = OrgMap(
            university="Universitatea Test",
            teacher_chair={"t1": "c1", "t2": "c1", "t3": "c2", "t4": "c3"},
            chair_faculty={"c1": "f1", "c2": "f1", "c3": "f2"},
        )
        rng = random.Random(4242)
        rows = []
        for teacher in ("t1", "t2", "t3", "t4"):
            for _ in range(50):
                rows.append(
                    ResultRecord(
                        result_id=len(rows) + 1,
                        teacher_id=teacher,
                        bank_digest=bank.digest,
                        completed_at=NOW,
                        answers=tuple(rng.randint(1, 5) for _ in range(58)),
                    )
                )
        entries = oracles.load_default_items()
        scopes = (
            [Scope.teacher(t) for t in ("t1", "t2", "t3", "t4")]
            + [Scope.chair(c) for c in ("c1", "c2", "c3")]
            + [Scope.faculty(f) for f in ("f1", "f2")]
            + [Scope.university()]
        )
        for scope in scopes:
            members = set(org.teachers_under(scope))
            member_rows = [list(r.answers) for r in rows if r.teacher_id in members]
            report = unit_report(scope, org, rows, bank)
            pooled = oracles.pooled_means(member_rows, entries)
            averaged = oracles.mean_of_questionnaire_means(member_rows, entries)
            assert report.questionnaire_count == len(member_rows)
            for competence in Competence:
                lib = report.per_competence[competence].mean
                assert lib == pooled[competence.value]
                assert abs(lib - averaged[competence.value]) <= Fraction(1, 10**12)
                assert lib == averaged[competence.value]  # exact, in fact
        university = unit_report(Scope.university(), org, rows, bank)
        faculty_counts = [
            unit_report(Scope.faculty(f), org, rows, bank).questionnaire_count
            for f in org.faculties()
        ]
        assert university.questionnaire_count == sum(faculty_counts) == 200


def test_gate_matrix():
    with criterion("gate-matrix", 30.0):
        bank = tiny_bank()
        outcomes = {}
        for active in (True, False):
            for allowlisted in (True, False):
                for existing in (True, False):
                    store = Store()
                    store.put_teacher("Prof. Gate", "c", "f", teacher_id="t1")
                    store.set_bank_digest(bank.digest)
                    allowlist = [LOOPBACK] if allowlisted else ["10.99.99.99"]
                    store.set_state(active=True, selected_teacher="t1", allowlist=allowlist)
                    if existing:
                        store.insert_session(
                            EvaluationSession(
                                token=new_token(),
                                teacher_id="t1",
                                bank_digest=bank.digest,
                                client_ip=LOOPBACK,
                                started_at=utcnow(),  # young enough to survive the sweep
                            )
                        )
                    if not active:
                        # direct flag update: the public set_state would abort
                        # the synthetic session we just planted
                        store._conn.execute("UPDATE app_state SET active = 0 WHERE id = 1")
                    from teacheval.api import AppContext

                    ctx = AppContext(
                        store=store,
                        bank=bank,
                        engine=SessionEngine(store, bank),
                        org_map=OrgMap(),
                    )
                    client = make_client(create_app(ctx))
                    reply = client.post("/api/session")
                    body = reply.json()
                    outcomes[(active, allowlisted, existing)] = (
                        reply.status_code,
                        body.get("code", "ok"),
                    )
        assert outcomes[(True, True, False)] == (200, "ok")
        for cell, (status, code) in outcomes.items():
            if cell == (True, True, False):
                continue
            assert status >= 400, f"cell {cell} must be rejected"
            active, allowlisted, existing = cell
            if not active:
                assert code == "evaluation_inactive"
            elif not allowlisted:
                assert code == "ip_not_allowed"
            else:
                assert code == "session_active_for_ip"


def test_confidentiality_suite():
    with criterion("confidentiality", 30.0):
        bank = tiny_bank()
        store = activate_store(Store(), bank)
        store.put_teacher("Prof. Two", "chair-a", "fac-a", teacher_id="t2")
        store.init_admin("admin", "pw")
        from teacheval.api import AppContext

        ctx = AppContext(
            store=store, bank=bank, engine=SessionEngine(store, bank), org_map=OrgMap()
        )
        app = create_app(ctx)
        client = make_client(app)

        opened = client.post("/api/session").json()
        token = opened["token"]
        for index in range(1, 5):
            client.post(f"/api/session/{token}/answer", json={"index": index, "value": 2})

        # schema: the results table has no column for tokens or addresses
        columns = {
            row[1] for row in store._conn.execute("PRAGMA table_info(results)").fetchall()
        }
        assert columns == {"result_id", "teacher_id", "bank_digest", "completed_at", "answers"}
        raw_row = store._conn.execute("SELECT * FROM results").fetchone()
        serialized = "|".join(str(v) for v in tuple(raw_row))
        assert token not in serialized
        assert LOOPBACK not in serialized

        # public aggregate responses leak neither tokens nor client addresses
        stats_text = client.get("/api/stats/t1").text
        assert token not in stats_text
        assert LOOPBACK not in stats_text

        # raw results demand a privileged principal (HTTP)
        with pytest.raises(AccessDenied):
            store.list_results(ViewerRole.public())
        unkeyed = client.get("/api/admin/results", headers={"X-Access-Key": "guessed"})
        assert (unkeyed.status_code, unkeyed.json()["code"]) == (403, "access_denied")

        # an evaluated teacher cannot read another teacher's rows (HTTP)
        t1_key = store.issue_access_key(ViewerRole.evaluated_teacher("t1"), NOW)
        cross = client.get("/api/admin/results?teacher=t2", headers={"X-Access-Key": t1_key})
        assert (cross.status_code, cross.json()["code"]) == (403, "access_denied")
        own = client.get("/api/admin/results", headers={"X-Access-Key": t1_key})
        assert {row["teacher_id"] for row in own.json()} <= {"t1"}

        # every admin surface rejects anonymous callers with 401 (HTTP)
        for method, url in [
            ("GET", "/api/admin/state"),
            ("PUT", "/api/admin/state"),
            ("GET", "/api/admin/teachers"),
            ("POST", "/api/admin/teachers"),
            ("PUT", "/api/admin/teachers/t1"),
            ("DELETE", "/api/admin/teachers/t1"),
            ("GET", "/api/admin/report?scope=university"),
            ("GET", "/api/admin/results"),
            ("POST", "/api/admin/keys"),
            ("GET", "/api/admin/orgmap"),
            ("PUT", "/api/admin/orgmap"),
        ]:
            reply = client.request(method, url, json={})
            assert reply.status_code == 401, url
            assert reply.json()["code"] == "unauthenticated"


def test_crash_coupling(tmp_path):
    with criterion("crash-coupling", 60.0):
        bank = tiny_bank()
        data_dir = tmp_path / "crashes"
        store = activate_store(Store.open(data_dir), bank)
        fault_points = ["finalize:before-result", "finalize:between", "finalize:before-commit"]
        completed = 0
        for run in range(100):
            engine = SessionEngine(store, bank)
            session = engine.start(LOOPBACK, now=NOW)
            for index in range(1, 4):
                engine.answer(session.token, index, (run % 5) + 1, now=NOW)
            chosen = fault_points[run % len(fault_points)]

            def explode(point, chosen=chosen):
                if point == chosen:
                    raise RuntimeError("injected crash")

            store.fault_hook = explode
            with pytest.raises(RuntimeError):
                engine.answer(session.token, 4, 5, now=NOW)
            store.fault_hook = None
            store.close()

            store = Store.open(data_dir)  # the restart
            sessions_completed = store._conn.execute(
                "SELECT COUNT(*) AS n FROM sessions WHERE phase = 'completed'"
            ).fetchone()["n"]
            results_rows = store._conn.execute("SELECT COUNT(*) AS n FROM results").fetchone()["n"]
            dangling = store._conn.execute(
                "SELECT COUNT(*) AS n FROM sessions WHERE phase = 'completed' AND result_id IS NULL"
            ).fetchone()["n"]
            assert results_rows == sessions_completed == completed, f"run {run}"
            assert dangling == 0
            survivor = store.load_session(session.token)
            assert survivor.phase is SessionPhase.ACTIVE
            assert len(survivor.answers) == 3

            retry = SessionEngine(store, bank)
            outcome = retry.answer(session.token, 4, 5, now=NOW)
            assert outcome.finished
            completed += 1
            assert store.count_results("t1") == completed
        store.close()

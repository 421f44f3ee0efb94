"""Deterministic cohort simulation over the live HTTP API.

Drives full questionnaire sessions through the real endpoints (never
internal calls), so it doubles as an end-to-end harness: same spec, same
bank, same store state => byte-identical summary. Uses a single keep-alive
connection; at ~59 requests per questionnaire the per-request overhead is
what dominates a large cohort.
"""

from __future__ import annotations

import hashlib
import http.client
import json
import random
import urllib.parse
from dataclasses import dataclass
from typing import Optional

ANSWER_MODELS = ("uniform", "all_1", "all_2", "all_3", "all_4", "all_5")


@dataclass(frozen=True)
class SimulationSpec:
    seed: int
    cohort_size: int
    answer_model: str = "uniform"

    def __post_init__(self):
        if self.cohort_size < 1:
            raise ValueError("cohort_size must be >= 1")
        if self.answer_model not in ANSWER_MODELS:
            raise ValueError(f"answer_model must be one of {ANSWER_MODELS}")


class CohortError(RuntimeError):
    """An API call failed; carries the server's error code verbatim."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"{status} {code}: {message}")
        self.status = status
        self.code = code


class _JsonClient:
    """Minimal keep-alive JSON client over stdlib http.client."""

    def __init__(self, base_url: str, timeout: float = 30.0):
        parts = urllib.parse.urlsplit(base_url)
        if parts.scheme not in ("http", ""):
            raise ValueError("only plain http is supported")
        self._host = parts.hostname or "127.0.0.1"
        self._port = parts.port or 80
        self._timeout = timeout
        self._conn: Optional[http.client.HTTPConnection] = None

    def _connection(self) -> http.client.HTTPConnection:
        if self._conn is None:
            self._conn = http.client.HTTPConnection(
                self._host, self._port, timeout=self._timeout
            )
        return self._conn

    def request(self, method: str, path: str, body: Optional[dict] = None) -> dict:
        payload = None
        headers = {}
        if body is not None:
            payload = json.dumps(body).encode("utf-8")
            headers["Content-Type"] = "application/json"
        try:
            conn = self._connection()
            conn.request(method, path, payload, headers)
            response = conn.getresponse()
        except (http.client.HTTPException, ConnectionError, OSError):
            # stale keep-alive connection: reconnect and try once more
            self.close()
            conn = self._connection()
            conn.request(method, path, payload, headers)
            response = conn.getresponse()
        raw = response.read()
        try:
            parsed = json.loads(raw) if raw else {}
        except ValueError:
            parsed = {}
        if response.status >= 400:
            raise CohortError(
                response.status,
                parsed.get("code", "error"),
                parsed.get("message", raw.decode("utf-8", "replace")),
            )
        return parsed

    def close(self) -> None:
        if self._conn is not None:
            self._conn.close()
            self._conn = None


def generate_answers(spec: SimulationSpec, total: int) -> list[list[int]]:
    """The full deterministic answer stream for the cohort."""
    rng = random.Random(spec.seed)
    if spec.answer_model == "uniform":
        return [
            [rng.randint(1, 5) for _ in range(total)] for _ in range(spec.cohort_size)
        ]
    constant = int(spec.answer_model.split("_")[1])
    return [[constant] * total for _ in range(spec.cohort_size)]


def _answer_with_resync(client: _JsonClient, token: str, index: int, value: int) -> dict:
    """Submit one answer; if the transport retried a POST that had already
    landed, the rejection is resolved against the server's actual cursor."""
    try:
        return client.request(
            "POST", f"/api/session/{token}/answer", {"index": index, "value": value}
        )
    except CohortError as err:
        if err.code != "out_of_order":
            raise
        try:
            question = client.request("GET", f"/api/session/{token}/question")
        except CohortError as probe:
            if probe.code == "session_not_active":
                view = client.request("GET", f"/api/results/own/{token}")
                return {"finished": True, "result_id": view["result_id"]}
            raise err from None
        if question["index"] == index + 1:
            return {"next": question}
        raise


def run_cohort(base_url: str, spec: SimulationSpec) -> dict:
    """Complete ``cohort_size`` sessions sequentially and fetch the teacher's
    aggregate report; returns a canonical summary dict."""
    client = _JsonClient(base_url)
    try:
        total: Optional[int] = None
        teacher = None
        result_ids: list[int] = []
        answer_sets: list[list[int]] = []
        for k in range(spec.cohort_size):
            opened = client.request("POST", "/api/session")
            token = opened["token"]
            teacher = opened["teacher"]
            if total is None:
                total = opened["total"]
                answer_sets = generate_answers(spec, total)
            answers = answer_sets[k]
            reply: dict = {}
            for index in range(1, total + 1):
                reply = _answer_with_resync(client, token, index, answers[index - 1])
            if not reply.get("finished"):
                raise CohortError(500, "protocol", "final answer did not finish the session")
            result_ids.append(reply["result_id"])
        stats = client.request("GET", f"/api/stats/{teacher['id']}")
        stream = hashlib.sha256()
        for answers in answer_sets:
            stream.update(bytes(answers))
        return {
            "spec": {
                "seed": spec.seed,
                "cohort_size": spec.cohort_size,
                "answer_model": spec.answer_model,
            },
            "teacher": teacher,
            "completed": len(result_ids),
            "result_ids": result_ids,
            "answers_sha256": stream.hexdigest(),
            "count": stats["count"],
            "report": stats["unit_report"],
        }
    finally:
        client.close()


def format_summary(summary: dict) -> str:
    """Canonical text form used to assert byte-identical reruns."""
    return json.dumps(summary, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

from __future__ import annotations

import threading
import time
import warnings
from contextlib import contextmanager

import httpx
import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")  # starlette flags its own TestClient httpx shim
    from starlette.testclient import TestClient

from teacheval.aggregation import OrgMap
from teacheval.api import AppContext, create_app
from teacheval.bank import Competence, Polarity, QuestionBank, QuestionItem, build_bank, default_bank
from teacheval.sessions import SessionEngine
from teacheval.store import Store

#: minimal payload that passes JPEG validation (magic bytes + terminator)
JPEG_BYTES = b"\xff\xd8\xff\xe0" + b"\x00" * 32 + b"\xff\xd9"

LOOPBACK = "127.0.0.1"


def make_bank(layout: list[tuple[str, str]], option_labels=None) -> QuestionBank:
    """Bank from a list of (competence, polarity) value pairs."""
    items = [
        QuestionItem(
            index=i,
            text=f"Statement {i}",
            competence=Competence(comp),
            polarity=Polarity(pol),
        )
        for i, (comp, pol) in enumerate(layout, start=1)
    ]
    return build_bank(items, option_labels)


def tiny_bank() -> QuestionBank:
    """One item per competence, mixed polarities."""
    return make_bank(
        [
            ("scientific", "direct"),
            ("psycho_pedagogical", "reverse"),
            ("psychosocial", "direct"),
            ("managerial", "reverse"),
        ]
    )


def six_item_bank() -> QuestionBank:
    """Six items, every competence covered, both polarities exercised."""
    return make_bank(
        [
            ("scientific", "direct"),
            ("scientific", "reverse"),
            ("psycho_pedagogical", "direct"),
            ("psychosocial", "reverse"),
            ("managerial", "direct"),
            ("managerial", "reverse"),
        ]
    )


@pytest.fixture(scope="session")
def bank58() -> QuestionBank:
    return default_bank()


@pytest.fixture
def bank4() -> QuestionBank:
    return tiny_bank()


def activate_store(
    store: Store,
    bank: QuestionBank,
    teacher_id: str = "t1",
    allowlist: tuple[str, ...] = (LOOPBACK,),
) -> Store:
    """Teacher + active state + allowlist, ready for sessions."""
    store.put_teacher("Prof. dr. Test Teacher", "chair-a", "fac-a", teacher_id=teacher_id)
    store.set_bank_digest(bank.digest)
    store.set_state(active=True, selected_teacher=teacher_id, allowlist=list(allowlist))
    return store


def make_engine(bank: QuestionBank, **kwargs) -> SessionEngine:
    store = activate_store(Store(), bank)
    return SessionEngine(store, bank, **kwargs)


def make_ctx(bank: QuestionBank, store: Store | None = None, **ctx_kwargs) -> AppContext:
    store = store or Store()
    store.set_bank_digest(bank.digest)
    return AppContext(
        store=store,
        bank=bank,
        engine=SessionEngine(store, bank),
        org_map=OrgMap(university="Universitatea Test"),
        **ctx_kwargs,
    )


def make_client(app, ip: str = LOOPBACK) -> httpx.Client:
    """HTTP client whose requests appear to come from the given peer IP."""
    return TestClient(app, client=(ip, 40000))


def api_fixture(bank: QuestionBank, ip: str = LOOPBACK):
    """(ctx, client) pair over an activated in-memory store."""
    store = activate_store(Store(), bank)
    ctx = make_ctx(bank, store=store)
    return ctx, make_client(create_app(ctx), ip=ip)


@contextmanager
def live_server(ctx):
    """Run the app on a real loopback socket; yields the base URL."""
    import uvicorn

    config = uvicorn.Config(
        create_app(ctx), host=LOOPBACK, port=0, log_level="warning", access_log=False
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    try:
        deadline = time.monotonic() + 15
        while not server.started:
            if time.monotonic() > deadline:
                raise RuntimeError("server did not come up")
            time.sleep(0.01)
        port = server.servers[0].sockets[0].getsockname()[1]
        yield f"http://{LOOPBACK}:{port}"
    finally:
        server.should_exit = True
        thread.join(timeout=10)


def complete_session(client: httpx.Client, answers: list[int]) -> dict:
    """Run one full questionnaire over HTTP; returns the finish payload."""
    opened = client.post("/api/session").json()
    token = opened["token"]
    reply = None
    for index, value in enumerate(answers, start=1):
        response = client.post(
            f"/api/session/{token}/answer", json={"index": index, "value": value}
        )
        response.raise_for_status()
        reply = response.json()
    reply["token"] = token
    return reply

"""HTTP chat service: sessions over a shared, immutable flow.

One engine per session; requests for a session are serialized by a lock,
distinct sessions proceed in parallel.  The API is JSON over plain
request/response:

* ``POST /api/session``        create a session, returns the opening text
* ``POST /api/chat``           ``{"session_id", "text"}`` -> turn report
* ``GET  /api/session/{id}``   current state and variables
* ``GET  /healthz``            liveness
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from patter.composite import CompositeFlow
from patter.engine import ChatEngine, ConversationEnded
from patter.flow import DialogueFlow, USER


@dataclass
class _Slot:
    engine: ChatEngine
    lock: threading.Lock


class SessionStore:
    def __init__(self, flow: DialogueFlow | CompositeFlow, root_seed=0):
        self.flow = flow
        self.root_seed = root_seed
        self._slots: dict[str, _Slot] = {}
        self._counter = 0
        self._lock = threading.Lock()

    def create(self) -> tuple[str, _Slot]:
        with self._lock:
            self._counter += 1
            session_id = f"s{self._counter:06d}"
            # per-session seed pinned by creation order, for reproducible tests
            seed = f"{self.root_seed}:{self._counter}"
            slot = _Slot(ChatEngine(self.flow, seed=seed), threading.Lock())
            self._slots[session_id] = slot
        return session_id, slot

    def get(self, session_id: str) -> _Slot | None:
        with self._lock:
            return self._slots.get(session_id)


def _json_error(status: int, code: str) -> JSONResponse:
    return JSONResponse({"error": code}, status_code=status)


def create_app(
    flow: DialogueFlow | CompositeFlow,
    root_seed=0,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="patter chat service")
    store = SessionStore(flow, root_seed)
    app.state.store = store

    @app.get("/healthz")
    def healthz():
        return JSONResponse({"status": "ok"})

    @app.post("/api/session")
    async def create_session(request: Request):
        session_id, slot = store.create()
        with slot.lock:
            report = slot.engine.start()
        return {
            "session_id": session_id,
            "text": report.text,
            "state": report.state,
            "outcome": report.kind,
            "turn": report.turn,
        }

    @app.post("/api/chat")
    async def chat(request: Request):
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _json_error(400, "malformed_json")
        if not isinstance(body, dict) or not isinstance(body.get("text"), str) \
                or not isinstance(body.get("session_id"), str):
            return _json_error(400, "malformed_json")
        slot = store.get(body["session_id"])
        if slot is None:
            return _json_error(404, "unknown_session")
        with slot.lock:
            engine = slot.engine
            if engine.ended or _awaiting_system(engine):
                return _json_error(409, "out_of_turn")
            try:
                report = engine.respond(body["text"])
            except ConversationEnded:
                return _json_error(409, "out_of_turn")
        return {
            "text": report.text,
            "state": report.state,
            "outcome": report.kind,
            "turn": report.turn,
            "fired_rules": report.fired_rules,
            "variables": engine.variables(),
        }

    @app.get("/api/session/{session_id}")
    def session_info(session_id: str):
        slot = store.get(session_id)
        if slot is None:
            return _json_error(404, "unknown_session")
        with slot.lock:
            engine = slot.engine
            return {
                "state": engine.session.state,
                "variables": engine.variables(),
                "turn": engine.session.turn,
                "ended": engine.ended,
            }

    if ui_dir:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _awaiting_system(engine: ChatEngine) -> bool:
    try:
        return engine.flow.speaker(engine.session.state) != USER
    except Exception:
        return True

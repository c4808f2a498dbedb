"""HTTP API over consultation sessions.

Sessions are stored one file each, written as the same serialized event log
the CLI uses, and reloaded from disk on every request: a restarted server
picks up existing consultations with no recovery step. Writes append under a
per-session lock.

All errors share one shape: {"code": ..., "message": ..., "detail": ...}.
"""

from __future__ import annotations

import os
import threading
import uuid
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel

from . import kb as kbmod
from . import report
from .engine import Answer, NotDerivedError, NotPendingError
from .kbdsl import KnowledgeBase
from .session import COMPLETE, Question, Session, apply_answers, load_session


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: Any = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


class SessionStore:
    """File-per-session persistence. Append-only within a session."""

    def __init__(self, kb: KnowledgeBase, root: str):
        self.kb = kb
        self.root = root
        os.makedirs(root, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> str:
        if not session_id.isalnum():
            raise KeyError(session_id)
        return os.path.join(self.root, f"{session_id}.session")

    def create(self) -> Session:
        session = Session(self.kb, uuid.uuid4().hex[:12])
        self.write(session)
        return session

    def write(self, session: Session) -> None:
        with open(self._path(session.id), "w", encoding="utf-8") as fh:
            fh.write(session.serialize())

    def append_line(self, session_id: str, line: str) -> None:
        with open(self._path(session_id), "a", encoding="utf-8") as fh:
            fh.write(line + "\n")

    def load(self, session_id: str) -> Session:
        path = self._path(session_id)
        if not os.path.exists(path):
            raise KeyError(session_id)
        with open(path, encoding="utf-8") as fh:
            return load_session(self.kb, fh.read(), session_id)


class CreateSessionIn(BaseModel):
    fixture: str | None = None
    answers: dict[str, Any] | None = None


class AnswerIn(BaseModel):
    attribute: str
    value: Any = None  # null means answered unknown
    cf: float = 1.0


class WhatIfIn(BaseModel):
    overrides: dict[str, Any]
    cf: float = 1.0


def _question_json(question: Question | None) -> dict | None:
    if question is None:
        return None
    return {
        "attribute": question.attribute,
        "prompt": question.prompt,
        "kind": question.kind,
        "values": list(question.values),
        "unit": question.unit,
        "dimension": question.dimension,
        "goal": question.goal,
    }


def _answers_json(session: Session) -> dict[str, dict]:
    return {
        attr: {"value": ans.value, "cf": ans.cf} for attr, ans in session.answers.items()
    }


def _session_state(session: Session) -> dict:
    question = session.next_question()
    return {
        "session_id": session.id,
        "status": COMPLETE if question is None else "in_progress",
        "answered": len(session.answers),
        "next_question": _question_json(question),
    }


def default_store_dir() -> str:
    return os.environ.get("FEASO_STORE") or os.path.join(
        os.path.expanduser("~"), ".feaso", "sessions"
    )


def create_app(kb: KnowledgeBase | None = None, store_dir: str | None = None) -> FastAPI:
    if kb is None:
        kb = kbmod.load_bundled_kb()
    store = SessionStore(kb, store_dir or default_store_dir())

    app = FastAPI(title="feasibility screening service", version=kb.header.version)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            {"code": exc.code, "message": exc.message, "detail": exc.detail},
            status_code=exc.status,
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            {"code": "invalid_request", "message": "request body failed validation",
             "detail": exc.errors()},
            status_code=422,
        )

    @app.exception_handler(Exception)
    async def _unhandled(_request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(
            {"code": "internal", "message": str(exc), "detail": None}, status_code=500
        )

    def get_session(session_id: str) -> Session:
        try:
            return store.load(session_id)
        except KeyError:
            raise ApiError(404, "not_found", f"no session {session_id!r}") from None

    def invalid(exc: kbmod.InvalidAnswerError) -> ApiError:
        return ApiError(
            422,
            "invalid_answer",
            str(exc),
            {"attribute": exc.attribute, "constraint": exc.constraint},
        )

    @app.get("/kb/meta")
    def kb_meta() -> dict:
        askable = [a for a, d in kb.attributes.items() if d.askable]
        return {
            "name": kb.header.name,
            "version": kb.header.version,
            "cf_threshold": kb.header.cf_threshold,
            "attributes": len(kb.attributes),
            "askable": len(askable),
            "rules": len(kb.rules),
            "computes": len(kb.computes),
            "fixtures": kbmod.fixture_names(),
        }

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionIn | None = None) -> dict:
        session = Session(kb, uuid.uuid4().hex[:12])
        if body is not None and body.fixture:
            try:
                fx = kbmod.fixture(body.fixture, kb)
            except KeyError as exc:
                raise ApiError(404, "not_found", str(exc.args[0])) from None
            apply_answers(session, fx.answers)
        if body is not None and body.answers:
            for attribute, value in body.answers.items():
                try:
                    session.answer(attribute, value)
                except kbmod.InvalidAnswerError as exc:
                    raise invalid(exc) from None
        store.write(session)
        return _session_state(session)

    @app.get("/sessions/{session_id}")
    def session_state(session_id: str) -> dict:
        session = get_session(session_id)
        state = _session_state(session)
        state["answers"] = _answers_json(session)
        return state

    @app.get("/sessions/{session_id}/next-question")
    def next_question(session_id: str) -> dict:
        session = get_session(session_id)
        question = session.next_question()
        return {
            "next_question": _question_json(question),
            "status": COMPLETE if question is None else "in_progress",
        }

    @app.post("/sessions/{session_id}/answers")
    def record_answer(session_id: str, body: AnswerIn) -> dict:
        with store.lock(session_id):
            session = get_session(session_id)
            if session.next_question() is None:
                raise ApiError(
                    409,
                    "session_complete",
                    "the consultation is complete; no further answers are accepted",
                )
            try:
                event = session.answer(body.attribute, body.value, body.cf)
            except kbmod.InvalidAnswerError as exc:
                raise invalid(exc) from None
            store.append_line(
                session_id,
                kbmod.format_answer_line(kb, event.attribute, Answer(event.value, event.cf)),
            )
        state = _session_state(session)
        state["recorded"] = {"attribute": event.attribute, "value": event.value, "cf": event.cf}
        return state

    @app.get("/sessions/{session_id}/report")
    def session_report(session_id: str, format: str = "json"):
        session = get_session(session_id)
        assessment = session.assess()
        if format == "md":
            return PlainTextResponse(
                report.render_markdown(report.assessment_payload(assessment)),
                media_type="text/markdown",
            )
        if format != "json":
            raise ApiError(422, "invalid_request", f"unknown report format {format!r}")
        return report.assessment_payload(assessment)

    @app.get("/sessions/{session_id}/explain")
    def explain(session_id: str, attribute: str, mode: str = "how") -> dict:
        session = get_session(session_id)
        if mode == "why":
            try:
                return {"attribute": attribute, "chain": session.why(attribute)}
            except NotPendingError as exc:
                raise ApiError(422, "not_pending", str(exc)) from None
        if mode != "how":
            raise ApiError(422, "invalid_request", f"unknown explain mode {mode!r}")
        try:
            return {"attribute": attribute, "proofs": session.how(attribute)}
        except NotDerivedError as exc:
            raise ApiError(422, "not_derived", str(exc)) from None

    @app.post("/sessions/{session_id}/whatif")
    def whatif(session_id: str, body: WhatIfIn) -> dict:
        session = get_session(session_id)
        try:
            result = session.whatif(body.overrides, body.cf)
        except kbmod.InvalidAnswerError as exc:
            raise invalid(exc) from None
        baseline = report.assessment_payload(result.baseline)
        variant = report.assessment_payload(result.variant)
        return {
            "baseline": {
                "verdict": baseline["verdict"],
                "cf": baseline["cf"],
                "figures": baseline["figures"],
            },
            "variant": {
                "verdict": variant["verdict"],
                "cf": variant["cf"],
                "figures": variant["figures"],
            },
            "changed": result.changed,
        }

    return app

"""HTTP service for live multi-turn query sessions.

JSON over HTTP:
    POST   /sessions                      {"date"?: "YYYY-MM-DD"} -> {"session_id"}
    POST   /sessions/{id}/utterances      {"text": str, "date"?: str} -> turn payload
    GET    /sessions/{id}                 -> full transcript
    DELETE /sessions/{id}                 -> acknowledgment (idempotent)

Every response carries "api_version". Result tables are capped at
RESULT_ROW_CAP rows with the full count alongside.
"""

from __future__ import annotations

import datetime as dt
import secrets
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from pydantic import BaseModel

from .corpus.types import Database, Utterance
from .infer_eval.session import InferenceSessionState, new_session, predict_turn
from .neural.params import load_checkpoint
from .preprocess import DEFAULT_TYPE_PRIORITY, build_entity_dictionary
from .sqlkit.executor import execute

API_VERSION = "1"
RESULT_ROW_CAP = 200


@dataclass
class Session:
    session_id: str
    state: InferenceSessionState
    created_at: float
    document_date: dt.date
    transcript: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)


class CreateSessionRequest(BaseModel):
    date: str | None = None


class UtteranceRequest(BaseModel):
    text: str
    date: str | None = None


def _parse_date(value: str | None, fallback: dt.date) -> dt.date:
    if value is None:
        return fallback
    try:
        return dt.date.fromisoformat(value)
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=f"bad date: {value!r}") from exc


def build_app(
    checkpoint_path: str | None = None,
    database_path: str | None = None,
    default_date: str = "1993-02-03",
    ui_dir: str | None = None,
    *,
    preloaded=None,
) -> FastAPI:
    """Assemble the service; ``preloaded`` may carry (config, params, database)
    already in memory (used by tests and embedding callers)."""
    app = FastAPI(title="convsql session service")
    state: dict = {"ready": False}

    def load() -> None:
        if preloaded is not None:
            config, params, database = preloaded
        else:
            if checkpoint_path is None or database_path is None:
                return
            config, params, _ = load_checkpoint(checkpoint_path)
            database = Database.load(database_path)
        state.update(
            ready=True,
            config=config,
            params=params,
            database=database,
            dictionary=build_entity_dictionary(database, DEFAULT_TYPE_PRIORITY),
            default_date=dt.date.fromisoformat(default_date),
            sessions={},
            registry_lock=threading.Lock(),
        )

    load()

    def _require_ready() -> None:
        if not state.get("ready"):
            raise HTTPException(status_code=503, detail="model not loaded")

    def _get_session(session_id: str) -> Session:
        _require_ready()
        session = state["sessions"].get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    @app.post("/sessions")
    def create_session(body: CreateSessionRequest | None = None):
        _require_ready()
        body = body or CreateSessionRequest()
        document_date = _parse_date(body.date, state["default_date"])
        session_id = secrets.token_hex(16)
        session = Session(
            session_id=session_id,
            state=new_session(state["config"], state["params"], state["dictionary"], document_date),
            created_at=time.time(),
            document_date=document_date,
        )
        with state["registry_lock"]:
            state["sessions"][session_id] = session
        return {
            "api_version": API_VERSION,
            "session_id": session_id,
            "document_date": document_date.isoformat(),
        }

    @app.post("/sessions/{session_id}/utterances")
    def post_utterance(session_id: str, body: UtteranceRequest):
        session = _get_session(session_id)
        if not body.text.strip():
            raise HTTPException(status_code=400, detail="empty utterance")
        if body.date is not None:
            session.state.document_date = _parse_date(body.date, session.document_date)
        with session.lock:
            record = predict_turn(
                session.state,
                Utterance.from_text(body.text),
                database=state["database"],
            )
            table = execute(record.query_tokens, state["database"])
            payload = {
                "api_version": API_VERSION,
                "session_id": session_id,
                "turn_index": record.turn_index,
                "utterance": {
                    "raw": body.text,
                    "tokens": record.utterance_tokens,
                    "anonymized_tokens": record.anonymized_utterance,
                },
                "sql": {
                    "tokens": record.query_tokens,
                    "text": " ".join(record.query_tokens),
                    "anonymized_tokens": record.anonymized_query,
                },
                "provenance": [
                    {"start": s, "end": e, "source_turn": a} for s, e, a in record.provenance
                ],
                "result": {
                    "columns": list(table.columns),
                    "rows": [list(r) for r in table.rows[:RESULT_ROW_CAP]],
                    "total_rows": len(table.rows),
                    "execution_failed": table.execution_failed,
                },
                "segments_used": record.segments_used,
                "attention": {
                    "tokens": [
                        {"turn": t, "token": tok} for t, tok in record.attended_tokens
                    ],
                    "steps": [[float(x) for x in row] for row in record.attention],
                },
                "anonymization_added": [
                    {"placeholder": p, "literal": l} for p, l in record.anonymization_added
                ],
            }
            session.transcript.append(payload)
        return payload

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = _get_session(session_id)
        with session.lock:
            return {
                "api_version": API_VERSION,
                "session_id": session_id,
                "created_at": session.created_at,
                "document_date": session.document_date.isoformat(),
                "turns": list(session.transcript),
            }

    @app.delete("/sessions/{session_id}")
    def delete_session(session_id: str):
        _require_ready()
        with state["registry_lock"]:
            state["sessions"].pop(session_id, None)
        return {"api_version": API_VERSION, "deleted": session_id}

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.get("/healthz")
    def health():
        return {"api_version": API_VERSION, "ready": bool(state.get("ready"))}

    return app

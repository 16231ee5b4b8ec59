"""HTTP JSON API exposing the session loop to a browser annotator.

Protocol per session: POST /sessions to create, then strictly alternate
GET /sessions/{id}/next and POST /sessions/{id}/responses until the budget
is spent, with POST /sessions/{id}/finalize available once 8 verdicts exist.
GET /sessions/{id}/state reconstructs everything a client needs after a
reload.

Durability: every mutation is appended to a per-session write-ahead log and
snapshotted to disk before the request is acknowledged, so a restarted
server resumes every session with no lost annotations. Duplicate response
submissions are idempotent on (session_id, lf_id).
"""

from __future__ import annotations

import json
import os
import secrets
import threading
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.exceptions import HTTPException, RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .acquisition import MODES, AcquisitionConfig
from .errors import SessionComplete, ValidationError
from .feedback import RESPONSES
from .session import (
    SCENARIOS,
    SEED_QUERY_COUNT,
    Session,
    SessionContext,
    init_session,
    load_session,
    resume_session,
    save_session,
)

__all__ = ["create_app"]


class CreateSessionBody(BaseModel):
    mode: str = "lse_a"
    r: float = 0.7
    m_tilde: int = 100
    T: int = 100
    seed: int = 0


class ResponseBody(BaseModel):
    lf_id: int
    response: str
    confident: bool = True


class FinalizeBody(BaseModel):
    scenario: str


def _err(status: int, code: str, message: str, fld: str | None = None) -> HTTPException:
    detail = {"code": code, "message": message}
    if fld is not None:
        detail["field"] = fld
    return HTTPException(status_code=status, detail=detail)


@dataclass
class _Registry:
    """In-memory sessions plus their on-disk WAL/snapshot paths."""

    ctx: SessionContext
    directory: str | None
    sessions: dict[str, Session] = field(default_factory=dict)
    locks: dict[str, threading.Lock] = field(default_factory=dict)
    create_lock: threading.Lock = field(default_factory=threading.Lock)

    def snapshot_path(self, sid: str) -> str:
        return os.path.join(self.directory, f"{sid}.json")

    def wal_path(self, sid: str) -> str:
        return os.path.join(self.directory, f"{sid}.wal")

    def persist(self, sid: str) -> None:
        if self.directory is None:
            return
        tmp = self.snapshot_path(sid) + ".tmp"
        save_session(self.sessions[sid].state, tmp)
        os.replace(tmp, self.snapshot_path(sid))

    def wal_append(self, sid: str, entry: dict) -> None:
        if self.directory is None:
            return
        line = json.dumps(entry, sort_keys=True, separators=(",", ":")) + "\n"
        with open(self.wal_path(sid), "a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())

    def restore(self) -> None:
        """Load snapshots, then replay WAL responses newer than the snapshot."""
        if self.directory is None or not os.path.isdir(self.directory):
            return
        for name in sorted(os.listdir(self.directory)):
            if not name.endswith(".json"):
                continue
            sid = name[: -len(".json")]
            sess = resume_session(self.ctx, load_session(os.path.join(self.directory, name)))
            wal = self.wal_path(sid)
            if os.path.exists(wal):
                with open(wal, encoding="utf-8") as fh:
                    for line in fh:
                        if not line.strip():
                            continue
                        entry = json.loads(line)
                        if entry.get("op") != "response":
                            continue
                        lf_id = entry["lf_id"]
                        if sess.state.pending == lf_id:
                            sess.record_response(lf_id, entry["response"], entry["confident"])
            self.sessions[sid] = sess
            self.locks[sid] = threading.Lock()
            self.persist(sid)


def create_app(
    ctx: SessionContext,
    sessions_dir: str | None = None,
    static_dir: str | None = None,
) -> FastAPI:
    """Build the API over one shared corpus/pool context."""
    if sessions_dir is not None:
        os.makedirs(sessions_dir, exist_ok=True)
    app = FastAPI(title="iws", docs_url=None, redoc_url=None)
    reg = _Registry(ctx=ctx, directory=sessions_dir)
    reg.restore()

    @app.exception_handler(HTTPException)
    async def _http_error(_req: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict):
            detail = {"code": "error", "message": str(detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        fld = ".".join(str(x) for x in first.get("loc", ()) if x != "body") or None
        body = {"code": "invalid_request", "message": first.get("msg", "invalid request body")}
        if fld:
            body["field"] = fld
        return JSONResponse(status_code=400, content=body)

    def _session(sid: str) -> tuple[Session, threading.Lock]:
        sess = reg.sessions.get(sid)
        if sess is None:
            raise _err(404, "unknown_session", f"no session {sid!r}")
        return sess, reg.locks[sid]

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        if body.mode not in MODES:
            raise _err(400, "invalid_config", f"mode must be one of {MODES}", "mode")
        if not 0.5 < body.r < 1.0:
            raise _err(400, "invalid_config", "r must lie strictly inside (0.5, 1)", "r")
        if body.m_tilde < 1:
            raise _err(400, "invalid_config", "m_tilde must be >= 1", "m_tilde")
        if body.T < SEED_QUERY_COUNT:
            raise _err(400, "invalid_config", f"T must be >= {SEED_QUERY_COUNT}", "T")
        config = AcquisitionConfig(mode=body.mode, r=body.r, m_tilde=body.m_tilde, seed=body.seed)
        with reg.create_lock:
            sid = secrets.token_urlsafe(16)
            reg.sessions[sid] = init_session(ctx, config, body.T)
            reg.locks[sid] = threading.Lock()
        reg.wal_append(sid, {"op": "create", "mode": body.mode, "T": body.T, "seed": body.seed})
        reg.persist(sid)
        return {"session_id": sid, "iteration": 0, "T": body.T}

    @app.get("/sessions/{sid}/next")
    def get_next(sid: str):
        sess, lock = _session(sid)
        with lock:
            st = sess.state
            if st.finalized is not None:
                return {"status": "complete", "iteration": st.iteration, "T": st.T,
                        "finalized": st.finalized}
            if st.pending is not None:
                raise _err(409, "pending_response", f"LF {st.pending} is awaiting a response")
            try:
                payload = sess.next_query()
            except SessionComplete as exc:
                return {"status": "complete", "iteration": st.iteration, "T": st.T,
                        "reason": str(exc)}
            reg.wal_append(sid, {"op": "next", "lf_id": payload["lf_id"]})
            reg.persist(sid)
            return {"status": "query", "snippets_collapsed": True, **payload}

    @app.post("/sessions/{sid}/responses")
    def post_response(sid: str, body: ResponseBody):
        if body.response not in RESPONSES:
            raise _err(400, "invalid_response", f"response must be one of {RESPONSES}", "response")
        sess, lock = _session(sid)
        with lock:
            st = sess.state
            if body.lf_id in st.queries.queried_ids():
                return {"iteration": st.iteration, "recorded": False}
            if st.pending is None or body.lf_id != st.pending:
                raise _err(409, "not_pending", f"LF {body.lf_id} is not the pending query")
            reg.wal_append(
                sid,
                {"op": "response", "lf_id": body.lf_id, "response": body.response,
                 "confident": body.confident},
            )
            try:
                sess.record_response(body.lf_id, body.response, body.confident)
            except ValidationError as exc:
                raise _err(400, "invalid_response", str(exc), "response")
            reg.persist(sid)
            return {"iteration": st.iteration, "recorded": True}

    @app.post("/sessions/{sid}/finalize")
    def post_finalize(sid: str, body: FinalizeBody):
        if body.scenario not in SCENARIOS:
            raise _err(400, "invalid_scenario", f"scenario must be one of {SCENARIOS}", "scenario")
        sess, lock = _session(sid)
        with lock:
            if len(sess.state.queries) < SEED_QUERY_COUNT:
                raise _err(
                    400,
                    "too_few_annotations",
                    f"need at least {SEED_QUERY_COUNT} responses before finalizing",
                )
            metrics = sess.finalize(body.scenario, store=True)
            reg.wal_append(sid, {"op": "finalize", "scenario": body.scenario})
            reg.persist(sid)
            return metrics

    @app.get("/sessions/{sid}/state")
    def get_state(sid: str):
        sess, lock = _session(sid)
        with lock:
            st = sess.state
            history = [
                {
                    "lf_id": r.lf_id,
                    "response": r.response,
                    "weight": r.weight,
                    "iteration": r.iteration,
                    "description": ctx.pool[r.lf_id].describe(),
                }
                for r in st.queries.records
            ]
            return {
                "session_id": sid,
                "status": "complete" if st.finalized is not None or len(st.queries) >= st.T else "active",
                "iteration": st.iteration,
                "T": st.T,
                "mode": st.config.mode,
                "r": st.config.r,
                "m_tilde": st.config.m_tilde,
                "pending": st.pending,
                "pending_query": sess.pending_query(),
                "history": history,
                "finalized": st.finalized,
                "warnings": st.warnings,
            }

    if static_dir is not None and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")
    return app

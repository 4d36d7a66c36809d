"""HTTP session API: problem ingestion, interactive elicitation, persistence.

Each session is an append-only JSONL event log (created / query / answer /
recommendation records) in the data directory; replaying any prefix of a log
reconstructs a valid session, so a crash between events loses at most the
event being written.  One query is active per session at a time: answering a
superseded query id is a conflict.  Session mutations are serialized by a
per-session lock; distinct sessions are independent.
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Body, FastAPI, HTTPException

from .document import ProblemDocument, from_json_obj, load_problem
from .elicit import (
    ElicitationSession,
    Termination,
    query_from_json,
    query_to_json,
    render_query,
)
from .errors import InconsistentConstraintError, RegretkitError, ValidationError

DATA_DIR_ENV = "REGRETKIT_DATA"


def _now() -> float:
    return time.time()


@dataclass
class LiveSession:
    session_id: str
    document: ProblemDocument
    session: ElicitationSession
    log_path: Path
    active_query: Optional[dict] = None  # {"query_id", "query": machine form}
    issued: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def status(self) -> dict:
        cur = self.session.current
        schema = self.document.schema
        return {
            "session_id": self.session_id,
            "problem": self.document.name,
            "strategy": self.session.strategy,
            "mmr": cur.value,
            "x_star": list(schema.outcome_names(cur.x_star)),
            "witness": list(schema.outcome_names(cur.witness)),
            "query_count": self.session.query_count,
            "done_reason": self.session.done(),
            "trace": [
                {"index": s.index, "mmr": s.mmr} for s in self.session.trace
            ],
        }


class SessionStore:
    """In-memory session registry backed by one JSONL log per session."""

    def __init__(self, data_dir: Path):
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self._live: dict[str, LiveSession] = {}
        self._registry_lock = threading.Lock()

    # -- persistence -------------------------------------------------------

    def _append(self, live: LiveSession, event: dict) -> None:
        with open(live.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")

    def create(
        self,
        document: ProblemDocument,
        strategy: str,
        threshold: float = 0.0,
        max_queries: int = 100,
        seed: int = 0,
        session_id: Optional[str] = None,
    ) -> LiveSession:
        sid = session_id or uuid.uuid4().hex[:12]
        session = ElicitationSession(
            document.structure,
            document.initial_space(),
            document.feasibility,
            strategy,
            Termination(threshold=threshold, max_queries=max_queries),
            seed=seed,
        )
        live = LiveSession(
            session_id=sid,
            document=document,
            session=session,
            log_path=self.sessions_dir / f"{sid}.jsonl",
        )
        self._append(
            live,
            {
                "event": "created",
                "at": _now(),
                "problem": document.to_json_obj(),
                "strategy": strategy,
                "threshold": threshold,
                "max_queries": max_queries,
                "seed": seed,
            },
        )
        self._append(live, self._recommendation_event(live))
        with self._registry_lock:
            self._live[sid] = live
        return live

    def _recommendation_event(self, live: LiveSession) -> dict:
        cur = live.session.current
        return {
            "event": "recommendation",
            "at": _now(),
            "index": live.session.query_count,
            "mmr": cur.value,
            "x_star": list(cur.x_star),
            "witness": list(cur.witness),
        }

    def load(self, sid: str) -> LiveSession:
        with self._registry_lock:
            if sid in self._live:
                return self._live[sid]
        path = self.sessions_dir / f"{sid}.jsonl"
        if not path.exists():
            raise KeyError(sid)
        live = self._replay(sid, path)
        with self._registry_lock:
            return self._live.setdefault(sid, live)

    def _replay(self, sid: str, path: Path) -> LiveSession:
        """Rebuild a session from any prefix of its event log; a torn final
        line (crash mid-write) is ignored."""
        live: Optional[LiveSession] = None
        pending_query: Optional[dict] = None
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError:
                    break
                kind = event.get("event")
                if kind == "created":
                    document = from_json_obj(event["problem"])
                    session = ElicitationSession(
                        document.structure,
                        document.initial_space(),
                        document.feasibility,
                        event["strategy"],
                        Termination(event["threshold"], event["max_queries"]),
                        seed=event["seed"],
                    )
                    live = LiveSession(
                        session_id=sid,
                        document=document,
                        session=session,
                        log_path=path,
                    )
                elif live is None:
                    raise ValidationError([f"session {sid}: log does not start with 'created'"])
                elif kind == "query":
                    # re-run selection so the session's random stream advances
                    # exactly as it did originally; the logged query stays
                    # authoritative for what was actually asked
                    live.session.select_query()
                    pending_query = {"query_id": event["query_id"], "query": event["query"]}
                    live.issued = max(live.issued, int(event["query_id"][1:]) + 1)
                elif kind == "answer":
                    q = query_from_json(pending_query["query"])
                    live.session.apply_response(q, event["answer"] == "yes")
                    pending_query = None
        if live is None:
            raise ValidationError([f"session {sid}: empty log"])
        live.active_query = pending_query
        return live

    def list_sessions(self) -> list[dict]:
        out = []
        for path in sorted(self.sessions_dir.glob("*.jsonl")):
            sid = path.stem
            try:
                out.append(self.load(sid).status())
            except Exception:
                out.append({"session_id": sid, "error": "unreadable"})
        return out

    # -- interaction -------------------------------------------------------

    def next_query(self, live: LiveSession) -> Optional[dict]:
        with live.lock:
            if live.session.done() is not None:
                return None
            if live.active_query is not None:
                return live.active_query
            q = live.session.select_query()
            if q is None:
                return None
            query_id = f"q{live.issued}"
            live.issued += 1
            live.active_query = {"query_id": query_id, "query": query_to_json(q)}
            self._append(
                live,
                {
                    "event": "query",
                    "at": _now(),
                    "query_id": query_id,
                    "query": query_to_json(q),
                },
            )
            return live.active_query

    def answer(self, live: LiveSession, query_id: str, answer: bool) -> dict:
        with live.lock:
            if live.active_query is None or live.active_query["query_id"] != query_id:
                raise StaleQueryError(query_id)
            q = query_from_json(live.active_query["query"])
            live.session.apply_response(q, answer)
            self._append(
                live,
                {
                    "event": "answer",
                    "at": _now(),
                    "query_id": query_id,
                    "answer": "yes" if answer else "no",
                },
            )
            live.active_query = None
            self._append(live, self._recommendation_event(live))
            return live.status()


class StaleQueryError(RegretkitError):
    pass


def create_app(data_dir: Optional[str] = None) -> FastAPI:
    """The HTTP API; problems are JSON files in <data>/problems."""
    root = Path(data_dir or os.environ.get(DATA_DIR_ENV, "./regretkit-data"))
    problems_dir = root / "problems"
    problems_dir.mkdir(parents=True, exist_ok=True)
    store = SessionStore(root)
    app = FastAPI(title="regret workbench", version="0.1.0")
    app.state.store = store
    app.state.problems_dir = problems_dir
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    def _load_document(payload: dict) -> ProblemDocument:
        if "problem_id" in payload:
            path = problems_dir / f"{payload['problem_id']}.json"
            if not path.exists():
                raise HTTPException(404, f"unknown problem {payload['problem_id']!r}")
            return load_problem(path)
        if "problem" in payload:
            try:
                return from_json_obj(payload["problem"])
            except ValidationError as exc:
                raise HTTPException(422, {"violations": exc.violations})
        raise HTTPException(422, "problem_id or inline problem required")

    @app.get("/problems")
    def list_problems():
        out = []
        for path in sorted(problems_dir.glob("*.json")):
            try:
                doc = load_problem(path)
                out.append({"id": path.stem, "name": doc.name,
                            "attributes": doc.schema.n_attributes,
                            "factors": doc.structure.n_factors,
                            "mode": doc.feasibility.mode})
            except ValidationError:
                out.append({"id": path.stem, "error": "invalid"})
        return out

    @app.get("/problems/{problem_id}")
    def get_problem(problem_id: str):
        path = problems_dir / f"{problem_id}.json"
        if not path.exists():
            raise HTTPException(404, f"unknown problem {problem_id!r}")
        return json.loads(path.read_text())

    @app.post("/sessions")
    def create_session(payload: dict = Body(...)):
        document = _load_document(payload)
        strategy = payload.get("strategy", "AB+LB")
        try:
            live = store.create(
                document,
                strategy,
                threshold=float(payload.get("threshold", 0.0)),
                max_queries=int(payload.get("max_queries", 100)),
                seed=int(payload.get("seed", 0)),
            )
        except RegretkitError as exc:
            raise HTTPException(422, str(exc))
        return live.status()

    @app.get("/sessions")
    def list_sessions():
        return store.list_sessions()

    def _get(sid: str) -> LiveSession:
        try:
            return store.load(sid)
        except KeyError:
            raise HTTPException(404, f"unknown session {sid!r}")

    @app.get("/sessions/{sid}")
    def session_status(sid: str):
        return _get(sid).status()

    @app.get("/sessions/{sid}/query")
    def session_query(sid: str):
        live = _get(sid)
        item = store.next_query(live)
        if item is None:
            return {"query": None, "done_reason": live.session.done() or "exhausted"}
        q = query_from_json(item["query"])
        rendered = render_query(q, live.document.structure)
        return {
            "query_id": item["query_id"],
            "machine": item["query"],
            "rendered": rendered,
        }

    @app.post("/sessions/{sid}/answer")
    def session_answer(sid: str, payload: dict = Body(...)):
        live = _get(sid)
        answer = payload.get("answer")
        if answer not in ("yes", "no"):
            raise HTTPException(422, "answer must be 'yes' or 'no'")
        try:
            return store.answer(live, payload.get("query_id", ""), answer == "yes")
        except StaleQueryError:
            raise HTTPException(409, "query is no longer active; fetch the current one")
        except InconsistentConstraintError as exc:
            raise HTTPException(422, f"inconsistent answer: {exc}")

    @app.get("/sessions/{sid}/export")
    def session_export(sid: str):
        live = _get(sid)
        return {"events": [json.loads(l) for l in live.log_path.read_text().splitlines() if l.strip()]}

    return app

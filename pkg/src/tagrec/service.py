"""HTTP facade: sessions, profiles, feedback and explained recommendations.

Sessions persist as line-delimited JSON event records (create / add /
remove / feedback), so any session can be replayed from its audit log.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .evaluation import ModelBundle
from .recommend import (
    CLICK_STEP,
    UserState,
    apply_feedback,
    category_impact,
    profile,
    recommend,
)

DEFAULT_K = 20


@dataclass
class Session:
    session_id: str
    state: UserState = field(default_factory=UserState)
    created: float = field(default_factory=time.time)
    updated: float = field(default_factory=time.time)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class SessionStore:
    """In-memory sessions backed by an append-only event log."""

    def __init__(self, log_path=None):
        self._sessions: dict[str, Session] = {}
        self._log_path = Path(log_path) if log_path else None
        self._log_lock = threading.Lock()
        if self._log_path and self._log_path.exists():
            self._replay()

    def _replay(self) -> None:
        for line in self._log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            self._apply(event, record=False)

    def _record(self, event: dict) -> None:
        if self._log_path is None:
            return
        with self._log_lock:
            with self._log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True) + "\n")

    def _apply(self, event: dict, record: bool = True):
        kind = event["type"]
        if kind == "create":
            session = Session(session_id=event["session"])
            self._sessions[session.session_id] = session
        else:
            session = self._sessions[event["session"]]
            if kind == "add":
                session.state = UserState(
                    history=session.state.history + (event["item"],),
                    feedback=session.state.feedback,
                )
            elif kind == "remove":
                session.state = UserState(
                    history=tuple(i for i in session.state.history if i != event["item"]),
                    feedback=session.state.feedback,
                )
            elif kind == "feedback":
                session.state = apply_feedback(
                    session.state, event["tag"], event["delta"], event["n_tags"]
                )
            session.updated = time.time()
        if record:
            self._record(event)
        return session

    def create(self) -> Session:
        session_id = uuid.uuid4().hex
        return self._apply({"type": "create", "session": session_id, "ts": time.time()})

    def get(self, session_id: str) -> Session:
        session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    def add_item(self, session: Session, item: int) -> None:
        with session.lock:
            if item in session.state.history:
                return
            self._apply({"type": "add", "session": session.session_id, "item": item, "ts": time.time()})

    def remove_item(self, session: Session, item: int) -> None:
        with session.lock:
            self._apply({"type": "remove", "session": session.session_id, "item": item, "ts": time.time()})

    def feedback(self, session: Session, tag: int, delta: int, n_tags: int) -> None:
        with session.lock:
            self._apply(
                {
                    "type": "feedback",
                    "session": session.session_id,
                    "tag": tag,
                    "delta": delta,
                    "n_tags": n_tags,
                    "ts": time.time(),
                }
            )


class HistoryBody(BaseModel):
    item_id: str


class FeedbackBody(BaseModel):
    tag_id: int
    direction: str  # "+" or "-"


def create_app(
    bundle: ModelBundle | None,
    item_ids: tuple[str, ...] = (),
    item_display: dict[str, dict[str, str]] | None = None,
    session_log=None,
) -> FastAPI:
    """Build the API around a loaded model bundle.

    With ``bundle=None`` the app starts but recommendation and profile
    endpoints answer 503.
    """
    app = FastAPI(title="tagrec service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = SessionStore(session_log)
    item_display = item_display or {}
    item_index = {ext: i for i, ext in enumerate(item_ids)}

    def require_bundle() -> ModelBundle:
        if bundle is None:
            raise HTTPException(status_code=503, detail="model not loaded")
        return bundle

    def profile_payload(state: UserState) -> dict:
        b = require_bundle()
        prof = profile(state, b.encoder, b.tags)
        clicks = state.feedback_array(b.tags.n_tags) / CLICK_STEP
        impacts = category_impact(prof, b.tags)
        return {
            "certainty": prof.certainty,
            "tags": [
                {
                    "tag_id": j,
                    "tag": label,
                    "category": cat,
                    "display_affinity": float(prof.display[j]),
                    "feedback_clicks": int(round(clicks[j])),
                }
                for j, (cat, label) in enumerate(b.tags.vocabulary)
            ],
            "categories": [
                {"name": name, "impact": impacts[name]} for name in b.tags.categories
            ],
        }

    def recommendations_payload(state: UserState, k: int, ensemble: bool) -> dict:
        b = require_bundle()
        if ensemble and b.static is None:
            raise HTTPException(status_code=400, detail="no ensemble model loaded")
        recs = recommend(
            state, b.encoder, b.tags, k, ensemble=b.static if ensemble else None
        )
        return {
            "items": [
                {
                    "item_id": item_ids[r.item] if r.item < len(item_ids) else str(r.item),
                    "score": r.score,
                    "percent_match": r.percent_match,
                    "explanations": [
                        {
                            "tag_id": ex.tag,
                            "tag": b.tags.tag_name(ex.tag),
                            "percent": ex.percent,
                        }
                        for ex in r.explanations
                    ],
                }
                for r in recs
            ]
        }

    def state_response(session: Session, k: int = DEFAULT_K) -> dict:
        return {
            "session_id": session.session_id,
            "profile": profile_payload(session.state),
            "recommendations": recommendations_payload(session.state, k, False),
        }

    @app.post("/sessions")
    def create_session():
        session = store.create()
        return {"session_id": session.session_id}

    @app.get("/sessions/{session_id}/profile")
    def get_profile(session_id: str):
        session = store.get(session_id)
        return profile_payload(session.state)

    @app.post("/sessions/{session_id}/history")
    def add_history(session_id: str, body: HistoryBody):
        session = store.get(session_id)
        require_bundle()
        item = item_index.get(body.item_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"unknown item {body.item_id!r}")
        store.add_item(session, item)
        return state_response(session)

    @app.delete("/sessions/{session_id}/history/{item_id}")
    def remove_history(session_id: str, item_id: str):
        session = store.get(session_id)
        require_bundle()
        item = item_index.get(item_id)
        if item is None or item not in session.state.history:
            raise HTTPException(status_code=404, detail=f"item {item_id!r} not in history")
        store.remove_item(session, item)
        return state_response(session)

    @app.post("/sessions/{session_id}/feedback")
    def post_feedback(session_id: str, body: FeedbackBody):
        session = store.get(session_id)
        b = require_bundle()
        if body.direction not in ("+", "-"):
            raise HTTPException(status_code=400, detail="direction must be '+' or '-'")
        if not 0 <= body.tag_id < b.tags.n_tags:
            raise HTTPException(status_code=404, detail=f"unknown tag {body.tag_id}")
        store.feedback(session, body.tag_id, 1 if body.direction == "+" else -1, b.tags.n_tags)
        return state_response(session)

    @app.get("/sessions/{session_id}/recommendations")
    def get_recommendations(
        session_id: str,
        k: int = Query(default=DEFAULT_K, ge=1),
        ensemble: bool = False,
    ):
        session = store.get(session_id)
        return recommendations_payload(session.state, k, ensemble)

    @app.get("/items/{item_id}")
    def get_item(item_id: str):
        if item_id not in item_index:
            raise HTTPException(status_code=404, detail=f"unknown item {item_id!r}")
        display = item_display.get(item_id, {})
        return {
            "item_id": item_id,
            "title": display.get("title", item_id),
            "description": display.get("description", ""),
        }

    return app

"""HTTP facade for workshop sessions: JSON state, atomic mutations, SSE.

Every accepted mutation is appended to a per-session JSONL event log (one
event per line, fsynced) before the new state becomes visible, so a crashed
process recovers by replaying the log.  Mutations are optimistic: callers
send the version they based their edit on and get ``409 version_conflict``
if someone else committed first.  ``/whatif`` runs the same mutation path
against a copy and never commits.
"""
from __future__ import annotations

import json
import os
import queue
import re
import threading
from pathlib import Path
from typing import Any, Iterator, Mapping, Sequence

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response, StreamingResponse

from .aggregate import compass_reading
from .elicitation import (
    BadMutationError,
    Session,
    SessionEvent,
    VersionConflictError,
    apply_mutation,
    ballot_to_dict,
    create_session,
    event_from_dict,
    event_to_dict,
    replay,
)
from .model import (
    IndicatorValidationError,
    Sphere,
    TableValidationError,
)
from .render import RenderOptions, RenderStage, render_compass, render_ecological
from .robustness import (
    InfluenceReport,
    RobustnessGrade,
    RobustnessParams,
    grade_table,
    influence_report,
)
from .spheres import compose_spheres
from .tableio import (
    ConfigError,
    TableParseError,
    config_to_dict,
    ecological_to_dict,
    load_config,
    parse_table_json,
    reading_to_dict,
    table_to_dict,
)

_SESSION_ID = re.compile(r"^[A-Za-z0-9][A-Za-z0-9_-]{0,63}$")


class SessionStore:
    """In-memory session registry with an append-only on-disk event log."""

    def __init__(self, data_dir: "Path | str | None" = None):
        self.data_dir = Path(data_dir) if data_dir is not None else None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._subscribers: dict[str, list[queue.Queue]] = {}
        self._registry_lock = threading.Lock()
        self._recover()

    # -- persistence ----------------------------------------------------

    def _path(self, session_id: str) -> Path:
        assert self.data_dir is not None
        return self.data_dir / ("%s.jsonl" % session_id)

    def _recover(self) -> None:
        if self.data_dir is None:
            return
        for path in sorted(self.data_dir.glob("*.jsonl")):
            events = []
            for line in path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    events.append(event_from_dict(json.loads(line)))
            if not events:
                continue
            session = replay(events)
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    def _append(self, session_id: str, event: SessionEvent) -> None:
        if self.data_dir is None:
            return
        line = json.dumps(event_to_dict(event), ensure_ascii=False)
        with open(self._path(session_id), "a", encoding="utf-8") as handle:
            handle.write(line + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    # -- core operations -------------------------------------------------

    def ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            return self._sessions[session_id]

    def create(self, session: Session) -> Session:
        with self._registry_lock:
            if session.id in self._sessions:
                raise KeyError("session %r already exists" % session.id)
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()
        for event in session.event_log:
            self._append(session.id, event)
        self._publish(session.id, session.event_log[-1])
        return session

    def mutate(
        self,
        session_id: str,
        mutation: Mapping[str, Any],
        expected_version: int,
    ) -> tuple[Session, SessionEvent]:
        lock = self._locks[session_id]
        with lock:
            current = self._sessions[session_id]
            if current.version != expected_version:
                raise VersionConflictError(expected_version, current.version)
            updated = apply_mutation(current, mutation)
            event = updated.event_log[-1]
            self._append(session_id, event)
            self._sessions[session_id] = updated
        self._publish(session_id, event)
        return updated, event

    def whatif(
        self, session_id: str, mutations: "Sequence[Mapping[str, Any]]"
    ) -> Session:
        """Run hypothetical mutations against a copy; nothing is committed."""
        session = self.get(session_id)
        for mutation in mutations:
            session = apply_mutation(session, mutation)
        return session

    # -- event fan-out ----------------------------------------------------

    def subscribe(self, session_id: str) -> "queue.Queue[SessionEvent]":
        subscriber: "queue.Queue[SessionEvent]" = queue.Queue()
        with self._registry_lock:
            self._subscribers.setdefault(session_id, []).append(subscriber)
        return subscriber

    def unsubscribe(self, session_id: str, subscriber: "queue.Queue[SessionEvent]") -> None:
        with self._registry_lock:
            listeners = self._subscribers.get(session_id, [])
            if subscriber in listeners:
                listeners.remove(subscriber)

    def _publish(self, session_id: str, event: SessionEvent) -> None:
        with self._registry_lock:
            listeners = list(self._subscribers.get(session_id, []))
        for listener in listeners:
            listener.put(event)


# -- state serialization ---------------------------------------------------


def _grade_to_dict(grade: RobustnessGrade) -> dict[str, Any]:
    return {
        "robust": grade.robust,
        "reasons": list(grade.reasons),
        "outlier_ids": list(grade.outlier_ids),
    }


def _influence_to_list(report: "InfluenceReport | None") -> list[dict[str, Any]]:
    if report is None:
        return []
    return [
        {
            "id": entry.indicator_id,
            "angle_delta_degrees": entry.angle_delta_degrees,
            "magnitude_delta": entry.magnitude_delta,
            "displacement": entry.displacement,
            "outlier": entry.outlier,
        }
        for entry in report.entries
    ]


def session_state(session: Session, params: "RobustnessParams | None" = None) -> dict[str, Any]:
    """Full JSON state: tables, readings, robustness, influence, ballots."""
    params = params or RobustnessParams()
    tables: dict[str, Any] = {}
    readings: dict[str, Any] = {}
    robustness: dict[str, Any] = {}
    influence: dict[str, Any] = {}
    keyed = (
        {t.sphere.value: t for t in session.tables}
        if session.is_sphere_triple
        else {"table": session.tables[0]}
    )
    for key, table in keyed.items():
        reading = compass_reading(table, session.config)
        tables[key] = table_to_dict(table)
        readings[key] = reading_to_dict(reading)
        robustness[key] = _grade_to_dict(grade_table(table, session.config, params))
        influence[key] = _influence_to_list(
            influence_report(table, session.config, params.outlier_threshold)
            if table.indicators
            else None
        )
    ecological = None
    if session.is_sphere_triple:
        composed = compose_spheres(
            {t.sphere: compass_reading(t, session.config) for t in session.tables},
            weights=session.weights,
            config=session.config,
        )
        ecological = ecological_to_dict(composed)
    return {
        "id": session.id,
        "version": session.version,
        "mode": "spheres" if session.is_sphere_triple else "single",
        "participants": list(session.participants),
        "config": config_to_dict(session.config, session.weights, params),
        "tables": tables,
        "readings": readings,
        "robustness": robustness,
        "influence": influence,
        "ecological": ecological,
        "ballots": {
            indicator_id: [ballot_to_dict(b) for b in ballots]
            for indicator_id, ballots in sorted(session.ballots.items())
        },
    }


def _error(status: int, code: str, message: str, **extra: Any) -> JSONResponse:
    payload: dict[str, Any] = {"error": code, "message": message}
    payload.update(extra)
    return JSONResponse(status_code=status, content=payload)


def _validation_error(exc: Exception) -> JSONResponse:
    issues: list[dict[str, Any]] = []
    if isinstance(exc, IndicatorValidationError):
        issues = [
            {"code": i.code, "field": i.field, "message": i.message}
            for i in exc.issues
        ]
    elif isinstance(exc, (TableParseError, ConfigError)):
        issues = [
            {"code": i.code, "row": i.row, "column": i.column, "message": i.message}
            for i in exc.issues
        ]
    return _error(400, "validation_failed", str(exc), issues=issues)


def _sse_frame(event: SessionEvent) -> str:
    data = json.dumps(event_to_dict(event), ensure_ascii=False)
    return "event: %s\nid: %d\ndata: %s\n\n" % (event.kind, event.version, data)


def create_app(
    data_dir: "Path | str | None" = None,
    store: "SessionStore | None" = None,
) -> FastAPI:
    app = FastAPI(title="policy-compass session service", docs_url=None, redoc_url=None)
    app.state.store = store if store is not None else SessionStore(data_dir)

    def _store() -> SessionStore:
        return app.state.store

    @app.get("/healthz")
    def healthz() -> dict[str, Any]:
        return {"status": "ok", "sessions": len(_store().ids())}

    @app.post("/sessions")
    async def create(request: Request) -> Any:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "request body must be JSON")
        if not isinstance(body, dict):
            return _error(400, "bad_request", "request body must be a JSON object")
        session_id = body.get("id", "")
        if not isinstance(session_id, str) or not _SESSION_ID.match(session_id):
            return _error(
                400, "bad_request",
                "id must match [A-Za-z0-9][A-Za-z0-9_-]{0,63}",
            )
        raw_tables = body.get("tables")
        if raw_tables is None and "table" in body:
            raw_tables = [body["table"]]
        if not isinstance(raw_tables, list) or not raw_tables:
            return _error(400, "bad_request", "provide table or a list of tables")
        try:
            tables = [parse_table_json(json.dumps(doc)) for doc in raw_tables]
            loaded = load_config(body.get("config") or {})
            session = create_session(
                session_id, tables, config=loaded.compass, weights=loaded.weights
            )
        except (TableParseError, ConfigError, IndicatorValidationError) as exc:
            return _validation_error(exc)
        except (ValueError, TableValidationError) as exc:
            return _error(400, "validation_failed", str(exc))
        try:
            _store().create(session)
        except KeyError:
            return _error(409, "already_exists", "session %r already exists" % session_id)
        return JSONResponse(status_code=201, content=session_state(session))

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> Any:
        try:
            session = _store().get(session_id)
        except KeyError:
            return _error(404, "not_found", "no session %r" % session_id)
        return session_state(session)

    @app.post("/sessions/{session_id}/mutations")
    async def mutate(session_id: str, request: Request) -> Any:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "request body must be JSON")
        if not isinstance(body, dict) or not isinstance(body.get("mutation"), dict):
            return _error(400, "bad_request", "body needs a mutation object")
        if not isinstance(body.get("expected_version"), int):
            return _error(400, "bad_request", "body needs an integer expected_version")
        try:
            _store().get(session_id)
        except KeyError:
            return _error(404, "not_found", "no session %r" % session_id)
        try:
            session, event = _store().mutate(
                session_id, body["mutation"], body["expected_version"]
            )
        except VersionConflictError as exc:
            return _error(
                409, "version_conflict", str(exc),
                expected=exc.expected, actual=exc.actual,
            )
        except (IndicatorValidationError, TableParseError, ConfigError) as exc:
            return _validation_error(exc)
        except (BadMutationError, ValueError) as exc:
            return _error(400, "validation_failed", str(exc))
        return {
            "version": session.version,
            "event": event_to_dict(event),
            "state": session_state(session),
        }

    @app.post("/sessions/{session_id}/whatif")
    async def whatif(session_id: str, request: Request) -> Any:
        try:
            body = await request.json()
        except Exception:
            return _error(400, "bad_request", "request body must be JSON")
        if isinstance(body, dict) and isinstance(body.get("mutation"), dict):
            mutations = [body["mutation"]]
        elif (
            isinstance(body, dict)
            and isinstance(body.get("mutations"), list)
            and all(isinstance(m, dict) for m in body["mutations"])
        ):
            mutations = body["mutations"]
        else:
            return _error(
                400, "bad_request", "body needs a mutation object or a mutations list"
            )
        try:
            current = _store().get(session_id)
        except KeyError:
            return _error(404, "not_found", "no session %r" % session_id)
        try:
            hypothetical = _store().whatif(session_id, mutations)
        except (IndicatorValidationError, TableParseError, ConfigError) as exc:
            return _validation_error(exc)
        except (BadMutationError, ValueError) as exc:
            return _error(400, "validation_failed", str(exc))
        return {
            "committed": False,
            "base_version": current.version,
            "state": session_state(hypothetical),
        }

    @app.get("/sessions/{session_id}/events")
    def events(session_id: str, after: int = -1, limit: "int | None" = None) -> Any:
        store = _store()
        try:
            session = store.get(session_id)
        except KeyError:
            return _error(404, "not_found", "no session %r" % session_id)

        def stream() -> Iterator[str]:
            sent = 0
            subscriber = store.subscribe(session_id)
            try:
                backlog = [e for e in session.event_log if e.version > after]
                seen = after
                for event in backlog:
                    yield _sse_frame(event)
                    seen = event.version
                    sent += 1
                    if limit is not None and sent >= limit:
                        return
                while True:
                    try:
                        event = subscriber.get(timeout=1.0)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    if event.version <= seen:
                        continue
                    yield _sse_frame(event)
                    seen = event.version
                    sent += 1
                    if limit is not None and sent >= limit:
                        return
            finally:
                store.unsubscribe(session_id, subscriber)

        return StreamingResponse(stream(), media_type="text/event-stream")

    @app.get("/sessions/{session_id}/render.svg")
    def render(
        session_id: str,
        stage: str = "final",
        sphere: "str | None" = None,
        size: int = 640,
    ) -> Any:
        try:
            session = _store().get(session_id)
        except KeyError:
            return _error(404, "not_found", "no session %r" % session_id)
        try:
            stage_value = RenderStage(stage)
            options = RenderOptions(stage=stage_value, size_px=size)
            if stage_value in (RenderStage.SPHERES, RenderStage.COMPOSITION):
                if not session.is_sphere_triple:
                    return _error(400, "bad_request", "session holds a single table")
                composed = compose_spheres(
                    {
                        t.sphere: compass_reading(t, session.config)
                        for t in session.tables
                    },
                    weights=session.weights,
                    config=session.config,
                )
                svg = render_ecological(composed, options)
            else:
                if session.is_sphere_triple:
                    if sphere is None:
                        return _error(400, "bad_request", "pick a sphere to render")
                    table = session.sphere_table(Sphere(sphere))
                else:
                    table = session.table
                reading = compass_reading(table, session.config)
                svg = render_compass(reading, options)
        except (KeyError, ValueError) as exc:
            return _error(400, "bad_request", str(exc))
        return Response(content=svg, media_type="image/svg+xml")

    return app


def run_server(
    host: str = "127.0.0.1",
    port: int = 8600,
    data_dir: "Path | str | None" = None,
) -> None:
    import uvicorn

    uvicorn.run(create_app(data_dir=data_dir), host=host, port=port, log_level="warning")

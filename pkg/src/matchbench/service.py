"""HTTP facade over sessions, jobs, matching, analytics, and import/export.

Routes mirror the library one-to-one and hold no state of their own: every
mutation goes through the session's single-writer lock, and every read works
on the current snapshot. Errors map onto 400 (bad input), 404 (unknown
resource), and 409 (conflicts, nothing-to-export).
"""

from __future__ import annotations

import json
import os
from contextlib import asynccontextmanager

from fastapi import Body, FastAPI, File, Form, Query, Request, UploadFile
from fastapi.responses import JSONResponse, Response

from .engine import BUILTIN_MATCHER_IDS, EngineConfig, MatcherSpec
from .errors import (
    ConflictError,
    CsvParseError,
    ExportError,
    MatchbenchError,
    UnknownAttributeError,
    UnknownCandidateError,
    UnknownMatcherError,
    UnknownSessionError,
    ValidationError,
)
from .explain import LlmConfig, explain_candidate, llm_narrative
from .ingest import load_csv
from .jobs import JobRunner
from .plugin_host import materialize_plugin
from .session import SessionStore
from .valuemap import ValueMapping, fit_affine_transform, propose_value_mapping

_STATUS_CODES = (
    (UnknownSessionError, 404),
    (UnknownAttributeError, 404),
    (UnknownMatcherError, 404),
    (UnknownCandidateError, 404),
    (ConflictError, 409),
    (ExportError, 409),
    (CsvParseError, 400),
    (ValidationError, 400),
)

EXPORT_MEDIA_TYPES = {
    "harmonized_csv": "text/csv",
    "ground_truth_csv": "text/csv",
    "mapping_spec": "application/json",
    "provenance": "application/x-ndjson",
}


def default_matcher_specs() -> list[MatcherSpec]:
    return [MatcherSpec(id=m) for m in BUILTIN_MATCHER_IDS]


def _status_code(exc: MatchbenchError) -> int:
    for klass, code in _STATUS_CODES:
        if isinstance(exc, klass):
            return code
    return 400


def create_app(
    store: SessionStore | None = None,
    runner: JobRunner | None = None,
    llm: LlmConfig | None = None,
) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        app.state.runner.shutdown(wait=True)

    app = FastAPI(title="matchbench", version="1.0", lifespan=lifespan)
    app.state.store = store or SessionStore()
    app.state.runner = runner or JobRunner()
    app.state.llm = llm or LlmConfig.from_env()

    @app.exception_handler(MatchbenchError)
    async def matchbench_error(_request: Request, exc: MatchbenchError):
        return JSONResponse(status_code=_status_code(exc), content={"detail": str(exc)})

    def get_session(session_id: str):
        return app.state.store.get(session_id)

    # -------------------------------------------------------------- sessions

    @app.post("/sessions", status_code=201)
    def create_session(body: dict | None = Body(default=None)):
        body = body or {}
        config = EngineConfig.from_dict(body["config"]) if "config" in body else None
        session = app.state.store.create(body.get("id"), config=config)
        return {"id": session.id, "created": session.created}

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": app.state.store.ids()}

    @app.post("/sessions/{session_id}/task", status_code=202)
    async def create_task(
        session_id: str,
        source: UploadFile = File(...),
        target: UploadFile = File(...),
        matchers: str | None = Form(default=None),
    ):
        session = get_session(session_id)
        if session.has_task:
            raise ConflictError("session already has a task")
        source_bytes = await source.read()
        target_bytes = await target.read()
        load_csv(source_bytes, side="source")  # surface parse errors as 4xx before queueing
        load_csv(target_bytes, side="target")
        if matchers is not None:
            specs = [MatcherSpec.from_dict(d) for d in json.loads(matchers)]
        else:
            specs = default_matcher_specs()
        job = app.state.runner.submit_task(
            session,
            source_bytes,
            target_bytes,
            specs,
            source_name=source.filename or "source.csv",
            target_name=target.filename or "target.csv",
        )
        return job.to_dict()

    @app.get("/sessions/{session_id}/status")
    def task_status(session_id: str):
        session = get_session(session_id)
        job = app.state.runner.session_status(session_id)
        if job is not None:
            return job.to_dict()
        return {
            "job_id": None,
            "session_id": session_id,
            "phase": "done" if session.has_task else "idle",
            "progress": {},
            "error": None,
        }

    # ------------------------------------------------------------ candidates

    @app.get("/sessions/{session_id}/candidates")
    def get_candidates(
        session_id: str,
        cutoff: float | None = Query(default=None),
        group: str | None = Query(default=None),
        source: str | None = Query(default=None),
    ):
        session = get_session(session_id)
        with session.lock:
            page = session.filtered_candidates(cutoff=cutoff, group=group, source=source)
            return {
                "candidates": [c.to_dict() for c in page],
                "total": len(page),
                "cutoff": session.config.display_cutoff if cutoff is None else cutoff,
                "weights": session.weights.to_dict(),
            }

    @app.post("/sessions/{session_id}/decisions")
    def post_decision(session_id: str, body: dict = Body(...)):
        session = get_session(session_id)
        for key in ("source", "target", "action"):
            if key not in body:
                raise ValidationError(f"decision body needs {key!r}")
        event = session.apply_decision(
            (body["source"], body["target"]),
            body["action"],
            note=body.get("note"),
            actor=body.get("actor", "curator"),
        )
        with session.lock:
            cand = session._candidate(body["source"], body["target"])
            return {
                "event_seq": event.seq if event else None,
                "candidate": cand.to_dict(),
                "weights": session.weights.to_dict(),
            }

    @app.get("/sessions/{session_id}/profiles/{attr}")
    def get_profile(session_id: str, attr: str, side: str = Query(default="source")):
        session = get_session(session_id)
        with session.lock:
            session._require_task()
            if side not in ("source", "target"):
                raise ValidationError("side must be source or target")
            profiles = session.source_profiles if side == "source" else session.target_profiles
            if attr not in profiles:
                raise UnknownAttributeError(f"no attribute named {attr!r} on the {side} side")
            ontology = session.source_ontology if side == "source" else session.target_ontology
            return {
                "profile": profiles[attr].to_dict(),
                "group": ontology.group_of(attr) if ontology else None,
            }

    @app.get("/sessions/{session_id}/ontology")
    def get_ontology(session_id: str, side: str = Query(default="target")):
        session = get_session(session_id)
        with session.lock:
            session._require_task()
            if side not in ("source", "target"):
                raise ValidationError("side must be source or target")
            ontology = session.source_ontology if side == "source" else session.target_ontology
            return ontology.to_dict() if ontology else {"groups": [], "properties": {}}

    # ------------------------------------------------------------- value map

    @app.get("/sessions/{session_id}/value-map/{src}/{tgt}")
    def get_value_map(session_id: str, src: str, tgt: str):
        session = get_session(session_id)
        with session.lock:
            session._require_task()
            stored = session.value_maps.get((src, tgt))
            if stored is not None:
                return {"stored": True, "mapping": stored.to_dict()}
            source_attr = session.source.attribute(src)
            target_attr = session.target.attribute(tgt)
            source_values = {v for v in session.source.columns[src] if v and not _is_null(v)}
            target_values = {v for v in session.target.columns[tgt] if v and not _is_null(v)}
            proposal = propose_value_mapping(source_values, target_values, source_attr=src, target_attr=tgt)
            if source_attr.inferred_type == "numeric" and target_attr.inferred_type == "numeric":
                try:
                    from .ingest import numeric_values

                    scale, offset, _ = fit_affine_transform(
                        numeric_values(session.source, src),
                        numeric_values(session.target, tgt),
                        paired=False,
                    )
                    proposal.transform = (scale, offset)
                except MatchbenchError:
                    pass
            return {"stored": False, "mapping": proposal.to_dict()}

    @app.put("/sessions/{session_id}/value-map/{src}/{tgt}")
    def put_value_map(session_id: str, src: str, tgt: str, body: dict = Body(...)):
        session = get_session(session_id)
        body = dict(body)
        body.setdefault("source_attr", src)
        body.setdefault("target_attr", tgt)
        if body["source_attr"] != src or body["target_attr"] != tgt:
            raise ValidationError("mapping body does not match the URL attributes")
        vm = ValueMapping.from_dict(body)
        session.set_value_mapping(vm, actor=body.get("actor", "curator"))
        return {"stored": True, "mapping": session.value_maps[(src, tgt)].to_dict()}

    # -------------------------------------------------------------- matchers

    @app.get("/sessions/{session_id}/matchers")
    def list_matchers(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {
                "matchers": [m.to_dict() for m in session.matchers],
                "weights": session.weights.to_dict(),
            }

    @app.post("/sessions/{session_id}/matchers", status_code=201)
    def add_matcher(session_id: str, body: dict = Body(...)):
        session = get_session(session_id)
        if "id" not in body:
            raise ValidationError("matcher body needs an 'id'")
        if "code" in body:
            if session.persist_dir is None:
                raise ValidationError("session has no workspace directory for plugin code")
            command = materialize_plugin(body["code"], ["python3"], session.persist_dir, body["id"])
            spec = MatcherSpec(id=body["id"], kind="external", command=command,
                               top_k=body.get("top_k", 10))
        else:
            spec = MatcherSpec(
                id=body["id"],
                kind=body.get("kind", "builtin"),
                command=body.get("command"),
                top_k=body.get("top_k", 10),
            )
        spec = session.add_matcher(spec, actor=body.get("actor", "curator"))
        return {"matcher": spec.to_dict(), "weights": session.weights.to_dict()}

    @app.delete("/sessions/{session_id}/matchers/{matcher_id}")
    def delete_matcher(session_id: str, matcher_id: str):
        session = get_session(session_id)
        session.remove_matcher(matcher_id)
        return {"matchers": [m.to_dict() for m in session.matchers], "weights": session.weights.to_dict()}

    # ------------------------------------------------------------- analytics

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str, k: int | None = Query(default=None)):
        session = get_session(session_id)
        with session.lock:
            return session.metrics(k=k).to_dict()

    @app.get("/sessions/{session_id}/consensus")
    def get_consensus(session_id: str, k: int | None = Query(default=None)):
        session = get_session(session_id)
        with session.lock:
            return session.consensus(k=k).to_dict()

    @app.get("/sessions/{session_id}/breakdown")
    def get_breakdown(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return session.breakdown().to_dict()

    @app.get("/sessions/{session_id}/provenance")
    def get_provenance(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return {"events": [e.to_dict() for e in session.events]}

    @app.post("/sessions/{session_id}/explain")
    def post_explain(session_id: str, body: dict = Body(...)):
        session = get_session(session_id)
        for key in ("source", "target"):
            if key not in body:
                raise ValidationError(f"explain body needs {key!r}")
        with session.lock:
            session._require_task()
            src, tgt = body["source"], body["target"]
            if src not in session.source_views:
                raise UnknownAttributeError(f"no attribute named {src!r} on the source side")
            if tgt not in session.target_views:
                raise UnknownAttributeError(f"no attribute named {tgt!r} on the target side")
            history = {p for p, e in session.gt.items() if e.label == "accept"} if session.gt else None
            explanation = explain_candidate(session.source_views[src], session.target_views[tgt], history=history)
        if body.get("narrative") and app.state.llm.enabled:
            explanation = llm_narrative(explanation, app.state.llm)
        return explanation.to_dict()

    # --------------------------------------------------------- import/export

    @app.get("/sessions/{session_id}/export/{kind}")
    def export_artifact(session_id: str, kind: str):
        session = get_session(session_id)
        if kind not in EXPORT_MEDIA_TYPES:
            raise ValidationError(f"unknown export kind {kind!r}")
        payload = session.export(kind)
        return Response(content=payload, media_type=EXPORT_MEDIA_TYPES[kind])

    @app.post("/sessions/{session_id}/import")
    async def import_artifact(
        session_id: str,
        file: UploadFile = File(...),
        kind: str = Form(...),
    ):
        session = get_session(session_id)
        data = await file.read()
        if kind == "ground_truth_csv":
            return session.import_ground_truth(data)
        if kind == "mapping_spec":
            return session.import_mapping_spec(data)
        raise ValidationError(f"unknown import kind {kind!r}")

    return app


def _is_null(value: str) -> bool:
    from .ingest import is_null

    return is_null(value)


def run_server(host: str = "127.0.0.1", port: int | None = None, data_dir: str | None = None) -> None:
    """Blocking uvicorn entry point used by the CLI."""
    import uvicorn

    store = SessionStore(data_dir) if data_dir else SessionStore()
    app = create_app(store=store)
    port = port or int(os.environ.get("MATCHBENCH_PORT", "8642"))
    uvicorn.run(app, host=host, port=port, log_level="warning")

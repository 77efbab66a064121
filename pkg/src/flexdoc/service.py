"""HTTP service: document registry, live layout sessions, generated assets.

Documents are immutable and content-addressed; uploading the same bundle
twice yields the same id. A session binds one document to a viewport and
an evolving :class:`PreferenceState`; every accepted mutation re-solves
(warm-started) and bumps a strictly increasing revision. Mutations may
carry an ``Expected-Revision`` header for optimistic concurrency: absent
means unconditional, a stale value is rejected with 409 and nothing
changes. Solutions returned here are exactly the solver's output, so
they are bit-identical to an in-process :func:`flexdoc.engine.solve`
with the same document, viewport, and preferences.

Image placements are annotated with recipe hashes; ``GET /assets/{hash}``
materializes the retargeted raster on first fetch and serves it from a
content-addressed cache thereafter. Sessions live in memory and expire
after a configurable idle TTL; documents and generated assets are never
evicted within a process lifetime.
"""

from __future__ import annotations

import dataclasses
import os
import tempfile
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Any, Optional

from fastapi import Body, FastAPI, Header, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from .bundle import content_hash, diagnose, parse_document, solution_to_dict
from .candidates import SolverConfig
from .content.generate import retarget
from .content.raster import VariantCache, bytes_hash, load_raster, png_bytes, recipe_hash
from .engine import (Interaction, SolveError, attempted_relaxations,
                     resolve_interaction, solve)
from .model import Document, LayoutSolution, PreferenceState, Viewport

DEFAULT_PORT = 7878
DEFAULT_SESSION_TTL_S = 30 * 60.0

# a relaxation flag that undoes the forcing an interaction just asked for
# means the interaction itself is infeasible; the session must not commit
_GUARDED_FLAGS = {
    "switch-template": "relaxed:template",
    "switch-alternative": "relaxed:alternatives",
    "zoom-in": "relaxed:zoom",
    "zoom-out": "relaxed:zoom",
}


@dataclass(frozen=True)
class ServiceConfig:
    """Deployment knobs; every field has a flag and an env override."""

    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    asset_cache_dir: Optional[str] = None
    session_ttl_s: float = DEFAULT_SESSION_TTL_S
    time_budget_ms: float = SolverConfig().time_budget_ms

    @classmethod
    def from_env(cls, env: Optional[dict] = None) -> "ServiceConfig":
        env = os.environ if env is None else env
        return cls(
            host=env.get("FLEXDOC_HOST", cls.host),
            port=int(env.get("FLEXDOC_PORT", cls.port)),
            asset_cache_dir=env.get("FLEXDOC_ASSET_CACHE"),
            session_ttl_s=float(env.get("FLEXDOC_SESSION_TTL",
                                        cls.session_ttl_s)),
            time_budget_ms=float(env.get("FLEXDOC_TIME_BUDGET_MS",
                                         cls.time_budget_ms)),
        )


@dataclass
class Session:
    """One viewer's live state; ``lock`` serializes its solves."""

    id: str
    document_id: str
    document: Document  # carries pins accumulated by interactions
    viewport: Viewport
    prefs: PreferenceState
    solution: LayoutSolution
    revision: int
    assets: dict[str, str]
    last_touch: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class ViewportBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    width: float
    height: float


class SessionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    document_id: str
    viewport: ViewportBody


class PreferencesBody(BaseModel):
    """Partial update: only the fields present in the request change."""

    model_config = ConfigDict(extra="forbid")
    sliders: Optional[dict[str, float]] = None
    no_scroll: Optional[bool] = None
    zoom_deltas: Optional[dict[str, int]] = None
    forced_template: Optional[str] = None
    forced_alternatives: Optional[dict[str, str]] = None


class InteractionBody(BaseModel):
    model_config = ConfigDict(extra="forbid")
    kind: str
    element_id: Optional[str] = None
    template_id: Optional[str] = None
    alternative_id: Optional[str] = None
    modality: Optional[str] = None
    value: Optional[float] = None


def _error(status: int, kind: str, detail: str, **extra: Any) -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"error": kind, "detail": detail, **extra})


def _stale(revision: int) -> JSONResponse:
    return _error(409, "stale-revision",
                  f"session is at revision {revision}", revision=revision)


def _infeasible(detail: str, relaxation: tuple[str, ...]) -> JSONResponse:
    return _error(409, "infeasible", detail, relaxation=list(relaxation))


def create_app(config: ServiceConfig = ServiceConfig()) -> FastAPI:
    app = FastAPI(title="flexdoc", docs_url=None, redoc_url=None)
    cache_dir = config.asset_cache_dir or tempfile.mkdtemp(prefix="flexdoc-assets-")
    cache = VariantCache(cache_dir)
    solver_config = SolverConfig(time_budget_ms=config.time_budget_ms)

    documents: dict[str, Document] = {}
    sessions: dict[str, Session] = {}
    recipes: dict[str, tuple[bytes, int, int]] = {}
    table_lock = threading.Lock()

    def _purge(now: float) -> None:
        dead = [sid for sid, s in sessions.items()
                if now - s.last_touch > config.session_ttl_s]
        for sid in dead:
            del sessions[sid]

    def _get_session(session_id: str) -> Optional[Session]:
        now = time.monotonic()
        with table_lock:
            _purge(now)
            sess = sessions.get(session_id)
            if sess is not None:
                sess.last_touch = now
            return sess

    def _solution_assets(document: Document,
                         solution: LayoutSolution) -> dict[str, str]:
        out: dict[str, str] = {}
        for p in solution.placements:
            alt = document.element(p.element_id).alternative(p.alternative_id)
            if alt.modality != "image" or alt.asset is None:
                continue
            info = document.assets.get(alt.asset)
            if info is None or info.data is None:
                continue
            w, h = max(1, round(p.w)), max(1, round(p.h))
            key = recipe_hash(bytes_hash(info.data), w=w, h=h)
            recipes[key] = (info.data, w, h)
            out[p.element_id] = key
        return out

    def _payload(sess: Session) -> dict:
        return {"session_id": sess.id, "revision": sess.revision,
                "solution": solution_to_dict(sess.solution),
                "assets": dict(sess.assets)}

    def _commit(sess: Session, document: Document, viewport: Viewport,
                prefs: PreferenceState, solution: LayoutSolution) -> None:
        sess.document = document
        sess.viewport = viewport
        sess.prefs = prefs
        sess.solution = solution
        sess.revision += 1
        sess.assets = _solution_assets(document, solution)

    @app.post("/documents", status_code=201)
    def post_document(payload: Any = Body(...)) -> Any:
        diagnostics = diagnose(payload)
        if diagnostics:
            return JSONResponse(status_code=422, content={"diagnostics": [
                {"code": d.code, "path": d.path, "message": d.message}
                for d in diagnostics]})
        document = parse_document(payload)
        doc_id = content_hash(document)
        with table_lock:
            documents[doc_id] = document
        return {"document_id": doc_id}

    @app.post("/sessions", status_code=201)
    def post_session(body: SessionBody) -> Any:
        document = documents.get(body.document_id)
        if document is None:
            return _error(404, "not-found",
                          f"unknown document {body.document_id!r}")
        if body.viewport.width <= 0 or body.viewport.height <= 0:
            return _error(422, "invalid", "viewport must be positive")
        viewport = Viewport(body.viewport.width, body.viewport.height)
        prefs = PreferenceState()
        try:
            solution = solve(document, viewport, prefs, config=solver_config)
        except SolveError as exc:
            return _infeasible(str(exc), attempted_relaxations(prefs))
        sess = Session(
            id=uuid.uuid4().hex, document_id=body.document_id,
            document=document, viewport=viewport, prefs=prefs,
            solution=solution, revision=1, assets={},
            last_touch=time.monotonic())
        sess.assets = _solution_assets(document, solution)
        with table_lock:
            _purge(sess.last_touch)
            sessions[sess.id] = sess
        return _payload(sess)

    def _parse_expected(raw: Optional[str]) -> tuple[Optional[int], bool]:
        if raw is None:
            return None, True
        try:
            return int(raw), True
        except ValueError:
            return None, False

    @app.put("/sessions/{session_id}/viewport")
    def put_viewport(session_id: str, body: ViewportBody,
                     expected_revision: Optional[str] = Header(
                         None, alias="Expected-Revision")) -> Any:
        expected, ok = _parse_expected(expected_revision)
        if not ok:
            return _error(422, "invalid", "Expected-Revision must be an integer")
        if body.width <= 0 or body.height <= 0:
            return _error(422, "invalid", "viewport must be positive")
        sess = _get_session(session_id)
        if sess is None:
            return _error(404, "not-found", f"unknown session {session_id!r}")
        with sess.lock:
            if expected is not None and expected != sess.revision:
                return _stale(sess.revision)
            viewport = Viewport(body.width, body.height)
            try:
                solution = solve(sess.document, viewport, sess.prefs,
                                 config=solver_config, warm=sess.solution)
            except SolveError as exc:
                return _infeasible(str(exc),
                                   attempted_relaxations(sess.prefs))
            _commit(sess, sess.document, viewport, sess.prefs, solution)
            return _payload(sess)

    @app.put("/sessions/{session_id}/preferences")
    def put_preferences(session_id: str, body: PreferencesBody,
                        expected_revision: Optional[str] = Header(
                            None, alias="Expected-Revision")) -> Any:
        expected, ok = _parse_expected(expected_revision)
        if not ok:
            return _error(422, "invalid", "Expected-Revision must be an integer")
        sess = _get_session(session_id)
        if sess is None:
            return _error(404, "not-found", f"unknown session {session_id!r}")
        with sess.lock:
            if expected is not None and expected != sess.revision:
                return _stale(sess.revision)
            try:
                prefs = _merge_prefs(sess.prefs, body, sess.document)
            except (KeyError, ValueError) as exc:
                return _error(422, "invalid", _message(exc))
            try:
                solution = solve(sess.document, sess.viewport, prefs,
                                 config=solver_config, warm=sess.solution)
            except SolveError as exc:
                return _infeasible(str(exc), attempted_relaxations(prefs))
            _commit(sess, sess.document, sess.viewport, prefs, solution)
            return _payload(sess)

    @app.post("/sessions/{session_id}/interactions")
    def post_interaction(session_id: str, body: InteractionBody,
                         expected_revision: Optional[str] = Header(
                             None, alias="Expected-Revision")) -> Any:
        expected, ok = _parse_expected(expected_revision)
        if not ok:
            return _error(422, "invalid", "Expected-Revision must be an integer")
        sess = _get_session(session_id)
        if sess is None:
            return _error(404, "not-found", f"unknown session {session_id!r}")
        with sess.lock:
            if expected is not None and expected != sess.revision:
                return _stale(sess.revision)
            try:
                interaction = Interaction(
                    kind=body.kind, element_id=body.element_id,
                    template_id=body.template_id,
                    alternative_id=body.alternative_id,
                    modality=body.modality, value=body.value)
                result = resolve_interaction(
                    sess.solution, interaction, sess.document, sess.viewport,
                    sess.prefs, config=solver_config)
            except (KeyError, ValueError) as exc:
                return _error(422, "invalid", _message(exc))
            except SolveError as exc:
                return _infeasible(str(exc),
                                   attempted_relaxations(sess.prefs))
            guarded = _GUARDED_FLAGS.get(body.kind)
            if guarded is not None and guarded in result.solution.flags:
                return _infeasible(
                    f"{body.kind} cannot be honored at this viewport",
                    result.solution.flags)
            _commit(sess, result.document, sess.viewport, result.prefs,
                    result.solution)
            return _payload(sess)

    @app.get("/sessions/{session_id}/solution")
    def get_solution(session_id: str) -> Any:
        sess = _get_session(session_id)
        if sess is None:
            return _error(404, "not-found", f"unknown session {session_id!r}")
        with sess.lock:
            return _payload(sess)

    @app.get("/assets/{asset_hash}")
    def get_asset(asset_hash: str) -> Any:
        recipe = recipes.get(asset_hash)
        if recipe is None:
            return _error(404, "not-found", f"unknown asset {asset_hash!r}")
        source, w, h = recipe
        data = cache.get_or_create(
            asset_hash, lambda: png_bytes(retarget(load_raster(source), w, h)))
        return Response(content=data, media_type="image/png",
                        headers={"Cache-Control":
                                 "public, max-age=31536000, immutable"})

    return app


def _message(exc: Exception) -> str:
    if isinstance(exc, KeyError):
        return f"unknown id {exc.args[0]!r}" if exc.args else "unknown id"
    return str(exc)


def _merge_prefs(prefs: PreferenceState, body: PreferencesBody,
                 document: Document) -> PreferenceState:
    """Apply the provided fields; referenced ids must exist."""
    updates: dict[str, Any] = {}
    given = body.model_fields_set
    if "sliders" in given:
        sliders = body.sliders or {}
        for modality, value in sliders.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"slider {modality!r} must be in [0, 1]")
        updates["sliders"] = dict(sliders)
    if "no_scroll" in given:
        updates["no_scroll"] = bool(body.no_scroll)
    if "zoom_deltas" in given:
        deltas = body.zoom_deltas or {}
        for element_id in deltas:
            document.element(element_id)
        updates["zoom_deltas"] = dict(deltas)
    if "forced_template" in given:
        if body.forced_template is not None:
            document.template(body.forced_template)
        updates["forced_template"] = body.forced_template
    if "forced_alternatives" in given:
        forced = body.forced_alternatives or {}
        for element_id, alt_id in forced.items():
            document.element(element_id).alternative(alt_id)
        updates["forced_alternatives"] = dict(forced)
    return dataclasses.replace(prefs, **updates)


def main(config: Optional[ServiceConfig] = None) -> None:
    """Run the service until interrupted."""
    import uvicorn

    config = config or ServiceConfig.from_env()
    uvicorn.run(create_app(config), host=config.host, port=config.port)


if __name__ == "__main__":
    main()

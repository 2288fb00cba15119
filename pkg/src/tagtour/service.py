"""HTTP JSON service for interactive keyword-tree exploration and spot search.

The corpus, graph, and tree are built once at startup and served from
immutable snapshots (per-request rebuilds would blow the interactive latency
budget). Mutable state is limited to an in-memory session table holding each
session's selected keywords, guarded by a lock so concurrent selections on
one session serialize cleanly.

Endpoints (all JSON; errors are ``{"code", "message"}``):

- ``GET  /api/tree`` — full tree export plus the initial-view hint.
- ``GET  /api/nodes/{id}/children`` — expandable children of a node.
- ``GET  /api/nodes?query=text`` — nodes whose keywords match a substring.
- ``POST /api/sessions/{id}/selection`` — select a node or photo node.
- ``DELETE /api/sessions/{id}/selection/{keyword}`` — drop a keyword.
- ``POST /api/spots`` — run the spot retrieval pipeline for a region.
- ``GET  /api/photos/{id}`` — the photo asset (when local) or its record.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import FileResponse, JSONResponse
from pydantic import BaseModel

from .config import ServiceConfig
from .pipeline import PipelineResult, canonical_json, run_pipeline_from_manifest
from .spots import (
    FixtureProvider,
    Provider,
    ProviderError,
    SpotQuery,
    export_spots,
    search_spots,
)
from .tree import expand_node, find_nodes_by_keyword

API_ERROR_CODES = {
    400: "validation_error",
    404: "not_found",
    502: "provider_error",
}


@dataclass
class Session:
    session_id: str
    selected_keywords: dict[str, None] = field(default_factory=dict)  # ordered set
    selected_node_ids: set[str] = field(default_factory=set)
    created_at: float = field(default_factory=time.time)
    last_used: float = field(default_factory=time.time)

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "selected_keywords": list(self.selected_keywords),
            "selected_node_ids": sorted(self.selected_node_ids),
        }


class SessionStore:
    """In-memory sessions with TTL eviction; mutations are serialized."""

    def __init__(self, ttl_s: float) -> None:
        self._ttl_s = ttl_s
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def mutate(self, session_id: str, fn) -> dict:
        now = time.time()
        with self._lock:
            stale = [
                sid
                for sid, s in self._sessions.items()
                if now - s.last_used > self._ttl_s
            ]
            for sid in stale:
                del self._sessions[sid]
            session = self._sessions.get(session_id)
            if session is None:
                session = Session(session_id=session_id)
                self._sessions[session_id] = session
            session.last_used = now
            fn(session)
            return session.as_dict()

    def keywords_of(self, session_id: str) -> list[str]:
        with self._lock:
            session = self._sessions.get(session_id)
            return list(session.selected_keywords) if session else []


class SelectionRequest(BaseModel):
    node_id: str | None = None
    photo_id: str | None = None


class SpotsRequest(BaseModel):
    session_id: str
    region: str
    keywords: list[str] | None = None
    provider_mode: str | None = None
    ranking_mode: str | None = None
    limit: int | None = None


def _error(status: int, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail=message)


def build_provider(config: ServiceConfig) -> Provider:
    if config.provider == "fixture":
        if config.provider_data is None:
            raise ValueError("fixture provider requires provider_data")
        return FixtureProvider(config.provider_data)
    raise ValueError(f"unknown provider: {config.provider!r}")


def create_app(
    config: ServiceConfig,
    result: PipelineResult | None = None,
    provider: Provider | None = None,
) -> FastAPI:
    """Build the service around an immutable pipeline snapshot."""
    config.validate()
    if result is None:
        result = run_pipeline_from_manifest(config.corpus_path, config.pipeline)
    if provider is None:
        provider = build_provider(config)

    tree = result.tree
    corpus = result.corpus
    params = config.pipeline

    from .tree import export_tree

    tree_export = export_tree(tree)
    node_exports = {node["id"]: node for node in tree_export["nodes"]}
    hub_ids = sorted(
        nid for nid, node in tree.nodes.items() if node.role == "hub"
    )
    initial_nodes = ([tree.root_id] if tree.nodes else []) + hub_ids
    initial_photo_nodes = [
        {"node_id": nid, "photo_id": pn.photo_id}
        for nid in hub_ids
        for pn in tree.nodes[nid].photo_nodes
    ]
    tree_body = dict(tree_export)
    tree_body["initial_view"] = {
        "nodes": initial_nodes,
        "photo_nodes": initial_photo_nodes,
    }
    tree_bytes = canonical_json(tree_body).encode("utf-8")

    photo_nodes_of_photo: dict[str, list[str]] = {}
    for nid in sorted(tree.nodes):
        for pn in tree.nodes[nid].photo_nodes:
            photo_nodes_of_photo.setdefault(pn.photo_id, []).append(nid)
    photos_by_id = {p.photo_id: p for p in corpus.photos}

    sessions = SessionStore(ttl_s=config.session_ttl_s)

    app = FastAPI(title="tagtour", openapi_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST", "DELETE"],
        allow_headers=["*"],
    )

    @app.exception_handler(HTTPException)
    async def http_error(_: Request, exc: HTTPException) -> JSONResponse:
        code = API_ERROR_CODES.get(exc.status_code, "error")
        return JSONResponse(
            status_code=exc.status_code,
            content={"code": code, "message": str(exc.detail)},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"code": "validation_error", "message": str(exc.errors()[:1])},
        )

    @app.exception_handler(ProviderError)
    async def provider_error(_: Request, exc: ProviderError) -> JSONResponse:
        return JSONResponse(
            status_code=502,
            content={"code": "provider_error", "message": str(exc), "provider": exc.provider},
        )

    @app.get("/api/tree")
    def get_tree() -> Response:
        return Response(content=tree_bytes, media_type="application/json")

    @app.get("/api/nodes/{node_id}/children")
    def get_children(node_id: str) -> dict:
        try:
            children = expand_node(tree, node_id, params.child_min_appear)
        except KeyError:
            raise _error(404, f"unknown node: {node_id}")
        return {"nodes": [node_exports[c.node_id] for c in children]}

    @app.get("/api/nodes")
    def search_nodes(query: str) -> dict:
        ids = find_nodes_by_keyword(tree, query)
        return {"nodes": [node_exports[nid] for nid in ids]}

    @app.post("/api/sessions/{session_id}/selection")
    def select(session_id: str, body: SelectionRequest) -> dict:
        if body.node_id is None and body.photo_id is None:
            raise _error(400, "selection needs a node_id or a photo_id")

        if body.photo_id is not None:
            decorated = photo_nodes_of_photo.get(body.photo_id, [])
            if body.node_id is not None:
                if body.node_id not in tree.nodes:
                    raise _error(404, f"unknown node: {body.node_id}")
                if body.node_id not in decorated:
                    raise _error(404, f"photo {body.photo_id} is not a photo node of {body.node_id}")
                node_id = body.node_id
            elif not decorated:
                raise _error(404, f"unknown photo node: {body.photo_id}")
            elif len(decorated) > 1:
                raise _error(
                    400,
                    f"photo {body.photo_id} decorates several nodes "
                    f"({', '.join(decorated)}); pass node_id to disambiguate",
                )
            else:
                node_id = decorated[0]
            photo = photos_by_id[body.photo_id]
            members = tree.nodes[node_id].cluster.members
            added = sorted(set(photo.tag_map()) & members)

            def apply(session: Session) -> None:
                for keyword in added:
                    session.selected_keywords.setdefault(keyword)

            return sessions.mutate(session_id, apply)

        if body.node_id not in tree.nodes:
            raise _error(404, f"unknown node: {body.node_id}")
        node = tree.nodes[body.node_id]

        def apply(session: Session) -> None:
            session.selected_keywords.setdefault(node.representative)
            session.selected_node_ids.add(node.node_id)

        return sessions.mutate(session_id, apply)

    @app.delete("/api/sessions/{session_id}/selection/{keyword}")
    def deselect(session_id: str, keyword: str) -> dict:
        def apply(session: Session) -> None:
            session.selected_keywords.pop(keyword, None)

        return sessions.mutate(session_id, apply)

    @app.post("/api/spots")
    def spots_endpoint(body: SpotsRequest) -> dict:
        keywords = list(body.keywords or []) or sessions.keywords_of(body.session_id)
        if not keywords:
            raise _error(400, "no keywords: select nodes first or pass keywords")
        if not body.region.strip():
            raise _error(400, "region must be non-empty")
        query = SpotQuery(
            region=body.region,
            keywords=tuple(keywords),
            provider_mode=body.provider_mode or config.provider_mode,
            ranking_mode=body.ranking_mode or config.ranking_mode,
        )
        spot_params = config.spots
        if body.limit is not None:
            if body.limit < 1:
                raise _error(400, f"limit must be >= 1, got {body.limit}")
            from dataclasses import replace

            spot_params = replace(spot_params, limit=body.limit)
        try:
            ranked = search_spots(query, provider, spot_params)
        except ValueError as exc:
            raise _error(400, str(exc))
        return {"region": body.region, "keywords": keywords, "spots": export_spots(ranked)}

    @app.get("/api/photos/{photo_id}")
    def get_photo(photo_id: str):
        photo = photos_by_id.get(photo_id)
        if photo is None:
            raise _error(404, f"unknown photo: {photo_id}")
        local = Path(photo.uri)
        if local.is_file():
            return FileResponse(local)
        return {
            "photo_id": photo.photo_id,
            "uri": photo.uri,
            "taken_at": photo.taken_at,
            "geo": None if photo.geo is None else {"lat": photo.geo[0], "lng": photo.geo[1]},
            "tags": [
                {"keyword": t.keyword, "confidence": t.confidence} for t in photo.tags
            ],
        }

    return app


def serve(config: ServiceConfig) -> None:
    """Blocking entry point used by the CLI's serve command."""
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")

"""HTTP/JSON surface over the workspace engine.

Thin wrappers: every route calls one engine operation and returns its
payload; domain errors map to a stable {code, message} body. Streamed
inserts go out as server-sent events (token / done / error).
"""

from __future__ import annotations

import json
import queue
from typing import Iterator

from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse
from pydantic import BaseModel

from . import __version__
from .engine import WorkspaceEngine
from .errors import AbscribeError
from .llm import InsertState, PendingInsert

DEFAULT_BIND = "127.0.0.1:8787"

STATUS_BY_CODE = {
    "unknown_document": 404,
    "unknown_block": 404,
    "unknown_component": 404,
    "unknown_variation": 404,
    "unknown_button": 404,
    "unknown_insert": 404,
    "span_out_of_bounds": 422,
    "span_crosses_component": 422,
    "empty_span": 422,
    "last_variation": 422,
    "block_has_components": 422,
    "out_of_bounds": 422,
    "empty_prompt": 422,
    "empty_label": 422,
    "label_too_long": 422,
    "empty_target": 422,
    "bad_assignment": 422,
    "anchor_lost": 409,
    "insert_not_complete": 409,
    "backend_error": 502,
    "backend_timeout": 502,
    "empty_completion": 502,
    "workspace_locked": 423,
    "io_error": 500,
    "parse_error": 500,
    "unsupported_version": 500,
    "integrity_error": 500,
}


class BadAssignment(AbscribeError):
    code = "bad_assignment"


class DocumentCreate(BaseModel):
    title: str = "Untitled"
    text: str | None = None


class DocumentPatch(BaseModel):
    title: str


class ComponentCreate(BaseModel):
    block_id: str
    start: int
    end: int


class VariationCreate(BaseModel):
    text: str


class VariationPatch(BaseModel):
    text: str | None = None
    selected: bool = False


class ButtonCreate(BaseModel):
    prompt_text: str


class ButtonPatch(BaseModel):
    prompt_text: str | None = None
    label: str | None = None


class ApplyButton(BaseModel):
    button_id: str


class AdhocPrompt(BaseModel):
    prompt_text: str


class BlockCreate(BaseModel):
    index: int
    text: str = ""


class PlainTextInsert(BaseModel):
    offset: int
    text: str


class PlainRangeDelete(BaseModel):
    start: int
    end: int


class InsertStart(BaseModel):
    block_id: str
    offset: int
    prompt_text: str


class InsertResolve(BaseModel):
    action: str
    new_prompt: str | None = None


def _sse(event: str, payload: dict) -> str:
    return f"event: {event}\ndata: {json.dumps(payload, ensure_ascii=False)}\n\n"


def _parse_assignment(entries: list[str]) -> dict[str, str]:
    assignment: dict[str, str] = {}
    for entry in entries:
        component_id, sep, variation_id = entry.partition(":")
        if not sep or not component_id or not variation_id:
            raise BadAssignment(
                f"assignment entries look like component_id:variation_id, got {entry!r}")
        assignment[component_id] = variation_id
    return assignment


def _insert_event_stream(insert: PendingInsert,
                         events: "queue.Queue") -> Iterator[str]:
    """Relay sink tokens as SSE until the insert reaches a terminal state."""
    try:
        while True:
            item = events.get()
            if item is _STREAM_DONE:
                break
            yield _sse("token", {"text": item})
        if insert.state is InsertState.COMPLETE:
            yield _sse("done", {"insert_id": insert.id,
                                "full_text": insert.accumulated_text})
        elif insert.state is InsertState.CANCELLED:
            yield _sse("error", {"insert_id": insert.id, "reason": "cancelled"})
        else:
            yield _sse("error", {"insert_id": insert.id,
                                 "reason": insert.failure_reason or "backend failure"})
    finally:
        insert.cancel()


_STREAM_DONE = object()


def _start_streaming_response(start) -> StreamingResponse:
    events: "queue.Queue" = queue.Queue()
    insert = start(sink=events.put, on_terminal=lambda _ins: events.put(_STREAM_DONE))
    return StreamingResponse(_insert_event_stream(insert, events),
                             media_type="text/event-stream")


def create_app(engine: WorkspaceEngine) -> FastAPI:
    app = FastAPI(title="abscribe", version=__version__)
    app.state.engine = engine
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(AbscribeError)
    def domain_error(_request: Request, exc: AbscribeError) -> JSONResponse:
        status = STATUS_BY_CODE.get(exc.code, 500)
        return JSONResponse(status_code=status,
                            content={"code": exc.code, "message": exc.message})

    # --- documents -------------------------------------------------------------

    @app.get("/api/v1/documents")
    def list_documents():
        return engine.list_documents()

    @app.post("/api/v1/documents", status_code=201)
    def create_document(body: DocumentCreate):
        return engine.create_document(body.title, body.text)

    @app.get("/api/v1/documents/{document_id}")
    def get_document(document_id: str):
        return engine.get_document(document_id)

    @app.patch("/api/v1/documents/{document_id}")
    def rename_document(document_id: str, body: DocumentPatch):
        return engine.rename_document(document_id, body.title)

    @app.delete("/api/v1/documents/{document_id}")
    def delete_document(document_id: str):
        return engine.delete_document(document_id)

    @app.get("/api/v1/documents/{document_id}/flatten")
    def flatten(document_id: str, assign: list[str] = Query(default=[])):
        text = engine.flatten(document_id, _parse_assignment(assign) or None)
        return PlainTextResponse(text)

    # --- components and variations --------------------------------------------------

    @app.get("/api/v1/documents/{document_id}/components")
    def list_components(document_id: str):
        return engine.list_components(document_id)

    @app.post("/api/v1/documents/{document_id}/components", status_code=201)
    def create_component(document_id: str, body: ComponentCreate):
        return engine.create_component(document_id, body.block_id, body.start, body.end)

    @app.post("/api/v1/documents/{document_id}/components/{component_id}/dissolve")
    def dissolve_component(document_id: str, component_id: str):
        return engine.dissolve_component(document_id, component_id)

    @app.post("/api/v1/documents/{document_id}/components/{component_id}/variations",
              status_code=201)
    def add_variation(document_id: str, component_id: str, body: VariationCreate):
        return engine.add_variation(document_id, component_id, body.text)

    @app.patch("/api/v1/documents/{document_id}/components/{component_id}"
               "/variations/{variation_id}")
    def patch_variation(document_id: str, component_id: str, variation_id: str,
                        body: VariationPatch):
        out: dict = {"variation_id": variation_id}
        if body.text is not None:
            out.update(engine.edit_variation(document_id, component_id,
                                             variation_id, body.text))
        if body.selected:
            out.update(engine.select_variation(document_id, component_id,
                                               variation_id))
        return out

    @app.delete("/api/v1/documents/{document_id}/components/{component_id}"
                "/variations/{variation_id}")
    def delete_variation(document_id: str, component_id: str, variation_id: str):
        return engine.delete_variation(document_id, component_id, variation_id)

    @app.post("/api/v1/documents/{document_id}/components/{component_id}"
              "/variations/{variation_id}/clone", status_code=201)
    def clone_variation(document_id: str, component_id: str, variation_id: str):
        return engine.clone_variation(document_id, component_id, variation_id)

    @app.post("/api/v1/documents/{document_id}/components/{component_id}/apply-button")
    def apply_button(document_id: str, component_id: str, body: ApplyButton):
        return engine.apply_button(document_id, component_id, body.button_id)

    @app.post("/api/v1/documents/{document_id}/components/{component_id}/adhoc")
    def adhoc_variation(document_id: str, component_id: str, body: AdhocPrompt):
        return engine.adhoc_variation(document_id, component_id, body.prompt_text)

    # --- plain text and blocks ----------------------------------------------------

    @app.post("/api/v1/documents/{document_id}/blocks", status_code=201)
    def insert_block(document_id: str, body: BlockCreate):
        return engine.insert_block(document_id, body.index, body.text)

    @app.delete("/api/v1/documents/{document_id}/blocks/{block_id}")
    def delete_block(document_id: str, block_id: str):
        return engine.delete_block(document_id, block_id)

    @app.post("/api/v1/documents/{document_id}/blocks/{block_id}/text")
    def insert_plain_text(document_id: str, block_id: str, body: PlainTextInsert):
        return engine.insert_plain_text(document_id, block_id, body.offset, body.text)

    @app.post("/api/v1/documents/{document_id}/blocks/{block_id}/delete-range")
    def delete_plain_range(document_id: str, block_id: str, body: PlainRangeDelete):
        return engine.delete_plain_range(document_id, block_id, body.start, body.end)

    # --- buttons --------------------------------------------------------------

    @app.get("/api/v1/buttons")
    def list_buttons():
        return engine.list_buttons()

    @app.post("/api/v1/buttons", status_code=201)
    def create_button(body: ButtonCreate):
        return engine.create_button(body.prompt_text)

    @app.patch("/api/v1/buttons/{button_id}")
    def edit_button(button_id: str, body: ButtonPatch):
        return engine.edit_button(button_id, body.prompt_text, body.label)

    @app.delete("/api/v1/buttons/{button_id}")
    def delete_button(button_id: str):
        return engine.delete_button(button_id)

    # --- streamed inserts --------------------------------------------------------

    @app.post("/api/v1/documents/{document_id}/inserts")
    def stream_insert(document_id: str, body: InsertStart):
        return _start_streaming_response(
            lambda sink, on_terminal: engine.start_insert(
                document_id, body.block_id, body.offset, body.prompt_text,
                sink=sink, on_terminal=on_terminal))

    @app.post("/api/v1/inserts/{insert_id}/resolve")
    def resolve_insert(insert_id: str, body: InsertResolve):
        if body.action == "accept":
            return engine.accept_insert(insert_id)
        if body.action == "discard":
            return engine.discard_insert(insert_id)
        if body.action == "revise":
            new_prompt = (body.new_prompt or "").strip()
            return _start_streaming_response(
                lambda sink, on_terminal: engine.revise_insert(
                    insert_id, new_prompt, sink=sink, on_terminal=on_terminal))
        return JSONResponse(status_code=422, content={
            "code": "bad_action",
            "message": f"action must be accept, discard, or revise, got {body.action!r}",
        })

    return app


def parse_bind(bind: str) -> tuple[str, int]:
    host, _, port = bind.rpartition(":")
    if not host or not port.isdigit():
        raise ValueError(f"bind must look like host:port, got {bind!r}")
    return host, int(port)

"""Workspace orchestration shared by the HTTP service and the CLI.

All mutations run under one state guard and persist the workspace before
returning (write-through), so the file on disk always matches the last
acknowledged response. LLM calls happen outside the guard against a
snapshot; their results are re-validated and applied under the guard, and a
failed backend call leaves document, registry, and file untouched.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Callable

from . import ids, store
from .errors import (
    AbscribeError,
    AnchorLost,
    EmptyPrompt,
    InsertNotComplete,
    OutOfBounds,
    SpanCrossesComponent,
    UnknownBlock,
)
from .llm import Gateway, GenerationRequest, InsertState, ModelConfig, PendingInsert, RequestKind
from .model import (
    ComponentListing,
    ComponentRun,
    Document,
    Origin,
    Span,
    TextRun,
    document_from_text,
    new_document,
)
from .store import Workspace

CONTEXT_WINDOW_CHARS = 2000


def _truncate_at_block_boundary(pieces: list[str], limit: int, keep_end: bool) -> str:
    """Drop whole blocks from the far side until the window fits; the piece
    adjacent to the target always survives."""
    pieces = list(pieces)
    while len(pieces) > 1 and len("\n".join(pieces)) > limit:
        pieces.pop(0 if keep_end else -1)
    return "\n".join(pieces)


def listing_to_dict(listing: ComponentListing) -> dict:
    return {
        "component_id": listing.component_id,
        "block_id": listing.block_id,
        "variations": [
            {
                "id": v.id,
                "text": v.text,
                "selected": v.selected,
                "origin": store.origin_to_dict(v.origin),
                "created_at": ids.format_timestamp(v.created_at),
            }
            for v in listing.variations
        ],
    }


class WorkspaceEngine:
    """Single-writer facade over one workspace."""

    def __init__(self, workspace: Workspace, path: str | Path | None,
                 gateway: Gateway):
        self.workspace = workspace
        self.path = Path(path) if path is not None else None
        self.gateway = gateway
        self._guard = threading.RLock()
        self._revision = 0

    @classmethod
    def open(cls, path: str | Path, config: ModelConfig | None = None,
             gateway: Gateway | None = None) -> "WorkspaceEngine":
        workspace = store.load_or_create(path)
        return cls(workspace, path, gateway or Gateway(config or ModelConfig()))

    def _commit(self) -> int:
        self.workspace.validate()
        self._revision += 1
        if self.path is not None:
            store.save(self.workspace, self.path)
        return self._revision

    # --- documents -----------------------------------------------------------

    def create_document(self, title: str, text: str | None = None) -> dict:
        doc = new_document(title) if text is None else document_from_text(title, text)
        with self._guard:
            self.workspace.documents.append(doc)
            revision = self._commit()
        return {"document": store.document_to_dict(doc), "revision": revision}

    def delete_document(self, document_id: str) -> dict:
        with self._guard:
            self.workspace.remove_document(document_id)
            revision = self._commit()
        return {"deleted": document_id, "revision": revision}

    def rename_document(self, document_id: str, title: str) -> dict:
        with self._guard:
            doc = self.workspace.document(document_id)
            doc.set_title(title)
            revision = self._commit()
        return {"document": store.document_to_dict(doc), "revision": revision}

    def get_document(self, document_id: str) -> dict:
        with self._guard:
            return store.document_to_dict(self.workspace.document(document_id))

    def list_documents(self) -> list[dict]:
        with self._guard:
            return [{"id": d.id, "title": d.title,
                     "created_at": ids.format_timestamp(d.created_at),
                     "updated_at": ids.format_timestamp(d.updated_at)}
                    for d in self.workspace.documents]

    def flatten(self, document_id: str, assignment: dict[str, str] | None = None) -> str:
        with self._guard:
            return self.workspace.document(document_id).flatten(assignment)

    def list_components(self, document_id: str) -> list[dict]:
        with self._guard:
            doc = self.workspace.document(document_id)
            return [listing_to_dict(entry) for entry in doc.list_components()]

    # --- wrapped document-model mutations -----------------------------------------

    def create_component(self, document_id: str, block_id: str,
                         start: int, end: int) -> dict:
        with self._guard:
            doc = self.workspace.document(document_id)
            component_id = doc.create_component(Span(block_id, start, end))
            component = doc.component(component_id)
            revision = self._commit()
        return {"component_id": component_id,
                "variation_id": component.selected_id,
                "revision": revision}

    def dissolve_component(self, document_id: str, component_id: str) -> dict:
        with self._guard:
            self.workspace.document(document_id).dissolve_component(component_id)
            revision = self._commit()
        return {"dissolved": component_id, "revision": revision}

    def add_variation(self, document_id: str, component_id: str, text: str,
                      origin: Origin | None = None) -> dict:
        with self._guard:
            doc = self.workspace.document(document_id)
            variation_id = doc.add_variation(component_id, text, origin)
            revision = self._commit()
        return {"variation_id": variation_id, "revision": revision}

    def select_variation(self, document_id: str, component_id: str,
                         variation_id: str) -> dict:
        with self._guard:
            self.workspace.document(document_id).select_variation(component_id,
                                                                  variation_id)
            revision = self._commit()
        return {"selected": variation_id, "revision": revision}

    def delete_variation(self, document_id: str, component_id: str,
                         variation_id: str) -> dict:
        with self._guard:
            doc = self.workspace.document(document_id)
            doc.delete_variation(component_id, variation_id)
            selected = doc.component(component_id).selected_id
            revision = self._commit()
        return {"deleted": variation_id, "selected": selected, "revision": revision}

    def edit_variation(self, document_id: str, component_id: str,
                       variation_id: str, text: str) -> dict:
        with self._guard:
            self.workspace.document(document_id).edit_variation_text(
                component_id, variation_id, text)
            revision = self._commit()
        return {"variation_id": variation_id, "revision": revision}

    def clone_variation(self, document_id: str, component_id: str,
                        variation_id: str) -> dict:
        with self._guard:
            doc = self.workspace.document(document_id)
            new_id = doc.clone_variation(component_id, variation_id)
            revision = self._commit()
        return {"variation_id": new_id, "revision": revision}

    def insert_plain_text(self, document_id: str, block_id: str, offset: int,
                          text: str) -> dict:
        with self._guard:
            self.workspace.document(document_id).insert_plain_text(block_id,
                                                                   offset, text)
            revision = self._commit()
        return {"block_id": block_id, "revision": revision}

    def delete_plain_range(self, document_id: str, block_id: str,
                           start: int, end: int) -> dict:
        with self._guard:
            self.workspace.document(document_id).delete_plain_range(
                Span(block_id, start, end))
            revision = self._commit()
        return {"block_id": block_id, "revision": revision}

    def insert_block(self, document_id: str, index: int, text: str) -> dict:
        with self._guard:
            block_id = self.workspace.document(document_id).insert_block(index, text)
            revision = self._commit()
        return {"block_id": block_id, "revision": revision}

    def delete_block(self, document_id: str, block_id: str) -> dict:
        with self._guard:
            self.workspace.document(document_id).delete_block(block_id)
            revision = self._commit()
        return {"deleted": block_id, "revision": revision}

    # --- buttons --------------------------------------------------------------

    def create_button(self, prompt_text: str) -> dict:
        if not prompt_text.strip():
            raise EmptyPrompt("prompt text is empty")
        try:
            label = self.gateway.generate_label(prompt_text.strip())
        except AbscribeError:
            label = None

        def provider(_prompt: str) -> str:
            if label is None:
                raise RuntimeError("label generation failed")
            return label

        with self._guard:
            button = self.workspace.registry.create_button(prompt_text, provider)
            revision = self._commit()
        return {"button": store.button_to_dict(button), "revision": revision}

    def edit_button(self, button_id: str, new_prompt: str | None = None,
                    new_label: str | None = None) -> dict:
        with self._guard:
            self.workspace.registry.edit_button(button_id, new_prompt, new_label)
            button = self.workspace.registry.get(button_id)
            revision = self._commit()
        return {"button": store.button_to_dict(button), "revision": revision}

    def delete_button(self, button_id: str) -> dict:
        with self._guard:
            self.workspace.registry.delete_button(button_id)
            revision = self._commit()
        return {"deleted": button_id, "revision": revision}

    def list_buttons(self) -> list[dict]:
        with self._guard:
            return [store.button_to_dict(b)
                    for b in self.workspace.registry.list_buttons()]

    # --- LLM-composed operations ---------------------------------------------------

    def apply_button(self, document_id: str, component_id: str,
                     button_id: str) -> dict:
        """Rewrite the component's selected variation with the button's
        prompt, append and select the result, and count the use. Nothing is
        touched if the backend fails."""
        with self._guard:
            doc = self.workspace.document(document_id)
            component = doc.component(component_id)
            button = self.workspace.registry.get(button_id)
            source = component.selected
            before, after = self._split_at_component(doc, component_id)
            request = GenerationRequest(kind=RequestKind.VARIATION,
                                        instruction=button.prompt_text,
                                        target_text=source.text,
                                        context_before=before, context_after=after)
        text = self.gateway.generate_variation(request)
        with self._guard:
            doc = self.workspace.document(document_id)
            doc.component(component_id)
            self.workspace.registry.get(button_id)
            variation_id = doc.add_variation(
                component_id, text, Origin.llm_button(button_id, source.id))
            doc.select_variation(component_id, variation_id)
            self.workspace.registry.record_use(button_id)
            revision = self._commit()
        return {"variation_id": variation_id, "text": text, "revision": revision}

    def adhoc_variation(self, document_id: str, component_id: str,
                        prompt_text: str) -> dict:
        """Typed instruction: mint a reusable button for it, then apply it.
        The button is only created when generation succeeds."""
        prompt_text = prompt_text.strip()
        if not prompt_text:
            raise EmptyPrompt("prompt text is empty")
        with self._guard:
            doc = self.workspace.document(document_id)
            component = doc.component(component_id)
            source = component.selected
            before, after = self._split_at_component(doc, component_id)
            request = GenerationRequest(kind=RequestKind.VARIATION,
                                        instruction=prompt_text,
                                        target_text=source.text,
                                        context_before=before, context_after=after)
        try:
            label = self.gateway.generate_label(prompt_text)
        except AbscribeError:
            label = None
        text = self.gateway.generate_variation(request)

        def provider(_prompt: str) -> str:
            if label is None:
                raise RuntimeError("label generation failed")
            return label

        with self._guard:
            doc = self.workspace.document(document_id)
            doc.component(component_id)
            button = self.workspace.registry.create_button(prompt_text, provider)
            variation_id = doc.add_variation(
                component_id, text, Origin.llm_adhoc(prompt_text, source.id))
            doc.select_variation(component_id, variation_id)
            self.workspace.registry.record_use(button.id)
            revision = self._commit()
        return {"button": store.button_to_dict(button),
                "variation_id": variation_id, "text": text, "revision": revision}

    # --- streamed inserts -----------------------------------------------------

    def start_insert(self, document_id: str, block_id: str, offset: int,
                     prompt_text: str,
                     sink: Callable[[str], None] | None = None,
                     on_terminal: Callable[[PendingInsert], None] | None = None,
                     ) -> PendingInsert:
        with self._guard:
            doc = self.workspace.document(document_id)
            doc.assert_plain_position(block_id, offset)
            before, after = self._split_at_anchor(doc, block_id, offset)
        return self.gateway.start_insert(
            before, after, prompt_text, sink=sink,
            document_id=document_id, anchor=(block_id, offset),
            on_terminal=on_terminal)

    def accept_insert(self, insert_id: str) -> dict:
        """Splice the finished insert at its anchor; the anchor is re-checked
        because edits may have invalidated it since the stream started."""
        insert = self.gateway.get_insert(insert_id)
        if insert.state is not InsertState.COMPLETE:
            raise InsertNotComplete(
                f"insert {insert_id} is {insert.state.value}, not complete")
        block_id, offset = insert.anchor
        with self._guard:
            doc = self.workspace.document(insert.document_id)
            try:
                doc.assert_plain_position(block_id, offset)
            except (UnknownBlock, OutOfBounds, SpanCrossesComponent) as exc:
                raise AnchorLost(f"insert anchor no longer valid: {exc}") from exc
            doc.insert_plain_text(block_id, offset, insert.accumulated_text)
            revision = self._commit()
        self.gateway.release_insert(insert_id)
        return {"insert_id": insert_id, "text": insert.accumulated_text,
                "block_id": block_id, "offset": offset, "revision": revision}

    def discard_insert(self, insert_id: str) -> dict:
        self.gateway.get_insert(insert_id)
        self.gateway.release_insert(insert_id)
        return {"insert_id": insert_id, "discarded": True}

    def revise_insert(self, insert_id: str, new_prompt: str,
                      sink: Callable[[str], None] | None = None,
                      on_terminal: Callable[[PendingInsert], None] | None = None,
                      ) -> PendingInsert:
        """Drop the old output and re-run at the same anchor."""
        old = self.gateway.get_insert(insert_id)
        block_id, offset = old.anchor
        self.gateway.release_insert(insert_id)
        return self.start_insert(old.document_id, block_id, offset, new_prompt,
                                 sink=sink, on_terminal=on_terminal)

    # --- context assembly -------------------------------------------------------

    def _split_at_component(self, doc: Document, component_id: str) -> tuple[str, str]:
        before_pieces: list[str] = []
        after_pieces: list[str] = []
        seen = False
        for block in doc.blocks:
            holds_target = any(isinstance(r, ComponentRun) and r.component.id == component_id
                               for r in block.runs)
            if holds_target:
                prefix: list[str] = []
                suffix: list[str] = []
                past = False
                for run in block.runs:
                    if isinstance(run, ComponentRun) and run.component.id == component_id:
                        past = True
                        continue
                    text = run.text if isinstance(run, TextRun) else run.component.selected.text
                    (suffix if past else prefix).append(text)
                before_pieces.append("".join(prefix))
                after_pieces.append("".join(suffix))
                seen = True
            elif seen:
                after_pieces.append(doc.text_of_block(block))
            else:
                before_pieces.append(doc.text_of_block(block))
        return (
            _truncate_at_block_boundary(before_pieces, CONTEXT_WINDOW_CHARS, keep_end=True),
            _truncate_at_block_boundary(after_pieces, CONTEXT_WINDOW_CHARS, keep_end=False),
        )

    def _split_at_anchor(self, doc: Document, block_id: str,
                         offset: int) -> tuple[str, str]:
        before_pieces: list[str] = []
        after_pieces: list[str] = []
        seen = False
        for block in doc.blocks:
            text = doc.text_of_block(block)
            if block.id == block_id:
                before_pieces.append(text[:offset])
                after_pieces.append(text[offset:])
                seen = True
            elif seen:
                after_pieces.append(text)
            else:
                before_pieces.append(text)
        return (
            _truncate_at_block_boundary(before_pieces, CONTEXT_WINDOW_CHARS, keep_end=True),
            _truncate_at_block_boundary(after_pieces, CONTEXT_WINDOW_CHARS, keep_end=False),
        )

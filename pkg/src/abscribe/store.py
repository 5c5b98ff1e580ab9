"""Durable workspace storage: one JSON file, written atomically.

The file embeds each variation component inside the run that references it,
which makes the referenced-exactly-once rule structural. Loading re-checks
every model invariant and rejects violations instead of repairing them.
"""

from __future__ import annotations

import json
import os
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from filelock import FileLock, Timeout

from . import ids
from .errors import (
    IntegrityError,
    ParseError,
    StoreIoError,
    UnknownDocument,
    UnsupportedVersion,
    WorkspaceLocked,
)
from .model import (
    Block,
    ComponentRun,
    Document,
    Origin,
    OriginKind,
    Run,
    TextRun,
    Variation,
    VariationComponent,
)
from .registry import LABEL_MAX_CHARS, ButtonRegistry, PromptButton

FORMAT_VERSION = 1
DEFAULT_WORKSPACE_FILENAME = "workspace.abscribe.json"
LOCK_TIMEOUT_SECONDS = 10.0


def default_workspace_path() -> Path:
    return Path(os.environ.get("ABSCRIBE_WORKSPACE", DEFAULT_WORKSPACE_FILENAME))


@dataclass
class Workspace:
    documents: list[Document] = field(default_factory=list)
    registry: ButtonRegistry = field(default_factory=ButtonRegistry)
    format_version: int = FORMAT_VERSION

    @property
    def buttons(self) -> list[PromptButton]:
        return self.registry.buttons

    def document(self, document_id: str) -> Document:
        for doc in self.documents:
            if doc.id == document_id:
                return doc
        raise UnknownDocument(f"no document {document_id}")

    def remove_document(self, document_id: str) -> None:
        self.documents.remove(self.document(document_id))

    def validate(self) -> None:
        doc_ids = [d.id for d in self.documents]
        if len(doc_ids) != len(set(doc_ids)):
            raise IntegrityError("duplicate document ids in workspace")
        for doc in self.documents:
            doc.validate()
        button_ids = [b.id for b in self.buttons]
        if len(button_ids) != len(set(button_ids)):
            raise IntegrityError("duplicate button ids in workspace")
        for b in self.buttons:
            if not b.label.strip() or len(b.label) > LABEL_MAX_CHARS:
                raise IntegrityError(f"button {b.id} label violates constraints")
            if not b.prompt_text:
                raise IntegrityError(f"button {b.id} has an empty prompt")
            if b.use_count < 0:
                raise IntegrityError(f"button {b.id} has a negative use_count")


# --- serialization ------------------------------------------------------------

def origin_to_dict(origin: Origin) -> dict:
    out: dict = {"kind": origin.kind.value}
    if origin.button_id is not None:
        out["button_id"] = origin.button_id
    if origin.source_variation_id is not None:
        out["source_variation_id"] = origin.source_variation_id
    if origin.prompt_text is not None:
        out["prompt_text"] = origin.prompt_text
    return out


def variation_to_dict(v: Variation) -> dict:
    return {
        "id": v.id,
        "text": v.text,
        "origin": origin_to_dict(v.origin),
        "created_at": ids.format_timestamp(v.created_at),
    }


def component_to_dict(c: VariationComponent) -> dict:
    return {
        "id": c.id,
        "selected_id": c.selected_id,
        "variations": [variation_to_dict(v) for v in c.variations],
    }


def run_to_dict(run: Run) -> dict:
    if isinstance(run, TextRun):
        return {"type": "text", "text": run.text}
    return {"type": "component", "component": component_to_dict(run.component)}


def block_to_dict(block: Block) -> dict:
    return {"id": block.id, "runs": [run_to_dict(r) for r in block.runs]}


def document_to_dict(doc: Document) -> dict:
    return {
        "id": doc.id,
        "title": doc.title,
        "created_at": ids.format_timestamp(doc.created_at),
        "updated_at": ids.format_timestamp(doc.updated_at),
        "blocks": [block_to_dict(b) for b in doc.blocks],
    }


def button_to_dict(button: PromptButton) -> dict:
    return {
        "id": button.id,
        "label": button.label,
        "prompt_text": button.prompt_text,
        "created_at": ids.format_timestamp(button.created_at),
        "use_count": button.use_count,
    }


def workspace_to_dict(workspace: Workspace) -> dict:
    return {
        "format_version": workspace.format_version,
        "documents": [document_to_dict(d) for d in workspace.documents],
        "buttons": [button_to_dict(b) for b in workspace.buttons],
    }


# --- parsing -------------------------------------------------------------------

def _expect(value, kind: type, path: str):
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or (kind is int and isinstance(value, bool)):
        raise ParseError(path, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def _get(obj: dict, key: str, kind: type, path: str):
    if not isinstance(obj, dict):
        raise ParseError(path, f"expected object, got {type(obj).__name__}")
    if key not in obj:
        raise ParseError(path, f"missing field {key!r}")
    return _expect(obj[key], kind, f"{path}.{key}")


def _timestamp(obj: dict, key: str, path: str):
    raw = _get(obj, key, str, path)
    try:
        return ids.parse_timestamp(raw)
    except ValueError as exc:
        raise ParseError(f"{path}.{key}", f"bad timestamp: {exc}") from exc


def origin_from_dict(obj: dict, path: str) -> Origin:
    kind_raw = _get(obj, "kind", str, path)
    try:
        kind = OriginKind(kind_raw)
    except ValueError as exc:
        raise ParseError(f"{path}.kind", f"unknown origin kind {kind_raw!r}") from exc
    def opt(key: str) -> str | None:
        return _expect(obj[key], str, f"{path}.{key}") if key in obj else None
    return Origin(kind=kind, button_id=opt("button_id"),
                  source_variation_id=opt("source_variation_id"),
                  prompt_text=opt("prompt_text"))


def variation_from_dict(obj: dict, path: str) -> Variation:
    return Variation(
        id=_get(obj, "id", str, path),
        text=_get(obj, "text", str, path),
        origin=origin_from_dict(_get(obj, "origin", dict, path), f"{path}.origin"),
        created_at=_timestamp(obj, "created_at", path),
    )


def component_from_dict(obj: dict, path: str) -> VariationComponent:
    variations_raw = _get(obj, "variations", list, path)
    variations = [variation_from_dict(_expect(v, dict, f"{path}.variations[{i}]"),
                                      f"{path}.variations[{i}]")
                  for i, v in enumerate(variations_raw)]
    return VariationComponent(
        id=_get(obj, "id", str, path),
        selected_id=_get(obj, "selected_id", str, path),
        variations=variations,
    )


def run_from_dict(obj: dict, path: str) -> Run:
    run_type = _get(obj, "type", str, path)
    if run_type == "text":
        return TextRun(text=_get(obj, "text", str, path))
    if run_type == "component":
        component = component_from_dict(_get(obj, "component", dict, path),
                                        f"{path}.component")
        return ComponentRun(component=component)
    raise ParseError(f"{path}.type", f"unknown run type {run_type!r}")


def block_from_dict(obj: dict, path: str) -> Block:
    runs_raw = _get(obj, "runs", list, path)
    runs = [run_from_dict(_expect(r, dict, f"{path}.runs[{i}]"), f"{path}.runs[{i}]")
            for i, r in enumerate(runs_raw)]
    return Block(id=_get(obj, "id", str, path), runs=runs)


def document_from_dict(obj: dict, path: str = "document") -> Document:
    blocks_raw = _get(obj, "blocks", list, path)
    blocks = [block_from_dict(_expect(b, dict, f"{path}.blocks[{i}]"),
                              f"{path}.blocks[{i}]")
              for i, b in enumerate(blocks_raw)]
    return Document(
        id=_get(obj, "id", str, path),
        title=_get(obj, "title", str, path),
        created_at=_timestamp(obj, "created_at", path),
        updated_at=_timestamp(obj, "updated_at", path),
        blocks=blocks,
    )


def button_from_dict(obj: dict, path: str) -> PromptButton:
    use_count = _get(obj, "use_count", int, path)
    return PromptButton(
        id=_get(obj, "id", str, path),
        label=_get(obj, "label", str, path),
        prompt_text=_get(obj, "prompt_text", str, path),
        created_at=_timestamp(obj, "created_at", path),
        use_count=use_count,
    )


def workspace_from_dict(obj: dict) -> Workspace:
    version = _get(obj, "format_version", int, "workspace")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(version)
    documents_raw = _get(obj, "documents", list, "workspace")
    documents = [document_from_dict(_expect(d, dict, f"workspace.documents[{i}]"),
                                    f"workspace.documents[{i}]")
                 for i, d in enumerate(documents_raw)]
    buttons_raw = _get(obj, "buttons", list, "workspace")
    buttons = [button_from_dict(_expect(b, dict, f"workspace.buttons[{i}]"),
                                f"workspace.buttons[{i}]")
               for i, b in enumerate(buttons_raw)]
    workspace = Workspace(documents=documents,
                          registry=ButtonRegistry(buttons=buttons),
                          format_version=version)
    workspace.validate()
    return workspace


# --- file I/O -----------------------------------------------------------------

def save(workspace: Workspace, path: str | Path) -> None:
    """Write via temp-file-then-rename so an interrupted save never corrupts
    the destination."""
    path = Path(path)
    payload = json.dumps(workspace_to_dict(workspace), indent=2, ensure_ascii=False)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp",
                                        dir=path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp_name, path)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except OSError:
                pass
            raise
    except OSError as exc:
        raise StoreIoError(f"cannot write workspace to {path}: {exc}") from exc


def load(path: str | Path) -> Workspace:
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreIoError(f"cannot read workspace from {path}: {exc}") from exc
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}", exc.msg) from exc
    if not isinstance(obj, dict):
        raise ParseError("workspace", "top-level value is not an object")
    return workspace_from_dict(obj)


def load_or_create(path: str | Path) -> Workspace:
    if Path(path).exists():
        return load(path)
    return Workspace()


@contextmanager
def workspace_lock(path: str | Path, timeout: float | None = None):
    """Advisory cross-process lock; one process owns a workspace file."""
    if timeout is None:
        timeout = LOCK_TIMEOUT_SECONDS
    lock = FileLock(f"{path}.lock")
    try:
        lock.acquire(timeout=timeout)
    except Timeout as exc:
        raise WorkspaceLocked(
            f"workspace {path} is locked by another process") from exc
    try:
        yield
    finally:
        lock.release()

"""In-memory document model with in-place text variations.

A document is an ordered list of blocks (paragraphs). Each block holds an
interleaving of plain-text runs and variation components. A component keeps
every alternative ever written for its segment and exactly one of them is
selected at a time, so alternatives accumulate without cluttering the draft
or erasing anything.

Pure state machine: no I/O and no LLM calls live here. Offsets are counted
in Unicode code points over a block's flattened text (components contribute
their selected variation's text).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum

from . import ids
from .errors import (
    BlockHasComponents,
    EmptySpan,
    IntegrityError,
    LastVariation,
    OutOfBounds,
    SpanCrossesComponent,
    SpanOutOfBounds,
    UnknownBlock,
    UnknownComponent,
    UnknownVariation,
)


class OriginKind(str, Enum):
    HUMAN = "human"
    LLM_BUTTON = "llm_button"
    LLM_ADHOC = "llm_adhoc"
    CLONE = "clone"


@dataclass(frozen=True)
class Origin:
    """Provenance of a variation. Referenced ids are retained even if the
    source entity is later deleted."""

    kind: OriginKind
    button_id: str | None = None
    source_variation_id: str | None = None
    prompt_text: str | None = None

    @classmethod
    def human(cls) -> "Origin":
        return cls(OriginKind.HUMAN)

    @classmethod
    def llm_button(cls, button_id: str, source_variation_id: str) -> "Origin":
        return cls(OriginKind.LLM_BUTTON, button_id=button_id,
                   source_variation_id=source_variation_id)

    @classmethod
    def llm_adhoc(cls, prompt_text: str, source_variation_id: str) -> "Origin":
        return cls(OriginKind.LLM_ADHOC, prompt_text=prompt_text,
                   source_variation_id=source_variation_id)

    @classmethod
    def clone(cls, source_variation_id: str) -> "Origin":
        return cls(OriginKind.CLONE, source_variation_id=source_variation_id)


@dataclass
class Variation:
    id: str
    text: str
    origin: Origin
    created_at: datetime


@dataclass
class VariationComponent:
    """A reified text segment holding alternatives in creation order."""

    id: str
    variations: list[Variation]
    selected_id: str

    def variation(self, variation_id: str) -> Variation:
        for v in self.variations:
            if v.id == variation_id:
                return v
        raise UnknownVariation(f"no variation {variation_id} in component {self.id}")

    @property
    def selected(self) -> Variation:
        return self.variation(self.selected_id)


@dataclass
class TextRun:
    text: str


@dataclass
class ComponentRun:
    component: VariationComponent


Run = TextRun | ComponentRun


@dataclass
class Block:
    id: str
    runs: list[Run]


@dataclass(frozen=True)
class Span:
    """Half-open character range within one block's flattened text."""

    block_id: str
    start: int
    end: int


def _run_length(run: Run) -> int:
    if isinstance(run, TextRun):
        return len(run.text)
    return len(run.component.selected.text)


def _normalize_runs(runs: list[Run]) -> list[Run]:
    """Merge adjacent plain runs and drop empty ones; an empty block is a
    single empty plain run."""
    out: list[Run] = []
    for run in runs:
        if isinstance(run, TextRun):
            if not run.text:
                continue
            if out and isinstance(out[-1], TextRun):
                out[-1] = TextRun(out[-1].text + run.text)
            else:
                out.append(TextRun(run.text))
        else:
            out.append(run)
    if not out:
        out.append(TextRun(""))
    return out


def _new_component(text: str) -> VariationComponent:
    seed = Variation(id=ids.new_id(), text=text, origin=Origin.human(),
                     created_at=ids.now_utc())
    return VariationComponent(id=ids.new_id(), variations=[seed], selected_id=seed.id)


@dataclass
class VariationSummary:
    id: str
    text: str
    origin: Origin
    created_at: datetime
    selected: bool


@dataclass
class ComponentListing:
    component_id: str
    block_id: str
    variations: list[VariationSummary]


@dataclass
class Document:
    id: str
    title: str
    blocks: list[Block]
    created_at: datetime
    updated_at: datetime

    # --- lookup -------------------------------------------------------------

    def block(self, block_id: str) -> Block:
        for b in self.blocks:
            if b.id == block_id:
                return b
        raise UnknownBlock(f"no block {block_id} in document {self.id}")

    def component(self, component_id: str) -> VariationComponent:
        return self._component_site(component_id)[2]

    def _component_site(self, component_id: str) -> tuple[Block, int, VariationComponent]:
        for b in self.blocks:
            for i, run in enumerate(b.runs):
                if isinstance(run, ComponentRun) and run.component.id == component_id:
                    return b, i, run.component
        raise UnknownComponent(f"no component {component_id} in document {self.id}")

    def components_in_order(self) -> list[tuple[Block, VariationComponent]]:
        """All components in document order: block order, then run order."""
        found = []
        for b in self.blocks:
            for run in b.runs:
                if isinstance(run, ComponentRun):
                    found.append((b, run.component))
        return found

    def block_length(self, block_id: str) -> int:
        return sum(_run_length(r) for r in self.block(block_id).runs)

    # --- flattening -----------------------------------------------------------

    def flatten(self, assignment: dict[str, str] | None = None) -> str:
        """Project to plain text: plain runs verbatim, components replaced by
        the assigned (default: selected) variation, blocks joined by one
        newline."""
        if assignment:
            for component_id, variation_id in assignment.items():
                self.component(component_id).variation(variation_id)
        return "\n".join(self.text_of_block(b, assignment) for b in self.blocks)

    def text_of_block(self, block: Block, assignment: dict[str, str] | None = None) -> str:
        parts = []
        for run in block.runs:
            if isinstance(run, TextRun):
                parts.append(run.text)
            else:
                c = run.component
                if assignment and c.id in assignment:
                    parts.append(c.variation(assignment[c.id]).text)
                else:
                    parts.append(c.selected.text)
        return "".join(parts)

    def list_components(self) -> list[ComponentListing]:
        listings = []
        for block, c in self.components_in_order():
            summaries = [
                VariationSummary(id=v.id, text=v.text, origin=v.origin,
                                 created_at=v.created_at, selected=v.id == c.selected_id)
                for v in c.variations
            ]
            listings.append(ComponentListing(component_id=c.id, block_id=block.id,
                                             variations=summaries))
        return listings

    # --- component lifecycle ----------------------------------------------------

    def create_component(self, span: Span) -> str:
        """Reify the spanned text into a component whose sole variation is the
        original text, selected."""
        block = self.block(span.block_id)
        run_index, local_start, local_end = self._locate_text_span(block, span)
        run = block.runs[run_index]
        assert isinstance(run, TextRun)
        component = _new_component(run.text[local_start:local_end])
        replacement: list[Run] = [
            TextRun(run.text[:local_start]),
            ComponentRun(component),
            TextRun(run.text[local_end:]),
        ]
        block.runs[run_index:run_index + 1] = replacement
        block.runs = _normalize_runs(block.runs)
        self._touch()
        return component.id

    def dissolve_component(self, component_id: str) -> None:
        """Replace the component by its selected text; other variations are
        discarded."""
        block, run_index, component = self._component_site(component_id)
        block.runs[run_index] = TextRun(component.selected.text)
        block.runs = _normalize_runs(block.runs)
        self._touch()

    # --- variation operations -----------------------------------------------------

    def add_variation(self, component_id: str, text: str,
                      origin: Origin | None = None) -> str:
        """Append a variation in creation order. Selection is untouched;
        callers that want the new variation active select it explicitly."""
        component = self.component(component_id)
        v = Variation(id=ids.new_id(), text=text,
                      origin=origin or Origin.human(), created_at=ids.now_utc())
        component.variations.append(v)
        self._touch()
        return v.id

    def select_variation(self, component_id: str, variation_id: str) -> None:
        component = self.component(component_id)
        if component.selected_id == variation_id:
            return
        component.variation(variation_id)
        component.selected_id = variation_id
        self._touch()

    def delete_variation(self, component_id: str, variation_id: str) -> None:
        """Remove one variation; the selection falls back to its predecessor
        in creation order (successor when the first one goes)."""
        component = self.component(component_id)
        victim = component.variation(variation_id)
        if len(component.variations) < 2:
            raise LastVariation(
                f"component {component_id} holds only one variation; dissolve instead")
        index = component.variations.index(victim)
        if component.selected_id == variation_id:
            heir = component.variations[index - 1] if index > 0 else component.variations[index + 1]
            component.selected_id = heir.id
        del component.variations[index]
        self._touch()

    def edit_variation_text(self, component_id: str, variation_id: str,
                            new_text: str) -> None:
        self.component(component_id).variation(variation_id).text = new_text
        self._touch()

    def clone_variation(self, component_id: str, variation_id: str) -> str:
        """Duplicate a variation and select the copy (the prelude to editing
        it in place)."""
        component = self.component(component_id)
        source = component.variation(variation_id)
        copy = Variation(id=ids.new_id(), text=source.text,
                         origin=Origin.clone(source.id), created_at=ids.now_utc())
        component.variations.append(copy)
        component.selected_id = copy.id
        self._touch()
        return copy.id

    # --- plain text editing ----------------------------------------------------

    def insert_plain_text(self, block_id: str, offset: int, text: str) -> None:
        block = self.block(block_id)
        length = sum(_run_length(r) for r in block.runs)
        if not 0 <= offset <= length:
            raise OutOfBounds(f"offset {offset} outside block of length {length}")
        if not text:
            return
        pos = 0
        for i, run in enumerate(block.runs):
            if isinstance(run, TextRun):
                if pos <= offset <= pos + len(run.text):
                    local = offset - pos
                    run.text = run.text[:local] + text + run.text[local:]
                    block.runs = _normalize_runs(block.runs)
                    self._touch()
                    return
                pos += len(run.text)
            else:
                span_len = _run_length(run)
                if offset == pos:
                    # position between two components (or at block start)
                    block.runs.insert(i, TextRun(text))
                    block.runs = _normalize_runs(block.runs)
                    self._touch()
                    return
                if pos < offset < pos + span_len:
                    raise SpanCrossesComponent(
                        f"offset {offset} falls inside component {run.component.id}")
                pos += span_len
        block.runs.append(TextRun(text))
        block.runs = _normalize_runs(block.runs)
        self._touch()

    def assert_plain_position(self, block_id: str, offset: int) -> None:
        """Check that an offset is a legal plain-text position: inside the
        block and not strictly inside a component's extent."""
        block = self.block(block_id)
        length = sum(_run_length(r) for r in block.runs)
        if not 0 <= offset <= length:
            raise OutOfBounds(f"offset {offset} outside block of length {length}")
        pos = 0
        for run in block.runs:
            run_len = _run_length(run)
            if isinstance(run, ComponentRun) and pos < offset < pos + run_len:
                raise SpanCrossesComponent(
                    f"offset {offset} falls inside component {run.component.id}")
            pos += run_len

    def delete_plain_range(self, span: Span) -> None:
        block = self.block(span.block_id)
        run_index, local_start, local_end = self._locate_text_span(block, span)
        run = block.runs[run_index]
        assert isinstance(run, TextRun)
        run.text = run.text[:local_start] + run.text[local_end:]
        block.runs = _normalize_runs(block.runs)
        self._touch()

    def insert_block(self, index: int, text: str) -> str:
        if not 0 <= index <= len(self.blocks):
            raise OutOfBounds(f"block index {index} outside 0..{len(self.blocks)}")
        block = Block(id=ids.new_id(), runs=_normalize_runs([TextRun(text)]))
        self.blocks.insert(index, block)
        self._touch()
        return block.id

    def delete_block(self, block_id: str) -> None:
        block = self.block(block_id)
        if any(isinstance(r, ComponentRun) for r in block.runs):
            raise BlockHasComponents(
                f"block {block_id} still holds components; dissolve them first")
        self.blocks.remove(block)
        self._touch()

    # --- integrity ------------------------------------------------------------

    def validate(self) -> None:
        """Re-check every structural invariant; raises IntegrityError."""
        block_ids = [b.id for b in self.blocks]
        if len(block_ids) != len(set(block_ids)):
            raise IntegrityError(f"duplicate block ids in document {self.id}")
        seen_components: set[str] = set()
        for block in self.blocks:
            if not block.runs:
                raise IntegrityError(f"block {block.id} has zero runs")
            for i, run in enumerate(block.runs):
                if isinstance(run, TextRun):
                    if i > 0 and isinstance(block.runs[i - 1], TextRun):
                        raise IntegrityError(
                            f"block {block.id} has adjacent plain runs")
                    if not run.text and len(block.runs) > 1:
                        raise IntegrityError(
                            f"block {block.id} has a redundant empty plain run")
                else:
                    c = run.component
                    if c.id in seen_components:
                        raise IntegrityError(f"component {c.id} referenced twice")
                    seen_components.add(c.id)
                    self._validate_component(c)

    def _validate_component(self, c: VariationComponent) -> None:
        if not c.variations:
            raise IntegrityError(f"component {c.id} has no variations")
        variation_ids = [v.id for v in c.variations]
        if len(variation_ids) != len(set(variation_ids)):
            raise IntegrityError(f"duplicate variation ids in component {c.id}")
        if c.selected_id not in variation_ids:
            raise IntegrityError(
                f"component {c.id} selects missing variation {c.selected_id}")

    # --- internals -------------------------------------------------------------

    def _locate_text_span(self, block: Block, span: Span) -> tuple[int, int, int]:
        """Resolve a span to (run index, local start, local end) within a single
        plain run; spans may abut components but never intersect them."""
        length = sum(_run_length(r) for r in block.runs)
        if not 0 <= span.start <= span.end <= length:
            raise SpanOutOfBounds(
                f"span {span.start}..{span.end} outside block of length {length}")
        if span.start == span.end:
            raise EmptySpan(f"span at {span.start} selects nothing")
        pos = 0
        for i, run in enumerate(block.runs):
            run_len = _run_length(run)
            if isinstance(run, ComponentRun):
                if span.start < pos + run_len and span.end > pos:
                    raise SpanCrossesComponent(
                        f"span {span.start}..{span.end} intersects component "
                        f"{run.component.id}")
            elif pos <= span.start and span.end <= pos + run_len:
                return i, span.start - pos, span.end - pos
            pos += run_len
        # Normal form leaves no way to span two plain runs without crossing a
        # component; reaching here means the span straddled one.
        raise SpanCrossesComponent(
            f"span {span.start}..{span.end} does not fit a single plain run")

    def set_title(self, title: str) -> None:
        self.title = title
        self._touch()

    def _touch(self) -> None:
        self.updated_at = ids.now_utc()


def new_document(title: str) -> Document:
    now = ids.now_utc()
    block = Block(id=ids.new_id(), runs=[TextRun("")])
    return Document(id=ids.new_id(), title=title, blocks=[block],
                    created_at=now, updated_at=now)


def document_from_text(title: str, text: str) -> Document:
    """One line per block; at most one trailing newline is dropped so that
    export (flatten plus a trailing newline) round-trips byte-identically."""
    if text.endswith("\n"):
        text = text[:-1]
    now = ids.now_utc()
    blocks = [Block(id=ids.new_id(), runs=[TextRun(line)])
              for line in text.split("\n")]
    return Document(id=ids.new_id(), title=title, blocks=blocks,
                    created_at=now, updated_at=now)

"""Reified LLM instructions: a creation-ordered registry of prompt buttons.

Each button is a stored instruction plus a short editable label. Labels are
normally produced by a label provider (the LLM gateway); when the provider
fails, the prompt's own opening words stand in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Callable

from . import ids
from .errors import EmptyLabel, EmptyPrompt, LabelTooLong, UnknownButton

LABEL_MAX_CHARS = 32


def truncate_label(text: str, limit: int = LABEL_MAX_CHARS) -> str:
    """Fit text into the label budget, breaking at a word boundary when one
    exists inside the limit."""
    text = text.strip()
    if len(text) <= limit:
        return text
    head = text[:limit]
    cut = max(head.rfind(" "), head.rfind("\t"), head.rfind("\n"))
    if cut > 0:
        head = head[:cut]
    return head.rstrip()


def _valid_label(label: str) -> bool:
    return bool(label.strip()) and len(label) <= LABEL_MAX_CHARS


@dataclass
class PromptButton:
    id: str
    label: str
    prompt_text: str
    created_at: datetime
    use_count: int = 0


@dataclass
class ButtonRegistry:
    """Creation-ordered button store; order is stable under edits."""

    buttons: list[PromptButton] = field(default_factory=list)

    def get(self, button_id: str) -> PromptButton:
        for b in self.buttons:
            if b.id == button_id:
                return b
        raise UnknownButton(f"no button {button_id}")

    def create_button(self, prompt_text: str,
                      label_provider: Callable[[str], str]) -> PromptButton:
        """Store a new button. The label comes from label_provider; on any
        provider failure (or an out-of-contract result) the fallback is the
        first 32 characters of the prompt, cut at a word boundary."""
        prompt_text = prompt_text.strip()
        if not prompt_text:
            raise EmptyPrompt("prompt text is empty")
        try:
            label = label_provider(prompt_text)
        except Exception:
            label = truncate_label(prompt_text)
        if not _valid_label(label):
            label = truncate_label(prompt_text)
        button = PromptButton(id=ids.new_id(), label=label,
                              prompt_text=prompt_text, created_at=ids.now_utc())
        self.buttons.append(button)
        return button

    def edit_button(self, button_id: str, new_prompt: str | None = None,
                    new_label: str | None = None) -> None:
        button = self.get(button_id)
        if new_prompt is not None and not new_prompt.strip():
            raise EmptyPrompt("prompt text is empty")
        if new_label is not None:
            if len(new_label) > LABEL_MAX_CHARS:
                raise LabelTooLong(
                    f"label exceeds {LABEL_MAX_CHARS} characters: {new_label!r}")
            if not new_label.strip():
                raise EmptyLabel("label is empty")
        if new_prompt is not None:
            button.prompt_text = new_prompt.strip()
        if new_label is not None:
            button.label = new_label
        # Editing the prompt deliberately leaves the label alone; regeneration
        # is an explicit action via a fresh generate_label call.

    def delete_button(self, button_id: str) -> None:
        """Remove the button. Variations created by it keep its id in their
        origin; dangling provenance is expected."""
        self.buttons.remove(self.get(button_id))

    def list_buttons(self) -> list[PromptButton]:
        return list(self.buttons)

    def record_use(self, button_id: str) -> None:
        self.get(button_id).use_count += 1

"""Prompt assembly for the generation backends.

All template text lives here, behind a single version number. The rewrite
template wraps the target segment in sentinel tokens so the model knows
exactly which characters to transform; payload text that happens to contain
a sentinel is escaped by doubling it, and doubled tokens read back as one.
"""

from __future__ import annotations

TEMPLATE_VERSION = 1

SEG_BEGIN = "«SEG_BEGIN»"
SEG_END = "«SEG_END»"

VARIATION_SYSTEM = (
    "You rewrite text segments. The user supplies a segment delimited by "
    f"{SEG_BEGIN} and {SEG_END}, optional surrounding text, and an "
    "instruction. Apply the instruction to the delimited segment only. "
    "Respond with the rewritten segment and nothing else: no delimiters, "
    "no quotes, no commentary."
)

LABEL_SYSTEM = (
    "You name buttons. Given a writing instruction, respond with a short "
    "title-style label of at most 32 characters that captures it. Respond "
    "with the label only."
)

INSERT_SYSTEM = (
    "You write prose to be inserted into a document at a cursor position. "
    "The user supplies optional surrounding text and an instruction. "
    "Respond with the text to insert and nothing else."
)


def escape_sentinels(text: str) -> str:
    """Double every sentinel token so the payload cannot fake a delimiter."""
    return (text.replace(SEG_BEGIN, SEG_BEGIN + SEG_BEGIN)
                .replace(SEG_END, SEG_END + SEG_END))


def unescape_sentinels(text: str) -> str:
    return (text.replace(SEG_BEGIN + SEG_BEGIN, SEG_BEGIN)
                .replace(SEG_END + SEG_END, SEG_END))


def variation_messages(instruction: str, target_text: str,
                       context_before: str, context_after: str) -> list[dict[str, str]]:
    """System + user message pair for a segment rewrite. Context sections are
    omitted entirely when empty."""
    parts = []
    if context_before:
        parts.append(f"Text before the segment:\n{context_before}")
    parts.append(f"Segment to rewrite:\n{SEG_BEGIN}{escape_sentinels(target_text)}{SEG_END}")
    if context_after:
        parts.append(f"Text after the segment:\n{context_after}")
    parts.append(f"Instruction: {instruction}")
    return [
        {"role": "system", "content": VARIATION_SYSTEM},
        {"role": "user", "content": "\n\n".join(parts)},
    ]


def label_messages(prompt_text: str) -> list[dict[str, str]]:
    return [
        {"role": "system", "content": LABEL_SYSTEM},
        {"role": "user", "content": f"Instruction: {prompt_text}"},
    ]


def insert_messages(instruction: str, context_before: str,
                    context_after: str) -> list[dict[str, str]]:
    parts = []
    if context_before:
        parts.append(f"Text before the cursor:\n{context_before}")
    if context_after:
        parts.append(f"Text after the cursor:\n{context_after}")
    parts.append(f"Instruction: {instruction}")
    return [
        {"role": "system", "content": INSERT_SYSTEM},
        {"role": "user", "content": "\n\n".join(parts)},
    ]


def strip_echoed_sentinels(text: str) -> str:
    """Models sometimes echo the delimiters around their answer; peel them
    off and collapse any escaped tokens back to their literal form."""
    text = text.strip()
    changed = True
    while changed:
        changed = False
        for token in (SEG_BEGIN, SEG_END):
            if text.startswith(token):
                text = text[len(token):].lstrip()
                changed = True
            if text.endswith(token):
                text = text[:-len(token)].rstrip()
                changed = True
    return unescape_sentinels(text)

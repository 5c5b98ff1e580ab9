"""Error hierarchy shared across the engine.

Every error carries a stable machine ``code`` so the HTTP layer and the
CLI can map failures without string-matching messages.
"""

from __future__ import annotations


class AbscribeError(Exception):
    """Base for all domain errors raised by this package."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- document model ---------------------------------------------------------

class UnknownDocument(AbscribeError):
    code = "unknown_document"


class UnknownBlock(AbscribeError):
    code = "unknown_block"


class UnknownComponent(AbscribeError):
    code = "unknown_component"


class UnknownVariation(AbscribeError):
    code = "unknown_variation"


class SpanOutOfBounds(AbscribeError):
    code = "span_out_of_bounds"


class SpanCrossesComponent(AbscribeError):
    code = "span_crosses_component"


class EmptySpan(AbscribeError):
    code = "empty_span"


class LastVariation(AbscribeError):
    code = "last_variation"


class BlockHasComponents(AbscribeError):
    code = "block_has_components"


class OutOfBounds(AbscribeError):
    code = "out_of_bounds"


# --- prompt registry ---------------------------------------------------------

class UnknownButton(AbscribeError):
    code = "unknown_button"


class EmptyPrompt(AbscribeError):
    code = "empty_prompt"


class EmptyLabel(AbscribeError):
    code = "empty_label"


class LabelTooLong(AbscribeError):
    code = "label_too_long"


# --- llm gateway -------------------------------------------------------------

class BackendError(AbscribeError):
    code = "backend_error"

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


class BackendTimeout(AbscribeError):
    code = "backend_timeout"


class EmptyCompletion(AbscribeError):
    code = "empty_completion"


class EmptyTarget(AbscribeError):
    code = "empty_target"


# --- persistence -------------------------------------------------------------

class StoreIoError(AbscribeError):
    code = "io_error"


class ParseError(AbscribeError):
    code = "parse_error"

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


class UnsupportedVersion(AbscribeError):
    code = "unsupported_version"

    def __init__(self, found: object):
        super().__init__(f"unsupported workspace format_version: {found!r}")
        self.found = found


class IntegrityError(AbscribeError):
    code = "integrity_error"


class WorkspaceLocked(AbscribeError):
    code = "workspace_locked"


# --- service -----------------------------------------------------------------

class UnknownInsert(AbscribeError):
    code = "unknown_insert"


class AnchorLost(AbscribeError):
    code = "anchor_lost"


class InsertNotComplete(AbscribeError):
    code = "insert_not_complete"

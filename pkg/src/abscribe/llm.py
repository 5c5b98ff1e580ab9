"""Pluggable text-generation gateway.

Two backends speak the same interface: an HTTP client for any
chat-completion API (configured entirely through environment/flags) and a
deterministic offline mock used by the test suite. The gateway never sees
document objects; callers hand it assembled context strings, so it cannot
mutate draft state.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterator

import httpx

from . import prompts
from .errors import (
    BackendError,
    BackendTimeout,
    EmptyCompletion,
    EmptyPrompt,
    EmptyTarget,
    UnknownInsert,
)
from .registry import truncate_label

MOCK_CHUNK_CHARS = 4
LABEL_TEMPERATURE = 0.0


class RequestKind(str, Enum):
    VARIATION = "variation"
    LABEL = "label"
    INSERT = "insert"


@dataclass
class GenerationRequest:
    kind: RequestKind
    instruction: str
    target_text: str = ""
    context_before: str = ""
    context_after: str = ""
    request_id: str = field(default_factory=lambda: str(uuid.uuid4()))


@dataclass
class ModelConfig:
    backend: str = "mock"
    model_name: str = "gpt-4"
    temperature: float = 0.7
    max_output_tokens: int = 1024
    timeout: float = 30.0
    api_base_url: str = ""
    api_key: str = ""

    def __post_init__(self):
        if self.backend not in ("real", "mock"):
            raise ValueError(f"backend must be 'real' or 'mock', got {self.backend!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature {self.temperature} outside [0, 2]")
        if self.max_output_tokens < 1:
            raise ValueError("max_output_tokens must be positive")
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")

    @classmethod
    def from_env(cls, environ, backend: str | None = None) -> "ModelConfig":
        return cls(
            backend=backend or environ.get("LLM_BACKEND", "mock"),
            model_name=environ.get("LLM_MODEL", "gpt-4"),
            api_base_url=environ.get("LLM_API_BASE_URL", ""),
            api_key=environ.get("LLM_API_KEY", ""),
        )


class InsertState(str, Enum):
    STREAMING = "streaming"
    COMPLETE = "complete"
    FAILED = "failed"
    CANCELLED = "cancelled"


class PendingInsert:
    """One in-flight streamed insertion.

    accumulated_text only grows while streaming, and the state moves from
    STREAMING to exactly one terminal state. Token delivery and state
    transitions share one reentrant lock, so after cancel() returns the sink
    sees no further events (cancelling from inside the sink is allowed).
    """

    def __init__(self, insert_id: str, document_id: str, anchor: tuple[str, int],
                 prompt_text: str,
                 sink: Callable[[str], None] | None = None,
                 on_terminal: Callable[["PendingInsert"], None] | None = None):
        self.id = insert_id
        self.document_id = document_id
        self.anchor = anchor
        self.prompt_text = prompt_text
        self.accumulated_text = ""
        self.state = InsertState.STREAMING
        self.failure_reason: str | None = None
        self._sink = sink
        self._on_terminal = on_terminal
        self._lock = threading.RLock()
        self._done = threading.Condition(self._lock)

    @property
    def is_terminal(self) -> bool:
        return self.state is not InsertState.STREAMING

    def wait(self, timeout: float | None = None) -> bool:
        """Block until a terminal state is reached; True on arrival."""
        with self._done:
            return self._done.wait_for(lambda: self.is_terminal, timeout)

    def cancel(self) -> None:
        """Idempotent; keeps whatever text already arrived. A state that is
        already terminal wins."""
        self._finish(InsertState.CANCELLED)

    def _deliver(self, chunk: str) -> bool:
        with self._lock:
            if self.is_terminal:
                return False
            self.accumulated_text += chunk
            if self._sink is not None:
                self._sink(chunk)
            return True

    def _finish(self, state: InsertState, reason: str | None = None) -> bool:
        with self._lock:
            if self.is_terminal:
                return False
            self.state = state
            self.failure_reason = reason
            self._done.notify_all()
            if self._on_terminal is not None:
                self._on_terminal(self)
            return True


class MockBackend:
    """Deterministic offline backend.

    Rules: a variation request yields ``MOCK[instruction]{target}``, a label
    request yields the prompt's first three words title-cased, and an insert
    request yields ``MOCK-INSERT[prompt]`` streamed in 4-character chunks.
    """

    def complete(self, request: GenerationRequest, config: ModelConfig) -> str:
        if request.kind is RequestKind.VARIATION:
            return f"MOCK[{request.instruction}]{{{request.target_text}}}"
        if request.kind is RequestKind.LABEL:
            words = request.instruction.split()[:3]
            return truncate_label(" ".join(w.capitalize() for w in words))
        return f"MOCK-INSERT[{request.instruction}]"

    def stream(self, request: GenerationRequest, config: ModelConfig) -> Iterator[str]:
        full = self.complete(request, config)
        for i in range(0, len(full), MOCK_CHUNK_CHARS):
            yield full[i:i + MOCK_CHUNK_CHARS]


class HttpBackend:
    """Chat-completion HTTP backend (OpenAI-style wire format)."""

    def __init__(self, transport: httpx.BaseTransport | None = None):
        self._transport = transport

    def _client(self, config: ModelConfig) -> httpx.Client:
        if not config.api_base_url:
            raise BackendError(0, "no API base URL configured (LLM_API_BASE_URL)")
        headers = {}
        if config.api_key:
            headers["Authorization"] = f"Bearer {config.api_key}"
        return httpx.Client(base_url=config.api_base_url, headers=headers,
                            timeout=config.timeout, transport=self._transport)

    def _payload(self, request: GenerationRequest, config: ModelConfig,
                 stream: bool) -> dict:
        return {
            "model": config.model_name,
            "messages": render_messages(request),
            "temperature": config.temperature,
            "max_tokens": config.max_output_tokens,
            "stream": stream,
        }

    def complete(self, request: GenerationRequest, config: ModelConfig) -> str:
        try:
            with self._client(config) as client:
                response = client.post("/chat/completions",
                                       json=self._payload(request, config, False))
        except httpx.TimeoutException as exc:
            raise BackendTimeout(f"backend timed out after {config.timeout}s") from exc
        except httpx.HTTPError as exc:
            raise BackendError(0, f"connection failed: {exc}") from exc
        if response.status_code != 200:
            raise BackendError(response.status_code, _error_detail(response))
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, json.JSONDecodeError) as exc:
            raise BackendError(200, f"malformed completion response: {exc}") from exc
        return content or ""

    def stream(self, request: GenerationRequest, config: ModelConfig) -> Iterator[str]:
        try:
            with self._client(config) as client:
                with client.stream("POST", "/chat/completions",
                                   json=self._payload(request, config, True)) as response:
                    if response.status_code != 200:
                        response.read()
                        raise BackendError(response.status_code, _error_detail(response))
                    for line in response.iter_lines():
                        if not line.startswith("data:"):
                            continue
                        payload = line[len("data:"):].strip()
                        if payload == "[DONE]":
                            return
                        try:
                            delta = json.loads(payload)["choices"][0]["delta"]
                        except (KeyError, IndexError, TypeError,
                                json.JSONDecodeError) as exc:
                            raise BackendError(200, f"malformed stream chunk: {exc}") from exc
                        piece = delta.get("content")
                        if piece:
                            yield piece
        except httpx.TimeoutException as exc:
            raise BackendTimeout(f"backend timed out after {config.timeout}s") from exc
        except httpx.HTTPError as exc:
            raise BackendError(0, f"connection closed: {exc}") from exc


def _error_detail(response: httpx.Response) -> str:
    try:
        return response.json()["error"]["message"]
    except Exception:
        return response.text[:200] or f"HTTP {response.status_code}"


def render_messages(request: GenerationRequest) -> list[dict[str, str]]:
    if request.kind is RequestKind.VARIATION:
        return prompts.variation_messages(request.instruction, request.target_text,
                                          request.context_before, request.context_after)
    if request.kind is RequestKind.LABEL:
        return prompts.label_messages(request.instruction)
    return prompts.insert_messages(request.instruction, request.context_before,
                                   request.context_after)


def build_variation_prompt(request: GenerationRequest) -> list[dict[str, str]]:
    """Render the system + user message pair for a segment rewrite."""
    if request.kind is not RequestKind.VARIATION:
        raise ValueError("build_variation_prompt requires a variation request")
    return render_messages(request)


def make_backend(config: ModelConfig):
    return MockBackend() if config.backend == "mock" else HttpBackend()


_QUOTE_PAIRS = {'"': '"', "'": "'", "“": "”", "‘": "’"}


def _strip_quotes(text: str) -> str:
    while len(text) >= 2 and _QUOTE_PAIRS.get(text[0]) == text[-1]:
        text = text[1:-1].strip()
    return text


class Gateway:
    """Front door for all generation calls; owns the pending-insert table."""

    def __init__(self, config: ModelConfig, backend=None):
        self.config = config
        self.backend = backend if backend is not None else make_backend(config)
        self._inserts: dict[str, PendingInsert] = {}
        self._inserts_lock = threading.Lock()

    # --- one-shot generation ---------------------------------------------------

    def generate_variation(self, request: GenerationRequest,
                           config: ModelConfig | None = None) -> str:
        if request.kind is not RequestKind.VARIATION:
            raise ValueError("generate_variation requires a variation request")
        if not request.target_text:
            raise EmptyTarget("variation request has an empty target segment")
        raw = self.backend.complete(request, config or self.config)
        text = prompts.strip_echoed_sentinels(raw)
        if not text:
            raise EmptyCompletion("backend returned no usable text")
        return text

    def generate_label(self, prompt_text: str,
                       config: ModelConfig | None = None) -> str:
        if not prompt_text.strip():
            raise EmptyPrompt("prompt text is empty")
        config = replace(config or self.config, temperature=LABEL_TEMPERATURE)
        request = GenerationRequest(kind=RequestKind.LABEL, instruction=prompt_text)
        raw = self.backend.complete(request, config)
        label = truncate_label(_strip_quotes(raw.strip()))
        if not label:
            raise EmptyCompletion("backend returned an empty label")
        return label

    # --- streamed insertion ------------------------------------------------------

    def start_insert(self, context_before: str, context_after: str,
                     prompt_text: str,
                     config: ModelConfig | None = None,
                     sink: Callable[[str], None] | None = None,
                     document_id: str = "",
                     anchor: tuple[str, int] = ("", 0),
                     on_terminal: Callable[[PendingInsert], None] | None = None,
                     ) -> PendingInsert:
        """Kick off a streamed generation; tokens flow to the sink in arrival
        order from a worker thread. Backend failures end as state FAILED with
        the partial text retained, never as a lost stream."""
        if not prompt_text.strip():
            raise EmptyPrompt("prompt text is empty")
        request = GenerationRequest(kind=RequestKind.INSERT, instruction=prompt_text,
                                    context_before=context_before,
                                    context_after=context_after)
        insert = PendingInsert(insert_id=str(uuid.uuid4()), document_id=document_id,
                               anchor=anchor, prompt_text=prompt_text,
                               sink=sink, on_terminal=on_terminal)
        with self._inserts_lock:
            self._inserts[insert.id] = insert
        worker = threading.Thread(
            target=self._pump, args=(insert, request, config or self.config),
            name=f"abscribe-insert-{insert.id[:8]}", daemon=True)
        worker.start()
        return insert

    def _pump(self, insert: PendingInsert, request: GenerationRequest,
              config: ModelConfig) -> None:
        try:
            for chunk in self.backend.stream(request, config):
                if not insert._deliver(chunk):
                    return
            insert._finish(InsertState.COMPLETE)
        except BackendTimeout as exc:
            insert._finish(InsertState.FAILED, str(exc))
        except BackendError as exc:
            insert._finish(InsertState.FAILED, exc.message)
        except Exception as exc:  # defensive: a stream must always terminate
            insert._finish(InsertState.FAILED, f"unexpected failure: {exc}")

    def get_insert(self, insert_id: str) -> PendingInsert:
        with self._inserts_lock:
            insert = self._inserts.get(insert_id)
        if insert is None:
            raise UnknownInsert(f"no pending insert {insert_id}")
        return insert

    def cancel_insert(self, insert_id: str) -> None:
        self.get_insert(insert_id).cancel()

    def release_insert(self, insert_id: str) -> None:
        """Forget a resolved insert (cancelling it if still streaming)."""
        with self._inserts_lock:
            insert = self._inserts.pop(insert_id, None)
        if insert is not None:
            insert.cancel()

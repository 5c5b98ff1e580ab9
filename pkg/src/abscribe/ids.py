"""Id and clock source for persisted entities.

Ids are UUIDv4 strings and timestamps are UTC at millisecond precision.
Both are routed through this module so scripted replays (e.g. the CLI/API
differential test) can be made deterministic: call :func:`configure` with a
seed, or set ``ABSCRIBE_TEST_SEED`` before the first id is drawn. In
deterministic mode the clock is frozen, because creation order is tracked
by list position rather than by timestamp.
"""

from __future__ import annotations

import os
import random
import uuid
from datetime import datetime, timezone

_rng: random.Random | None = None
_frozen_now: datetime | None = None

_FROZEN_EPOCH = datetime(2024, 1, 1, tzinfo=timezone.utc)


def configure(seed: int | None) -> None:
    """Switch to seeded ids and a frozen clock; ``None`` restores defaults."""
    global _rng, _frozen_now
    if seed is None:
        _rng = None
        _frozen_now = None
    else:
        _rng = random.Random(seed)
        _frozen_now = _FROZEN_EPOCH


def _init_from_env() -> None:
    seed = os.environ.get("ABSCRIBE_TEST_SEED")
    if seed is not None:
        configure(int(seed))


_init_from_env()


def new_id() -> str:
    if _rng is not None:
        return str(uuid.UUID(int=_rng.getrandbits(128), version=4))
    return str(uuid.uuid4())


def now_utc() -> datetime:
    """Current UTC time truncated to millisecond precision."""
    if _frozen_now is not None:
        return _frozen_now
    now = datetime.now(timezone.utc)
    return now.replace(microsecond=now.microsecond // 1000 * 1000)


def format_timestamp(dt: datetime) -> str:
    """RFC 3339 with millisecond precision and a Z suffix."""
    return f"{dt:%Y-%m-%dT%H:%M:%S}.{dt.microsecond // 1000:03d}Z"


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp; accepts Z or numeric offsets."""
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp missing timezone: {text!r}")
    return dt.astimezone(timezone.utc)

"""Polling sources and the append loop feeding the snapshot store.

A source is anything with a ``poll()`` returning the next batch of
snapshots (or None when exhausted) and a ``realtime`` flag telling the
loop whether to sleep between polls.  Replay and synthetic sources are
finite and run flat out; the HTTP adapter polls forever on the
configured interval.  Appends are at-least-once: duplicate deliveries
are absorbed by the store's (site_id, timestamp) de-duplication.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Callable, Mapping, Protocol

import httpx

from .errors import ConfigError, SourceError
from .store import OccupancySnapshot, SnapshotStore, parse_snapshot
from .synthetic import OccupancyModel

log = logging.getLogger(__name__)

SOURCE_KINDS = ("file_replay", "synthetic", "http_adapter")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_s: float = 0.5

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        if self.backoff_s < 0:
            raise ValueError("backoff_s must be >= 0")


@dataclass(frozen=True)
class SourceConfig:
    """Declarative source description (JSON-friendly)."""

    kind: str
    poll_interval_s: float = 300.0
    retry: RetryPolicy = RetryPolicy()
    path: str | None = None                      # file_replay
    url: str | None = None                       # http_adapter
    headers: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SOURCE_KINDS:
            raise ValueError(f"kind must be one of {SOURCE_KINDS}, got {self.kind!r}")
        if self.poll_interval_s <= 0:
            raise ValueError("poll_interval_s must be positive")


class SnapshotSource(Protocol):
    realtime: bool

    def poll(self) -> list[OccupancySnapshot] | None:
        """Next batch, or None when the source is exhausted."""


class FileReplaySource:
    """Replays an NDJSON snapshot file in fixed-size batches."""

    realtime = False

    def __init__(self, path: str | Path, batch_size: int = 1000):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.path = Path(path)
        if not self.path.exists():
            raise ConfigError(f"replay file not found: {self.path}")
        self.batch_size = batch_size
        self._lines: list[str] | None = None
        self._pos = 0

    def poll(self) -> list[OccupancySnapshot] | None:
        if self._lines is None:
            self._lines = [
                line for line in self.path.read_text(encoding="utf-8").splitlines() if line.strip()
            ]
        if self._pos >= len(self._lines):
            return None
        chunk = self._lines[self._pos : self._pos + self.batch_size]
        start = self._pos
        self._pos += len(chunk)
        batch = []
        for offset, line in enumerate(chunk):
            try:
                batch.append(parse_snapshot(line))
            except ValueError as exc:
                raise SourceError(f"{self.path}:{start + offset + 1}: {exc}") from exc
        return batch


class SyntheticSource:
    """Emits one generated batch (all sites) per cadence tick."""

    realtime = False

    def __init__(self, model: OccupancyModel, start: datetime, end: datetime, interval_s: float = 300.0):
        self._batches = iter(
            _chunk_by_timestamp(model.generate(start, end, interval_s))
        )

    def poll(self) -> list[OccupancySnapshot] | None:
        return next(self._batches, None)


def _chunk_by_timestamp(snapshots: list[OccupancySnapshot]) -> list[list[OccupancySnapshot]]:
    chunks: list[list[OccupancySnapshot]] = []
    for s in snapshots:
        if chunks and chunks[-1][0].ts == s.ts:
            chunks[-1].append(s)
        else:
            chunks.append([s])
    return chunks


class HttpSource:
    """Polls a URL returning NDJSON (or a JSON array) of snapshots."""

    realtime = True

    def __init__(self, url: str, headers: Mapping[str, str] | None = None, client: httpx.Client | None = None):
        self.url = url
        self.headers = dict(headers or {})
        self._client = client or httpx.Client(timeout=30.0)

    def poll(self) -> list[OccupancySnapshot]:
        try:
            response = self._client.get(self.url, headers=self.headers)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise SourceError(f"GET {self.url} failed: {exc}") from exc
        body = response.text.strip()
        if not body:
            return []
        try:
            if body.startswith("["):
                records = json.loads(body)
                return [parse_snapshot(json.dumps(r)) for r in records]
            return [parse_snapshot(line) for line in body.splitlines() if line.strip()]
        except ValueError as exc:
            raise SourceError(f"GET {self.url}: {exc}") from exc


def make_source(config: SourceConfig, model: OccupancyModel | None = None,
                start: datetime | None = None, end: datetime | None = None) -> SnapshotSource:
    if config.kind == "file_replay":
        if config.path is None:
            raise ConfigError("file_replay source requires a path")
        return FileReplaySource(config.path)
    if config.kind == "http_adapter":
        if config.url is None:
            raise ConfigError("http_adapter source requires a url")
        return HttpSource(config.url, config.headers)
    if model is None or start is None or end is None:
        raise ConfigError("synthetic source requires a model and a time range")
    return SyntheticSource(model, start, end, config.poll_interval_s)


@dataclass
class IngestStats:
    batches: int = 0
    appended: int = 0
    duplicates: int = 0


def poll_and_append(
    source: SnapshotSource,
    store: SnapshotStore,
    retry: RetryPolicy = RetryPolicy(),
    poll_interval_s: float = 300.0,
    max_batches: int | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> IngestStats:
    """Poll the source and append every batch until it is exhausted.

    Transient poll failures are logged and retried with linear backoff;
    a failure persisting past the retry budget is permanent and raised
    as ``SourceError`` (the CLI exits nonzero).  Finite sources run flat
    out; realtime sources sleep ``poll_interval_s`` between polls.
    """
    stats = IngestStats()
    failures = 0
    while max_batches is None or stats.batches < max_batches:
        try:
            batch = source.poll()
        except SourceError as exc:
            failures += 1
            if failures >= retry.max_attempts:
                raise SourceError(
                    f"source failed permanently after {failures} attempts: {exc}"
                ) from exc
            log.warning("poll failed (attempt %d/%d): %s", failures, retry.max_attempts, exc)
            sleep(retry.backoff_s * failures)
            continue
        failures = 0
        if batch is None:
            break
        new = store.append_many(batch)
        stats.batches += 1
        stats.appended += new
        stats.duplicates += len(batch) - new
        if source.realtime:
            sleep(poll_interval_s)
    return stats

"""Occupancy snapshots, supply estimation, and the append-only store.

A snapshot is one facility's patient counts (in charge and waiting,
split by triage code) at one UTC instant, serialized as one NDJSON
line.  The store appends snapshots to segment files with a sidecar
index, de-duplicates on (site_id, timestamp), and serves time-window
queries with an optional wall-clock slot filter.

Supply per facility is the headroom between its estimated maximum
capacity (running max of non-critical in-charge totals over the stored
series) and its current non-critical load. Red-code patients are
excluded: their destination choice is not driven by accessibility.
"""

from __future__ import annotations

import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence
from zoneinfo import ZoneInfo

from .errors import DataError

TRIAGE_CODES = ("white", "green", "yellow", "red")
NON_CRITICAL_CODES = ("white", "green", "yellow")
DEFAULT_TIMEZONE = "Europe/Rome"


def parse_rfc3339(raw: str) -> datetime:
    """Parse an RFC 3339 timestamp to an aware UTC datetime."""
    try:
        ts = datetime.fromisoformat(raw.replace("Z", "+00:00").replace("z", "+00:00"))
    except (ValueError, AttributeError, TypeError) as exc:
        raise ValueError(f"ts: unparseable timestamp {raw!r}") from exc
    if ts.tzinfo is None:
        raise ValueError(f"ts: timestamp {raw!r} lacks a UTC offset")
    return ts.astimezone(timezone.utc)


def format_rfc3339(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _parse_counts(obj, field: str) -> dict[str, int]:
    if obj is None:
        obj = {}
    if not isinstance(obj, Mapping):
        raise ValueError(f"{field}: expected an object of triage counts")
    counts = dict.fromkeys(TRIAGE_CODES, 0)
    for code, value in obj.items():
        if code not in TRIAGE_CODES:
            raise ValueError(f"{field}.{code}: unknown triage code")
        if not isinstance(value, int) or isinstance(value, bool):
            raise ValueError(f"{field}.{code}: count must be an integer")
        if value < 0:
            raise ValueError(f"{field}.{code}: count must be >= 0")
        counts[code] = value
    return counts


@dataclass(frozen=True)
class OccupancySnapshot:
    """One facility's triage-coded occupancy at one UTC instant."""

    site_id: str
    ts: datetime
    in_charge: Mapping[str, int]
    waiting: Mapping[str, int]

    def __post_init__(self):
        if not self.site_id:
            raise ValueError("site_id: must be non-empty")
        if self.ts.tzinfo is None:
            raise ValueError("ts: must be timezone-aware")
        object.__setattr__(self, "ts", self.ts.astimezone(timezone.utc))
        object.__setattr__(self, "in_charge", _parse_counts(self.in_charge, "in_charge"))
        object.__setattr__(self, "waiting", _parse_counts(self.waiting, "waiting"))

    def key(self) -> tuple[str, str]:
        return (self.site_id, format_rfc3339(self.ts))

    def in_charge_total(self, codes: Sequence[str] = NON_CRITICAL_CODES) -> int:
        return sum(self.in_charge[c] for c in codes)

    def waiting_total(self, codes: Sequence[str] = NON_CRITICAL_CODES) -> int:
        return sum(self.waiting[c] for c in codes)


def parse_snapshot(line: str) -> OccupancySnapshot:
    """Parse one NDJSON line into a snapshot; absent triage codes default to 0."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ValueError("malformed JSON: expected an object")
    site_id = obj.get("site_id")
    if not isinstance(site_id, str) or not site_id:
        raise ValueError("site_id: must be a non-empty string")
    raw_ts = obj.get("ts")
    if not isinstance(raw_ts, str):
        raise ValueError("ts: must be an RFC 3339 string")
    return OccupancySnapshot(
        site_id=site_id,
        ts=parse_rfc3339(raw_ts),
        in_charge=_parse_counts(obj.get("in_charge"), "in_charge"),
        waiting=_parse_counts(obj.get("waiting"), "waiting"),
    )


def serialize_snapshot(snapshot: OccupancySnapshot) -> str:
    """One compact NDJSON line (no trailing newline); zero counts are kept."""
    return json.dumps(
        {
            "site_id": snapshot.site_id,
            "ts": format_rfc3339(snapshot.ts),
            "in_charge": dict(snapshot.in_charge),
            "waiting": dict(snapshot.waiting),
        },
        sort_keys=True,
        separators=(",", ":"),
    )


@dataclass(frozen=True)
class FacilitySeries:
    """One facility's snapshots in timestamp order."""

    site_id: str
    snapshots: tuple[OccupancySnapshot, ...]

    def __post_init__(self):
        for s in self.snapshots:
            if s.site_id != self.site_id:
                raise ValueError(f"snapshot for {s.site_id!r} in series {self.site_id!r}")
        ordered = tuple(sorted(self.snapshots, key=lambda s: s.ts))
        object.__setattr__(self, "snapshots", ordered)

    def __len__(self) -> int:
        return len(self.snapshots)

    @cached_property
    def max_capacity(self) -> int:
        return estimate_capacity(self)


def estimate_capacity(
    series: FacilitySeries,
    codes: Sequence[str] = NON_CRITICAL_CODES,
    include_waiting: bool = False,
) -> int:
    """Peak concurrent load over the series, restricted to the given codes.

    The running maximum of in-charge totals stands in for the facility's
    bed capacity; waiting patients are excluded unless requested.
    """
    if len(series) == 0:
        raise DataError(f"site {series.site_id!r}: cannot estimate capacity of an empty series")
    totals = (
        s.in_charge_total(codes) + (s.waiting_total(codes) if include_waiting else 0)
        for s in series.snapshots
    )
    return max(totals)


def current_supply(
    snapshot: OccupancySnapshot,
    capacity: int,
    codes: Sequence[str] = NON_CRITICAL_CODES,
) -> int:
    """Available supply: capacity minus current load, clamped at 0.

    The clamp covers mid-stream moments where the current load exceeds
    the capacity estimated from the data seen so far.
    """
    if capacity < 0:
        raise ValueError("capacity must be >= 0")
    return max(0, capacity - snapshot.in_charge_total(codes))


class SnapshotStore:
    """Append-only NDJSON segment store with idempotent appends.

    One snapshot per line across numbered segment files, plus a sidecar
    ``index.json`` with per-segment time ranges for query pruning.
    Appends de-duplicate on (site_id, timestamp) and enforce per-site
    monotone non-decreasing timestamps; nothing is ever rewritten.
    """

    INDEX_NAME = "index.json"

    def __init__(self, root: str | Path, segment_max_records: int = 100_000):
        if segment_max_records < 1:
            raise ValueError("segment_max_records must be >= 1")
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.segment_max_records = segment_max_records
        self._segments: list[dict] = []
        self._keys: set[tuple[str, str]] = set()
        # In-memory read view: per-site snapshots in timestamp order
        # (monotone appends keep them sorted).  Single writer, readers
        # see a consistent prefix.
        self._by_site: dict[str, list[OccupancySnapshot]] = {}
        self._load()

    # -- persistence ------------------------------------------------------

    def _index_path(self) -> Path:
        return self.root / self.INDEX_NAME

    def _load(self) -> None:
        index_path = self._index_path()
        if index_path.exists():
            self._segments = json.loads(index_path.read_text(encoding="utf-8"))["segments"]
        else:
            self._segments = [
                {"name": p.name, "count": None, "min_ts": None, "max_ts": None}
                for p in sorted(self.root.glob("segment-*.ndjson"))
            ]
        for seg in self._segments:
            for snapshot in self._scan_segment(self.root / seg["name"]):
                self._keys.add(snapshot.key())
                self._by_site.setdefault(snapshot.site_id, []).append(snapshot)
        for snapshots in self._by_site.values():
            snapshots.sort(key=lambda s: s.ts)

    @staticmethod
    def _scan_segment(path: Path) -> Iterator[OccupancySnapshot]:
        if not path.exists():
            return
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    yield parse_snapshot(line)
                except ValueError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc

    def _write_index(self) -> None:
        self._index_path().write_text(
            json.dumps({"segments": self._segments}, sort_keys=True, indent=1) + "\n",
            encoding="utf-8",
        )

    def _open_segment(self) -> dict:
        if self._segments and (self._segments[-1]["count"] or 0) < self.segment_max_records:
            return self._segments[-1]
        seg = {
            "name": f"segment-{len(self._segments) + 1:05d}.ndjson",
            "count": 0,
            "min_ts": None,
            "max_ts": None,
        }
        self._segments.append(seg)
        return seg

    # -- writes -----------------------------------------------------------

    def append(self, snapshot: OccupancySnapshot) -> bool:
        """Append one snapshot; returns False for an exact duplicate."""
        return self.append_many([snapshot]) == 1

    def append_many(self, snapshots: Iterable[OccupancySnapshot]) -> int:
        """Append a batch, skipping exact duplicates; returns the new-record count.

        The sidecar index is rewritten once per batch.
        """
        appended = 0
        fh = None
        seg = None
        try:
            for snapshot in snapshots:
                key = snapshot.key()
                if key in self._keys:
                    continue
                site_snaps = self._by_site.setdefault(snapshot.site_id, [])
                if site_snaps and snapshot.ts < site_snaps[-1].ts:
                    raise DataError(
                        f"site {snapshot.site_id!r}: out-of-order timestamp "
                        f"{format_rfc3339(snapshot.ts)} < {format_rfc3339(site_snaps[-1].ts)}"
                    )
                next_seg = self._open_segment()
                if seg is not next_seg:
                    if fh is not None:
                        fh.close()
                    seg = next_seg
                    fh = (self.root / seg["name"]).open("a", encoding="utf-8")
                fh.write(serialize_snapshot(snapshot) + "\n")
                iso = format_rfc3339(snapshot.ts)
                seg["count"] = (seg["count"] or 0) + 1
                seg["min_ts"] = iso if seg["min_ts"] is None else min(seg["min_ts"], iso)
                seg["max_ts"] = iso if seg["max_ts"] is None else max(seg["max_ts"], iso)
                self._keys.add(key)
                site_snaps.append(snapshot)
                appended += 1
        finally:
            if fh is not None:
                fh.close()
            if appended:
                self._write_index()
        return appended

    # -- reads ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._keys)

    def site_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._by_site))

    def query_window(
        self,
        start: datetime,
        end: datetime,
        site_ids: Sequence[str] | None = None,
        slot_hours: tuple[int, int] | None = None,
        tz: str = DEFAULT_TIMEZONE,
    ) -> list[OccupancySnapshot]:
        """Snapshots with start <= ts < end, optionally filtered.

        ``slot_hours`` (h0, h1) keeps snapshots whose wall-clock hour in
        ``tz`` satisfies h0 <= hour < h1.  Results are ordered by
        (timestamp, site_id).
        """
        if start.tzinfo is None or end.tzinfo is None:
            raise ValueError("start and end must be timezone-aware")
        if start > end:
            raise ValueError("start must be <= end")
        if slot_hours is not None:
            h0, h1 = slot_hours
            if not (0 <= h0 < h1 <= 24):
                raise ValueError(f"slot_hours must satisfy 0 <= h0 < h1 <= 24, got {slot_hours}")
        zone = ZoneInfo(tz)
        wanted = set(site_ids) if site_ids is not None else None

        out = []
        for site_id, snapshots in self._by_site.items():
            if wanted is not None and site_id not in wanted:
                continue
            lo = bisect_left(snapshots, start, key=lambda s: s.ts)
            hi = bisect_left(snapshots, end, key=lambda s: s.ts)
            for s in snapshots[lo:hi]:
                if slot_hours is not None:
                    hour = s.ts.astimezone(zone).hour
                    if not slot_hours[0] <= hour < slot_hours[1]:
                        continue
                out.append(s)
        out.sort(key=lambda s: (s.ts, s.site_id))
        return out

    def series(self, site_id: str) -> FacilitySeries:
        return FacilitySeries(site_id=site_id, snapshots=tuple(self._by_site.get(site_id, ())))

    def latest_at(self, site_id: str, at: datetime) -> OccupancySnapshot | None:
        """Most recent snapshot for a site at or before ``at``."""
        if at.tzinfo is None:
            raise ValueError("at must be timezone-aware")
        snapshots = self._by_site.get(site_id, ())
        idx = bisect_right(snapshots, at.astimezone(timezone.utc), key=lambda s: s.ts)
        return snapshots[idx - 1] if idx else None

from datetime import datetime, timedelta, timezone

import httpx
import pytest

from argrid.errors import ConfigError, SourceError
from argrid.ingest import (
    FileReplaySource,
    HttpSource,
    RetryPolicy,
    SourceConfig,
    SyntheticSource,
    make_source,
    poll_and_append,
)
from argrid.store import SnapshotStore, serialize_snapshot
from argrid.synthetic import OccupancyModel, SiteLoadProfile

from .test_store import snap

UTC = timezone.utc


def write_ndjson(path, snapshots):
    path.write_text("".join(serialize_snapshot(s) + "\n" for s in snapshots), encoding="utf-8")


def no_sleep(_):
    pass


class TestFileReplay:
    def test_replay_three_snapshots(self, tmp_path):
        snaps = [snap(ts=f"2022-03-16T03:0{i}:00Z") for i in range(3)]
        path = tmp_path / "replay.ndjson"
        write_ndjson(path, snaps)
        store = SnapshotStore(tmp_path / "store")
        stats = poll_and_append(FileReplaySource(path), store, sleep=no_sleep)
        assert len(store) == 3
        assert stats.appended == 3

    def test_duplicate_delivery_stored_once(self, tmp_path):
        snaps = [snap(), snap()]
        path = tmp_path / "replay.ndjson"
        write_ndjson(path, snaps)
        store = SnapshotStore(tmp_path / "store")
        stats = poll_and_append(FileReplaySource(path), store, sleep=no_sleep)
        assert len(store) == 1
        assert stats.duplicates == 1

    def test_rerun_is_idempotent(self, tmp_path):
        snaps = [snap(ts=f"2022-03-16T03:0{i}:00Z") for i in range(3)]
        path = tmp_path / "replay.ndjson"
        write_ndjson(path, snaps)
        store = SnapshotStore(tmp_path / "store")
        poll_and_append(FileReplaySource(path), store, sleep=no_sleep)
        stats = poll_and_append(FileReplaySource(path), store, sleep=no_sleep)
        assert len(store) == 3
        assert stats.appended == 0 and stats.duplicates == 3

    def test_missing_file_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            FileReplaySource(tmp_path / "nope.ndjson")

    def test_bad_line_is_source_error(self, tmp_path):
        path = tmp_path / "replay.ndjson"
        path.write_text('{"site_id":"a","ts":"bad"}\n', encoding="utf-8")
        store = SnapshotStore(tmp_path / "store")
        with pytest.raises(SourceError, match="replay.ndjson:1"):
            poll_and_append(FileReplaySource(path), store,
                            retry=RetryPolicy(max_attempts=1), sleep=no_sleep)


class TestSyntheticSource:
    def test_five_minute_cadence_one_day(self, tmp_path):
        model = OccupancyModel(
            {"ED1": SiteLoadProfile(base=20, amplitude=8, peak_hour=15)}, seed=3
        )
        start = datetime(2022, 3, 16, tzinfo=UTC)
        source = SyntheticSource(model, start, start + timedelta(days=1), interval_s=300)
        store = SnapshotStore(tmp_path / "store")
        stats = poll_and_append(source, store, sleep=no_sleep)
        assert len(store) == 288  # one simulated day at 5-minute cadence
        assert stats.batches == 288

    def test_deterministic_for_seed(self):
        start = datetime(2022, 3, 16, tzinfo=UTC)
        profiles = {"ED1": SiteLoadProfile(base=20, amplitude=8, peak_hour=15)}
        a = OccupancyModel(profiles, seed=9).generate(start, start + timedelta(hours=2), 300)
        b = OccupancyModel(profiles, seed=9).generate(start, start + timedelta(hours=2), 300)
        assert a == b

    def test_weekend_factor_raises_load(self):
        profile = SiteLoadProfile(base=20, amplitude=0, peak_hour=12, weekend_factor=1.5)
        assert profile.expected_load(12.0, is_weekend=True) == 30.0
        assert profile.expected_load(12.0, is_weekend=False) == 20.0


class TestHttpSource:
    def client_with(self, handler):
        return httpx.Client(transport=httpx.MockTransport(handler), base_url="http://src")

    def test_parses_ndjson_body(self, tmp_path):
        body = serialize_snapshot(snap()) + "\n" + serialize_snapshot(snap(ts="2022-03-16T03:05:00Z"))

        def handler(request):
            return httpx.Response(200, text=body)

        source = HttpSource("http://src/snapshots", client=self.client_with(handler))
        batch = source.poll()
        assert len(batch) == 2

    def test_parses_json_array_body(self):
        import json

        body = json.dumps([json.loads(serialize_snapshot(snap()))])

        def handler(request):
            return httpx.Response(200, text=body)

        source = HttpSource("http://src/snapshots", client=self.client_with(handler))
        assert len(source.poll()) == 1

    def test_http_error_is_source_error(self):
        def handler(request):
            return httpx.Response(500)

        source = HttpSource("http://src/snapshots", client=self.client_with(handler))
        with pytest.raises(SourceError, match="failed"):
            source.poll()

    def test_transient_failures_recover(self, tmp_path):
        calls = {"n": 0}

        def handler(request):
            calls["n"] += 1
            if calls["n"] == 1:
                return httpx.Response(503)
            return httpx.Response(200, text=serialize_snapshot(snap()))

        source = HttpSource("http://src/snapshots", client=self.client_with(handler))
        store = SnapshotStore(tmp_path / "store")
        stats = poll_and_append(
            source, store, retry=RetryPolicy(max_attempts=3, backoff_s=0),
            poll_interval_s=0, max_batches=1, sleep=no_sleep,
        )
        assert stats.appended == 1

    def test_permanent_failure_raises(self, tmp_path):
        def handler(request):
            return httpx.Response(500)

        source = HttpSource("http://src/snapshots", client=self.client_with(handler))
        store = SnapshotStore(tmp_path / "store")
        with pytest.raises(SourceError, match="permanently"):
            poll_and_append(source, store, retry=RetryPolicy(max_attempts=2), sleep=no_sleep)


class TestSourceConfig:
    def test_invalid_kind(self):
        with pytest.raises(ValueError, match="kind"):
            SourceConfig(kind="carrier_pigeon")

    def test_nonpositive_interval(self):
        with pytest.raises(ValueError, match="poll_interval"):
            SourceConfig(kind="file_replay", poll_interval_s=0)

    def test_make_source_dispatch(self, tmp_path):
        path = tmp_path / "replay.ndjson"
        write_ndjson(path, [snap()])
        source = make_source(SourceConfig(kind="file_replay", path=str(path)))
        assert isinstance(source, FileReplaySource)
        with pytest.raises(ConfigError, match="path"):
            make_source(SourceConfig(kind="file_replay"))
        with pytest.raises(ConfigError, match="url"):
            make_source(SourceConfig(kind="http_adapter"))

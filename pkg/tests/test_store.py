from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from argrid.errors import DataError
from argrid.store import (
    NON_CRITICAL_CODES,
    TRIAGE_CODES,
    FacilitySeries,
    OccupancySnapshot,
    SnapshotStore,
    current_supply,
    estimate_capacity,
    parse_snapshot,
    serialize_snapshot,
)


def snap(site="ED1", ts="2022-03-16T03:00:00Z", in_charge=None, waiting=None):
    return OccupancySnapshot(
        site_id=site,
        ts=datetime.fromisoformat(ts.replace("Z", "+00:00")),
        in_charge=in_charge or {},
        waiting=waiting or {},
    )


class TestParse:
    def test_defaults_fill_missing_codes(self):
        s = parse_snapshot(
            '{"site_id":"ED1","ts":"2022-03-16T03:00:00Z",'
            '"in_charge":{"green":5,"yellow":2},"waiting":{"white":1}}'
        )
        assert s.in_charge == {"white": 0, "green": 5, "yellow": 2, "red": 0}
        assert s.waiting == {"white": 1, "green": 0, "yellow": 0, "red": 0}
        assert s.ts.tzinfo is not None

    def test_negative_count_named(self):
        with pytest.raises(ValueError, match="in_charge.green"):
            parse_snapshot('{"site_id":"a","ts":"2022-03-16T03:00:00Z","in_charge":{"green":-1}}')

    def test_unknown_code_named(self):
        with pytest.raises(ValueError, match="waiting.blue"):
            parse_snapshot('{"site_id":"a","ts":"2022-03-16T03:00:00Z","waiting":{"blue":1}}')

    def test_malformed_json(self):
        with pytest.raises(ValueError, match="malformed JSON"):
            parse_snapshot("{nope")

    def test_bad_timestamp_named(self):
        with pytest.raises(ValueError, match="ts"):
            parse_snapshot('{"site_id":"a","ts":"yesterday"}')

    def test_naive_timestamp_rejected(self):
        with pytest.raises(ValueError, match="offset"):
            parse_snapshot('{"site_id":"a","ts":"2022-03-16T03:00:00"}')

    def test_non_integer_count_rejected(self):
        with pytest.raises(ValueError, match="integer"):
            parse_snapshot('{"site_id":"a","ts":"2022-03-16T03:00:00Z","in_charge":{"green":1.5}}')

    counts = st.fixed_dictionaries(
        {},
        optional={code: st.integers(min_value=0, max_value=500) for code in TRIAGE_CODES},
    )

    @given(
        site=st.text(min_size=1, max_size=12).filter(lambda s: s.strip() == s and s),
        seconds=st.integers(min_value=0, max_value=10_000_000),
        in_charge=counts,
        waiting=counts,
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip_identity(self, site, seconds, in_charge, waiting):
        original = OccupancySnapshot(
            site_id=site,
            ts=datetime(2021, 11, 1, tzinfo=timezone.utc) + timedelta(seconds=seconds),
            in_charge=in_charge,
            waiting=waiting,
        )
        assert parse_snapshot(serialize_snapshot(original)) == original


class TestCapacityAndSupply:
    def series_from_totals(self, totals):
        snaps = tuple(
            snap(ts=f"2022-03-16T0{i}:00:00Z", in_charge={"green": t}) for i, t in enumerate(totals)
        )
        return FacilitySeries(site_id="ED1", snapshots=snaps)

    def test_running_max(self):
        assert estimate_capacity(self.series_from_totals([3, 7, 5])) == 7

    def test_red_code_excluded(self):
        series = FacilitySeries(
            site_id="ED1",
            snapshots=(snap(in_charge={"green": 5, "yellow": 2, "red": 4}),),
        )
        assert estimate_capacity(series) == 7
        assert estimate_capacity(series, codes=TRIAGE_CODES) == 11

    def test_include_waiting_flag(self):
        series = FacilitySeries(
            site_id="ED1",
            snapshots=(snap(in_charge={"green": 5}, waiting={"green": 3}),),
        )
        assert estimate_capacity(series) == 5
        assert estimate_capacity(series, include_waiting=True) == 8

    def test_monotone_as_series_grows(self):
        totals = [3, 9, 2, 11, 4]
        caps = [
            estimate_capacity(self.series_from_totals(totals[: i + 1]))
            for i in range(len(totals))
        ]
        assert caps == sorted(caps)
        assert caps == [3, 9, 9, 11, 11]

    def test_empty_series_rejected(self):
        with pytest.raises(DataError, match="empty series"):
            estimate_capacity(FacilitySeries(site_id="ED1", snapshots=()))

    def test_supply_difference(self):
        assert current_supply(snap(in_charge={"green": 5}), capacity=7) == 2

    def test_supply_clamped_at_zero(self):
        assert current_supply(snap(in_charge={"green": 9}), capacity=7) == 0

    def test_supply_ignores_red(self):
        assert current_supply(snap(in_charge={"green": 5, "red": 10}), capacity=7) == 2


class TestSnapshotStore:
    def test_append_and_len(self, tmp_path):
        store = SnapshotStore(tmp_path / "store")
        assert store.append(snap()) is True
        assert store.append(snap(ts="2022-03-16T03:05:00Z")) is True
        assert len(store) == 2

    def test_duplicate_is_idempotent(self, tmp_path):
        store = SnapshotStore(tmp_path / "store")
        assert store.append(snap()) is True
        assert store.append(snap()) is False
        assert len(store) == 1

    def test_reopen_preserves_dedup(self, tmp_path):
        root = tmp_path / "store"
        SnapshotStore(root).append(snap())
        store = SnapshotStore(root)
        assert store.append(snap()) is False
        assert len(store) == 1

    def test_out_of_order_rejected(self, tmp_path):
        store = SnapshotStore(tmp_path / "store")
        store.append(snap(ts="2022-03-16T04:00:00Z"))
        with pytest.raises(DataError, match="out-of-order"):
            store.append(snap(ts="2022-03-16T03:00:00Z"))

    def test_segment_rolling(self, tmp_path):
        store = SnapshotStore(tmp_path / "store", segment_max_records=2)
        for i in range(5):
            store.append(snap(ts=f"2022-03-16T03:0{i}:00Z"))
        segments = sorted(p.name for p in (tmp_path / "store").glob("segment-*.ndjson"))
        assert len(segments) == 3
        assert len(SnapshotStore(tmp_path / "store", segment_max_records=2)) == 5

    def test_query_window_bounds_and_order(self, tmp_path):
        store = SnapshotStore(tmp_path / "store")
        for site in ("b", "a"):
            for minute in (0, 5, 10):
                store.append(snap(site=site, ts=f"2022-03-16T03:{minute:02d}:00Z"))
        t0 = datetime(2022, 3, 16, 3, 0, tzinfo=timezone.utc)
        t1 = datetime(2022, 3, 16, 3, 10, tzinfo=timezone.utc)
        out = store.query_window(t0, t1)
        assert [(s.site_id, s.ts.minute) for s in out] == [
            ("a", 0), ("b", 0), ("a", 5), ("b", 5),
        ]

    def test_query_empty_store(self, tmp_path):
        store = SnapshotStore(tmp_path / "store")
        t0 = datetime(2022, 3, 16, tzinfo=timezone.utc)
        assert store.query_window(t0, t0 + timedelta(days=1)) == []

    def test_slot_filter_counts(self, tmp_path):
        # 288 snapshots over one day at 5-minute cadence: the 19-20h
        # local slot keeps 12 per site.
        store = SnapshotStore(tmp_path / "store")
        start = datetime(2022, 6, 15, 0, 0, tzinfo=timezone.utc)  # CEST: local = utc+2
        batch = [snap(ts=(start + timedelta(minutes=5 * i)).isoformat()) for i in range(288)]
        store.append_many(batch)
        assert len(store) == 288
        out = store.query_window(
            start, start + timedelta(days=1), slot_hours=(19, 20), tz="Europe/Rome"
        )
        assert len(out) == 12
        from zoneinfo import ZoneInfo

        assert all(s.ts.astimezone(ZoneInfo("Europe/Rome")).hour == 19 for s in out)

    def test_weekday_weekend_partition_two_weeks(self, tmp_path):
        # Mar 7 through Mar 20, 2022 holds 10 weekdays and 4 weekend days.
        from zoneinfo import ZoneInfo

        store = SnapshotStore(tmp_path / "store")
        start = datetime(2022, 3, 7, tzinfo=timezone.utc)
        batch = [snap(ts=(start + timedelta(days=i, hours=18)).isoformat()) for i in range(14)]
        store.append_many(batch)
        out = store.query_window(start, start + timedelta(days=14))
        rome = ZoneInfo("Europe/Rome")
        weekend = [s for s in out if s.ts.astimezone(rome).weekday() >= 5]
        assert len(out) == 14
        assert len(weekend) == 4

    def test_invalid_range_rejected(self, tmp_path):
        store = SnapshotStore(tmp_path / "store")
        t0 = datetime(2022, 3, 16, tzinfo=timezone.utc)
        with pytest.raises(ValueError, match="start"):
            store.query_window(t0, t0 - timedelta(1))

    def test_latest_at(self, tmp_path):
        store = SnapshotStore(tmp_path / "store")
        store.append(snap(ts="2022-03-16T03:00:00Z", in_charge={"green": 1}))
        store.append(snap(ts="2022-03-16T04:00:00Z", in_charge={"green": 2}))
        at = datetime(2022, 3, 16, 3, 30, tzinfo=timezone.utc)
        found = store.latest_at("ED1", at)
        assert found is not None and found.in_charge["green"] == 1
        assert store.latest_at("ED1", datetime(2020, 1, 1, tzinfo=timezone.utc)) is None
        assert store.latest_at("nope", at) is None

    def test_series_sorted(self, tmp_path):
        store = SnapshotStore(tmp_path / "store")
        store.append_many(
            [snap(ts="2022-03-16T03:00:00Z"), snap(ts="2022-03-16T05:00:00Z")]
        )
        series = store.series("ED1")
        assert len(series) == 2
        assert series.max_capacity == 0
        assert [s.ts.hour for s in series.snapshots] == [3, 5]

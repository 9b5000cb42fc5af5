"""Run configuration and the workspace shared by the CLI and the HTTP service.

The workspace loads the geometry once, fits the accessibility estimator
on it, and serves per-instant matrices out of a small LRU cache keyed
by the *data* timestamp: the latest snapshot at or before the requested
instant.  Two requests seeing the same snapshots therefore share one
matrix, and what-if shocks only zero columns of that cached matrix.

Cache population is single-flight: concurrent misses on one key compute
once while other keys proceed in parallel.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Mapping, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from . import exports
from .engine import AccessibilityReachability, ARMatrix, accessibility, reachability
from .errors import ConfigError, DataError
from .geometry import FacilitySite, Grid, load_grid_csv, load_sites_csv
from .impact import ShockReport, ols_fit, shocked_ar_multi, worst_case_shock_report
from .stats import SamplePair, DifferentialReport, differential_report
from .store import (
    DEFAULT_TIMEZONE,
    NON_CRITICAL_CODES,
    SnapshotStore,
    current_supply,
    estimate_capacity,
)

DEFAULT_SLOT_HOURS = (19, 20)


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; defaults suit a metropolitan emergency-department network."""

    grid_path: str
    sites_path: str
    store_path: str
    gamma: float = -2.0
    tau_km: float = 5.0
    extpop_mode: str = "facility_pool"
    catchment_metric: str = "projected_euclidean"
    decay_metric: str = "projected_euclidean"
    colocation_epsilon_km: float = 0.001
    alpha: float = 0.05
    timezone: str = DEFAULT_TIMEZONE
    cell_size_km: float = 1.0
    include_waiting: bool = False
    supply_codes: tuple[str, ...] = NON_CRITICAL_CODES

    def validate_paths(self) -> None:
        for name in ("grid_path", "sites_path", "store_path"):
            path = Path(getattr(self, name))
            if not path.exists():
                raise ConfigError(f"{name.replace('_', ' ')} does not exist: {path}")


def _utc(ts: datetime) -> datetime:
    if ts.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware")
    return ts.astimezone(timezone.utc)


class Workspace:
    """Geometry, store, fitted estimator, and the per-instant matrix cache."""

    def __init__(self, grid: Grid, sites: Sequence[FacilitySite], store: SnapshotStore,
                 config: RunConfig, cache_size: int = 64):
        self.grid = grid
        self.sites = list(sites)
        self.store = store
        self.config = config
        self.estimator = AccessibilityReachability(
            gamma=config.gamma,
            tau_km=config.tau_km,
            extpop_mode=config.extpop_mode,
            catchment_metric=config.catchment_metric,
            decay_metric=config.decay_metric,
            colocation_epsilon_km=config.colocation_epsilon_km,
            standardize=True,
        ).fit(grid, sites)
        self.site_index = {s.site_id: i for i, s in enumerate(self.sites)}
        self._capacities: dict[str, int] | None = None
        self._cache: OrderedDict[str, ARMatrix] = OrderedDict()
        self._cache_size = cache_size
        self._cache_lock = threading.Lock()
        self._key_locks: dict[str, threading.Lock] = {}

    @classmethod
    def open(cls, config: RunConfig) -> "Workspace":
        config.validate_paths()
        grid = load_grid_csv(config.grid_path, config.cell_size_km)
        sites = load_sites_csv(config.sites_path)
        store = SnapshotStore(config.store_path)
        return cls(grid, sites, store, config)

    # -- supply -----------------------------------------------------------

    def capacities(self) -> dict[str, int]:
        """Per-site capacity estimated over the whole stored series."""
        if self._capacities is None:
            caps = {}
            missing = []
            for site in self.sites:
                series = self.store.series(site.site_id)
                if len(series) == 0:
                    missing.append(site.site_id)
                    continue
                caps[site.site_id] = estimate_capacity(
                    series, self.config.supply_codes, self.config.include_waiting
                )
            if missing:
                raise DataError(f"no snapshots stored for sites: {', '.join(missing)}")
            self._capacities = caps
        return self._capacities

    def supply_at(self, at: datetime) -> tuple[np.ndarray, datetime]:
        """Supply vector in site order plus the data timestamp it reflects.

        Uses each site's latest snapshot at or before ``at``; sites with
        no usable snapshot are reported together as a DataError.
        """
        at = _utc(at)
        caps = self.capacities()
        supply = np.zeros(len(self.sites))
        missing = []
        basis_ts: datetime | None = None
        for i, site in enumerate(self.sites):
            snap = self.store.latest_at(site.site_id, at)
            if snap is None:
                missing.append(site.site_id)
                continue
            supply[i] = current_supply(snap, caps[site.site_id], self.config.supply_codes)
            basis_ts = snap.ts if basis_ts is None else max(basis_ts, snap.ts)
        if missing:
            raise DataError(
                f"no snapshot at or before {at.isoformat()} for sites: {', '.join(missing)}"
            )
        return supply, basis_ts

    # -- matrices ---------------------------------------------------------

    def ar_at(self, at: datetime) -> ARMatrix:
        """Standardized matrix for the snapshots visible at ``at`` (cached)."""
        supply, basis_ts = self.supply_at(at)
        key = basis_ts.isoformat()
        with self._cache_lock:
            cached = self._cache.get(key)
            if cached is not None:
                self._cache.move_to_end(key)
                return cached
            key_lock = self._key_locks.setdefault(key, threading.Lock())
        with key_lock:
            with self._cache_lock:
                cached = self._cache.get(key)
                if cached is not None:
                    return cached
            matrix = self.estimator.ar_matrix(supply, timestamp=basis_ts)
            with self._cache_lock:
                self._cache[key] = matrix
                self._cache.move_to_end(key)
                while len(self._cache) > self._cache_size:
                    evicted, _ = self._cache.popitem(last=False)
                    self._key_locks.pop(evicted, None)
            return matrix

    def parameters(self, matrix: ARMatrix, requested_at: datetime | None = None) -> dict:
        block = exports.parameter_block(matrix)
        if requested_at is not None:
            block["requested_at"] = _utc(requested_at).isoformat().replace("+00:00", "Z")
        return block

    # -- analyses ---------------------------------------------------------

    def worst_case_report(self, at: datetime) -> tuple[ShockReport, ARMatrix]:
        matrix = self.ar_at(at)
        report = worst_case_shock_report(
            matrix, self.grid.cell_ids, [s.site_id for s in self.sites]
        )
        return report, matrix

    def shock_scenario(self, at: datetime, saturated_sites: Sequence[str]) -> dict:
        """Pre/post accessibility and impacts for a set of saturated sites."""
        if not saturated_sites:
            raise ValueError("saturated_sites must be non-empty")
        unknown = [s for s in saturated_sites if s not in self.site_index]
        if unknown:
            raise KeyError(f"unknown sites: {', '.join(sorted(unknown))}")
        matrix = self.ar_at(at)
        indices = sorted(self.site_index[s] for s in set(saturated_sites))
        shocked = shocked_ar_multi(matrix, indices)
        pre = accessibility(matrix)
        post = accessibility(shocked)
        if float(np.ptp(pre)) > 0:
            fit = ols_fit(pre, post)
            impacts = fit.residuals
            regression = {"intercept": fit.intercept, "slope": fit.slope, "r_squared": fit.r_squared}
        else:
            impacts = post - pre
            regression = None
        return {
            "parameters": self.parameters(matrix, at),
            "saturated_sites": sorted(set(saturated_sites)),
            "cells": [
                {
                    "cell_id": cell_id,
                    "accessibility": float(pre[i]),
                    "shocked_accessibility": float(post[i]),
                    "impact": float(impacts[i]),
                }
                for i, cell_id in enumerate(self.grid.cell_ids)
            ],
            "regression": regression,
            "reachability": {
                s.site_id: float(v) for s, v in zip(self.sites, reachability(matrix))
            },
        }

    # -- differential testing ----------------------------------------------

    def accessibility_by_day(
        self,
        start: datetime,
        end: datetime,
        slot_hours: tuple[int, int] = DEFAULT_SLOT_HOURS,
        sample_unit: str = "daily_mean",
    ) -> tuple[dict, list]:
        """Per-cell samples split into weekend (group a) and weekday (group b).

        ``daily_mean`` takes one observation per local calendar day per
        cell (the mean over the slot's snapshots); ``snapshot`` keeps
        every slot snapshot as an observation.
        """
        if sample_unit not in ("daily_mean", "snapshot"):
            raise ValueError("sample_unit must be 'daily_mean' or 'snapshot'")
        zone = ZoneInfo(self.config.timezone)
        snaps = self.store.query_window(
            _utc(start), _utc(end), [s.site_id for s in self.sites],
            slot_hours, self.config.timezone,
        )
        by_ts: dict[datetime, dict[str, object]] = {}
        for s in snaps:
            by_ts.setdefault(s.ts, {})[s.site_id] = s
        caps = self.capacities()
        site_order = [s.site_id for s in self.sites]
        day_values: dict[object, list[np.ndarray]] = {}
        used_ts = []
        for ts in sorted(by_ts):
            group = by_ts[ts]
            if len(group) < len(site_order):
                continue  # a complete supply vector needs every site
            supply = np.array(
                [
                    current_supply(group[sid], caps[sid], self.config.supply_codes)
                    for sid in site_order
                ],
                dtype=np.float64,
            )
            a = self.estimator.accessibility(supply, timestamp=ts)
            local = ts.astimezone(zone)
            key = local.date() if sample_unit == "daily_mean" else (local.date(), ts)
            day_values.setdefault(key, []).append(a)
            used_ts.append(ts)

        weekend_rows, weekday_rows = [], []
        for key in sorted(day_values, key=str):
            day = key if sample_unit == "daily_mean" else key[0]
            value = np.mean(day_values[key], axis=0)
            (weekend_rows if day.weekday() >= 5 else weekday_rows).append(value)
        return {
            "weekend": np.array(weekend_rows),
            "weekday": np.array(weekday_rows),
        }, used_ts

    def differential(
        self,
        start: datetime,
        end: datetime,
        slot_hours: tuple[int, int] = DEFAULT_SLOT_HOURS,
        variant: str = "welch",
        tail: str = "b_greater",
        alpha: float | None = None,
        sample_unit: str = "daily_mean",
    ) -> DifferentialReport:
        """Weekend-vs-weekday test per cell.

        Group a holds weekend samples and group b weekday samples, so
        the default tail ``b_greater`` tests for a weekday mean
        exceeding the weekend mean, i.e. a weekend accessibility drop.
        """
        groups, _ = self.accessibility_by_day(start, end, slot_hours, sample_unit)
        weekend, weekday = groups["weekend"], groups["weekday"]
        if weekend.shape[0] < 2 or weekday.shape[0] < 2:
            raise DataError(
                "need at least 2 weekend and 2 weekday observations in the window; "
                f"got {weekend.shape[0]} weekend and {weekday.shape[0]} weekday"
            )
        samples = [
            SamplePair(cell_id=cell_id, group_a=weekend[:, i], group_b=weekday[:, i])
            for i, cell_id in enumerate(self.grid.cell_ids)
        ]
        return differential_report(
            samples, variant=variant, tail=tail,
            alpha=self.config.alpha if alpha is None else alpha,
        )


def _stamp(ts: datetime) -> str:
    return _utc(ts).strftime("%Y%m%dT%H%M%SZ")


def compute_artifacts(ws: Workspace, at: datetime, out_dir: str | Path) -> dict[str, Path]:
    """Matrix CSV, accessibility/reachability GeoJSON, and summary for one instant."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    matrix = ws.ar_at(at)
    stamp = _stamp(matrix.timestamp)
    paths = {
        "matrix_csv": out / f"ar_{stamp}.csv",
        "geojson": out / f"ar_{stamp}.geojson",
        "summary": out / f"ar_{stamp}_summary.json",
    }
    exports.write_ar_matrix_csv(matrix, ws.grid, ws.sites, paths["matrix_csv"])
    exports.write_ar_geojson(matrix, ws.grid, ws.sites, paths["geojson"])
    exports.write_ar_summary(matrix, paths["summary"])
    return paths


def impact_artifacts(ws: Workspace, at: datetime, out_dir: str | Path) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report, matrix = ws.worst_case_report(at)
    stamp = _stamp(matrix.timestamp)
    paths = {
        "csv": out / f"impact_{stamp}.csv",
        "geojson": out / f"impact_{stamp}.geojson",
        "scatter": out / f"impact_{stamp}_scatter.csv",
    }
    exports.write_shock_report_csv(report, paths["csv"])
    exports.write_shock_geojson(report, ws.grid, paths["geojson"], ws.parameters(matrix))
    exports.write_shock_scatter_csv(report, paths["scatter"])
    return paths


def differential_artifacts(
    ws: Workspace,
    start: datetime,
    end: datetime,
    out_dir: str | Path,
    slot_hours: tuple[int, int] = DEFAULT_SLOT_HOURS,
    variant: str = "welch",
    tail: str = "b_greater",
    alpha: float | None = None,
    sample_unit: str = "daily_mean",
) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = ws.differential(start, end, slot_hours, variant, tail, alpha, sample_unit)
    span = f"{_stamp(start)}_{_stamp(end)}"
    paths = {
        "csv": out / f"test_{span}.csv",
        "geojson": out / f"test_{span}.geojson",
    }
    exports.write_differential_csv(report, paths["csv"])
    meta = {
        "from": _utc(start).isoformat().replace("+00:00", "Z"),
        "to": _utc(end).isoformat().replace("+00:00", "Z"),
        "slot_hours": list(slot_hours),
        "timezone": ws.config.timezone,
        "sample_unit": sample_unit,
    }
    exports.write_differential_geojson(report, ws.grid, paths["geojson"], meta)
    return paths, report

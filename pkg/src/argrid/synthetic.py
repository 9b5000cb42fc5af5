"""Synthetic city and occupancy generators.

Desk-scale stand-ins for a scraped corpus: a radial city (center-heavy
population, clustered central facilities, isolated border facilities)
and a seeded occupancy model producing sinusoidal daily load with
weekday/weekend level shifts and Poisson noise per triage code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from typing import Mapping, Sequence
from zoneinfo import ZoneInfo

import numpy as np

from .geometry import FacilitySite, Grid, GridCell
from .store import DEFAULT_TIMEZONE, TRIAGE_CODES, OccupancySnapshot

# Fraction of total load per triage code (non-critical codes dominate).
TRIAGE_SHARES = {"white": 0.20, "green": 0.45, "yellow": 0.25, "red": 0.10}

# Local anchor used to give synthetic planar grids plausible lon/lat.
ANCHOR_LON = 9.19
ANCHOR_LAT = 45.4642
KM_PER_DEG_LAT = 110.574
KM_PER_DEG_LON = 111.320 * math.cos(math.radians(ANCHOR_LAT))


def planar_to_geographic(x_km: float, y_km: float) -> tuple[float, float]:
    """Map local planar km offsets to (lon, lat) around the anchor point."""
    return (ANCHOR_LON + x_km / KM_PER_DEG_LON, ANCHOR_LAT + y_km / KM_PER_DEG_LAT)


def make_radial_city(
    n_rows: int = 15,
    n_cols: int = 15,
    cell_size_km: float = 1.0,
    peak_population: float = 4000.0,
    population_scale_km: float = 4.0,
    base_population: float = 50.0,
) -> tuple[Grid, list[FacilitySite]]:
    """Radial synthetic city: dense central supply, sparse isolated border supply.

    Population decays exponentially with distance from the city center.
    Five facilities cluster within ~2 km of the center; three more sit
    near the border, far enough apart that border cells typically see a
    single facility within a 5 km catchment.
    """
    width = n_cols * cell_size_km
    height = n_rows * cell_size_km
    cx, cy = width / 2.0, height / 2.0

    cells = []
    for row in range(n_rows):
        for col in range(n_cols):
            x = (col + 0.5) * cell_size_km
            y = (row + 0.5) * cell_size_km
            r = math.hypot(x - cx, y - cy)
            pop = round(peak_population * math.exp(-r / population_scale_km) + base_population)
            lon, lat = planar_to_geographic(x, y)
            cells.append(
                GridCell(
                    cell_id=f"c{row * n_cols + col}",
                    x_km=x,
                    y_km=y,
                    population=float(pop),
                    lon=round(lon, 6),
                    lat=round(lat, 6),
                )
            )
    grid = Grid(cells=tuple(cells), cell_size_km=cell_size_km, bounds=(0.0, 0.0, width, height))

    site_positions = [
        ("center-a", cx - 1.0, cy - 0.5),
        ("center-b", cx + 1.2, cy + 0.8),
        ("center-c", cx - 0.4, cy + 1.5),
        ("center-d", cx + 0.6, cy - 1.4),
        ("center-e", cx + 1.8, cy - 0.2),
        ("border-w", 1.2, cy + 0.3),
        ("border-ne", width - 1.4, height - 1.2),
        ("border-s", cx + 0.8, 1.1),
    ]
    sites = []
    for name, x, y in site_positions:
        lon, lat = planar_to_geographic(x, y)
        sites.append(
            FacilitySite(
                site_id=name,
                label=name.replace("-", " ").title(),
                x_km=x,
                y_km=y,
                lon=round(lon, 6),
                lat=round(lat, 6),
            )
        )
    return grid, sites


@dataclass(frozen=True)
class SiteLoadProfile:
    """Daily load shape for one facility.

    ``base`` is the mean concurrent non-critical load, ``amplitude`` the
    sinusoidal swing peaking at ``peak_hour`` (local wall clock), and
    ``weekend_factor`` a multiplicative level shift on Saturdays and
    Sundays (general practitioners are closed, so load rises).
    """

    base: float
    amplitude: float
    peak_hour: float
    weekend_factor: float = 1.0

    def expected_load(self, local_hour: float, is_weekend: bool) -> float:
        phase = 2.0 * math.pi * (local_hour - self.peak_hour) / 24.0
        load = self.base + self.amplitude * math.cos(phase)
        if is_weekend:
            load *= self.weekend_factor
        return max(0.0, load)


def default_profiles(sites: Sequence[FacilitySite], seed: int = 7) -> dict[str, SiteLoadProfile]:
    """Heterogeneous profiles: central sites run hot with a strong weekend
    surge (general practitioners closed, demand pours into the city
    hospitals); border sites swing with the day but barely notice
    weekends, anchoring the measurement scale."""
    rng = np.random.default_rng(seed)
    profiles = {}
    for site in sites:
        central = site.site_id.startswith("center")
        if central:
            base = float(rng.uniform(50, 60))
            amplitude = base * float(rng.uniform(0.12, 0.2))
            peak = float(rng.uniform(14.0, 16.5))
            weekend = float(rng.uniform(1.45, 1.6))
        else:
            base = float(rng.uniform(35, 45))
            amplitude = base * float(rng.uniform(0.30, 0.40))
            peak = float(rng.uniform(10.5, 12.5))
            weekend = float(rng.uniform(0.95, 1.05))
        profiles[site.site_id] = SiteLoadProfile(
            base=base, amplitude=amplitude, peak_hour=peak, weekend_factor=weekend
        )
    return profiles


class OccupancyModel:
    """Seeded snapshot generator over a fixed cadence.

    Draws per-code Poisson counts around each site's expected load, in a
    fixed (timestamp, site, code) order so a given seed always produces
    the identical stream.
    """

    def __init__(
        self,
        profiles: Mapping[str, SiteLoadProfile],
        seed: int = 0,
        tz: str = DEFAULT_TIMEZONE,
        waiting_fraction: float = 0.3,
    ):
        if not profiles:
            raise ValueError("at least one site profile is required")
        self.profiles = dict(profiles)
        self.seed = seed
        self.tz = ZoneInfo(tz)
        self.waiting_fraction = waiting_fraction
        self._rng = np.random.default_rng(seed)

    def snapshots_at(self, ts: datetime) -> list[OccupancySnapshot]:
        """One snapshot per site at ``ts`` (UTC), ordered by site id."""
        local = ts.astimezone(self.tz)
        hour = local.hour + local.minute / 60.0
        weekend = local.weekday() >= 5
        out = []
        for site_id in sorted(self.profiles):
            profile = self.profiles[site_id]
            lam = profile.expected_load(hour, weekend)
            in_charge = {}
            waiting = {}
            for code in TRIAGE_CODES:
                share = TRIAGE_SHARES[code]
                in_charge[code] = int(self._rng.poisson(lam * share))
                waiting[code] = int(self._rng.poisson(lam * share * self.waiting_fraction))
            out.append(OccupancySnapshot(site_id=site_id, ts=ts, in_charge=in_charge, waiting=waiting))
        return out

    def generate(self, start: datetime, end: datetime, interval_s: float = 300.0) -> list[OccupancySnapshot]:
        """All snapshots on the cadence grid start, start+interval, ... < end."""
        if start.tzinfo is None or end.tzinfo is None:
            raise ValueError("start and end must be timezone-aware")
        if interval_s <= 0:
            raise ValueError("interval_s must be positive")
        out = []
        ts = start
        step = timedelta(seconds=interval_s)
        while ts < end:
            out.extend(self.snapshots_at(ts))
            ts = ts + step
        return out

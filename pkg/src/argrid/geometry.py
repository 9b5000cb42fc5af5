"""Demand grid, facility sites, distances, catchment and decay matrices.

The demand side is a lattice ``Grid`` of square cells with centroid
coordinates in a local planar projection (kilometres) and a resident
population per cell.  The supply side is a list of ``FacilitySite``
points.  From those two this module materializes the binary catchment
matrix (cell within radius ``tau_km`` of a site) and the distance-decay
matrix (``distance ** gamma``, with a colocation clause for coincident
points).  Row order of every matrix follows grid cell order; column
order follows site order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .validation import as_float_array, check_metric, readonly

EARTH_RADIUS_KM = 6371.0088  # mean Earth radius
DEFAULT_COLOCATION_EPSILON_KM = 0.001

GRID_CSV_HEADER = ["cell_id", "lon", "lat", "x_km", "y_km", "population"]
SITES_CSV_HEADER = ["site_id", "label", "lon", "lat", "x_km", "y_km"]


@dataclass(frozen=True)
class GridCell:
    """One square demand cell: planar centroid (km) and resident count."""

    cell_id: str
    x_km: float
    y_km: float
    population: float
    lon: float | None = None
    lat: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.x_km) and math.isfinite(self.y_km)):
            raise ValueError(f"cell {self.cell_id!r}: centroid must be finite")
        if not math.isfinite(self.population) or self.population < 0:
            raise ValueError(f"cell {self.cell_id!r}: population must be >= 0")


@dataclass(frozen=True)
class FacilitySite:
    """One supply point: planar location (km) and optional geographic pair."""

    site_id: str
    x_km: float
    y_km: float
    label: str = ""
    lon: float | None = None
    lat: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.x_km) and math.isfinite(self.y_km)):
            raise ValueError(f"site {self.site_id!r}: location must be finite")


@dataclass(frozen=True)
class Grid:
    """Ordered lattice of demand cells.

    The cell ordering is fixed at construction and defines the row order
    of every cells-by-sites matrix produced downstream.
    """

    cells: tuple[GridCell, ...]
    cell_size_km: float
    bounds: tuple[float, float, float, float]  # xmin, ymin, xmax, ymax

    def __post_init__(self):
        if len(self.cells) < 1:
            raise ValueError("grid must contain at least one cell")
        if self.cell_size_km <= 0:
            raise ValueError("cell_size_km must be positive")
        seen = set()
        for cell in self.cells:
            if cell.cell_id in seen:
                raise ValueError(f"duplicate cell_id {cell.cell_id!r}")
            seen.add(cell.cell_id)

    def __len__(self) -> int:
        return len(self.cells)

    @cached_property
    def cell_ids(self) -> tuple[str, ...]:
        return tuple(c.cell_id for c in self.cells)

    @cached_property
    def population(self) -> np.ndarray:
        return readonly(np.array([c.population for c in self.cells], dtype=np.float64))

    @cached_property
    def centroids_km(self) -> np.ndarray:
        return readonly(np.array([(c.x_km, c.y_km) for c in self.cells], dtype=np.float64))

    @cached_property
    def has_geographic(self) -> bool:
        return all(c.lon is not None and c.lat is not None for c in self.cells)


@dataclass(frozen=True)
class CatchmentMatrix:
    """Binary cells-by-sites membership matrix for radius ``tau_km``."""

    entries: np.ndarray
    tau_km: float
    metric_id: str

    def __post_init__(self):
        readonly(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True)
class DecayMatrix:
    """Cells-by-sites distance-decay weights ``distance ** gamma``.

    Pairs closer than ``colocation_epsilon_km`` get weight 1 so that a
    site sitting on a cell centroid carries no distance penalty.
    """

    entries: np.ndarray
    gamma: float
    metric_id: str
    colocation_epsilon_km: float

    def __post_init__(self):
        readonly(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def build_grid(
    bounds: tuple[float, float, float, float],
    cell_size_km: float,
    populations: Iterable[tuple[str, float]] = (),
) -> Grid:
    """Tile ``bounds`` with square cells and attach populations.

    Cells are laid out row-major: row 0 is the lowest-y band, cells run
    left to right within a row, and cell ids are ``c0, c1, ...`` in that
    order.  Centroids sit at cell centers.  Cells without a population
    record default to 0.

    Parameters
    ----------
    bounds : (xmin, ymin, xmax, ymax) in planar km.
    cell_size_km : positive cell edge length; the lattice covers the
        bounds, so the last row/column may extend past them.
    populations : iterable of (cell_id, count) with cell ids from the
        generated lattice.
    """
    if cell_size_km <= 0:
        raise ValueError("cell_size_km must be positive")
    xmin, ymin, xmax, ymax = (float(v) for v in bounds)
    if not all(math.isfinite(v) for v in (xmin, ymin, xmax, ymax)):
        raise ValueError("bounds must be finite")
    if xmax <= xmin or ymax <= ymin:
        raise ValueError("bounds must be non-degenerate (xmax > xmin, ymax > ymin)")

    ncols = max(1, math.ceil((xmax - xmin) / cell_size_km - 1e-9))
    nrows = max(1, math.ceil((ymax - ymin) / cell_size_km - 1e-9))

    counts: dict[str, float] = {}
    for cell_id, count in populations:
        if cell_id in counts:
            raise ValueError(f"duplicate cell_id {cell_id!r} in populations")
        if not math.isfinite(count) or count < 0:
            raise ValueError(f"cell {cell_id!r}: population must be >= 0")
        counts[cell_id] = float(count)

    cells = []
    for row in range(nrows):
        for col in range(ncols):
            cell_id = f"c{row * ncols + col}"
            cells.append(
                GridCell(
                    cell_id=cell_id,
                    x_km=xmin + (col + 0.5) * cell_size_km,
                    y_km=ymin + (row + 0.5) * cell_size_km,
                    population=counts.pop(cell_id, 0.0),
                )
            )
    if counts:
        unknown = ", ".join(sorted(counts))
        raise ValueError(f"population records outside the lattice: {unknown}")
    return Grid(cells=tuple(cells), cell_size_km=float(cell_size_km), bounds=(xmin, ymin, xmax, ymax))


def distance(a: Sequence[float], b: Sequence[float], metric: str = "projected_euclidean") -> float:
    """Distance in km between two coordinate pairs.

    ``projected_euclidean`` expects planar ``(x_km, y_km)`` pairs;
    ``haversine`` expects geographic ``(lat_deg, lon_deg)`` pairs and
    uses the mean Earth radius 6371.0088 km.
    """
    check_metric(metric)
    ax, ay = float(a[0]), float(a[1])
    bx, by = float(b[0]), float(b[1])
    if not all(math.isfinite(v) for v in (ax, ay, bx, by)):
        raise ValueError("coordinates must be finite")
    if metric == "projected_euclidean":
        return math.hypot(ax - bx, ay - by)
    for lat in (ax, bx):
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} out of range [-90, 90]")
    for lon in (ay, by):
        if not -180.0 <= lon <= 180.0:
            raise ValueError(f"longitude {lon} out of range [-180, 180]")
    return float(_haversine_km(np.array([ax]), np.array([ay]), np.array([bx]), np.array([by]))[0])


def _haversine_km(lat1, lon1, lat2, lon2) -> np.ndarray:
    d2r = math.pi / 180.0
    p1, p2 = lat1 * d2r, lat2 * d2r
    dlat = (lat2 - lat1) * d2r
    dlon = (lon2 - lon1) * d2r
    h = np.sin(dlat / 2.0) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlon / 2.0) ** 2
    return EARTH_RADIUS_KM * 2.0 * np.arcsin(np.sqrt(h))


def pairwise_distances(grid: Grid, sites: Sequence[FacilitySite], metric: str = "projected_euclidean") -> np.ndarray:
    """Cells-by-sites distance matrix under the named metric."""
    check_metric(metric)
    if len(sites) < 1:
        raise ValueError("at least one facility site is required")
    seen = set()
    for site in sites:
        if site.site_id in seen:
            raise ValueError(f"duplicate site_id {site.site_id!r}")
        seen.add(site.site_id)

    if metric == "projected_euclidean":
        cells = grid.centroids_km
        pts = np.array([(s.x_km, s.y_km) for s in sites], dtype=np.float64)
        dx = cells[:, 0][:, None] - pts[:, 0][None, :]
        dy = cells[:, 1][:, None] - pts[:, 1][None, :]
        return np.hypot(dx, dy)

    if not grid.has_geographic:
        raise ValueError("haversine requires lat/lon on every grid cell")
    if any(s.lon is None or s.lat is None for s in sites):
        raise ValueError("haversine requires lat/lon on every site")
    clat = np.array([c.lat for c in grid.cells], dtype=np.float64)
    clon = np.array([c.lon for c in grid.cells], dtype=np.float64)
    slat = np.array([s.lat for s in sites], dtype=np.float64)
    slon = np.array([s.lon for s in sites], dtype=np.float64)
    if np.any(np.abs(clat) > 90) or np.any(np.abs(slat) > 90):
        raise ValueError("latitude out of range [-90, 90]")
    if np.any(np.abs(clon) > 180) or np.any(np.abs(slon) > 180):
        raise ValueError("longitude out of range [-180, 180]")
    return _haversine_km(clat[:, None], clon[:, None], slat[None, :], slon[None, :])


def catchment_matrix(
    grid: Grid,
    sites: Sequence[FacilitySite],
    tau_km: float,
    metric: str = "projected_euclidean",
) -> CatchmentMatrix:
    """Binary membership matrix: 1 iff distance(cell, site) <= tau_km.

    The boundary is inclusive: a pair exactly at the radius is inside.
    """
    if tau_km <= 0:
        raise ValueError("tau_km must be positive")
    dist = pairwise_distances(grid, sites, metric)
    entries = (dist <= tau_km).astype(np.float64)
    return CatchmentMatrix(entries=entries, tau_km=float(tau_km), metric_id=metric)


def decay_matrix(
    grid: Grid,
    sites: Sequence[FacilitySite],
    gamma: float,
    metric: str = "projected_euclidean",
    colocation_epsilon_km: float = DEFAULT_COLOCATION_EPSILON_KM,
) -> DecayMatrix:
    """Distance-decay matrix ``distance ** gamma`` with colocation clause.

    Pairs closer than ``colocation_epsilon_km`` get weight 1, which also
    keeps negative exponents finite when a site coincides with a centroid.
    """
    if colocation_epsilon_km <= 0:
        raise ValueError("colocation_epsilon_km must be positive")
    dist = pairwise_distances(grid, sites, metric)
    entries = np.ones_like(dist)
    far = dist >= colocation_epsilon_km
    with np.errstate(over="ignore"):
        entries[far] = dist[far] ** float(gamma)
    if not np.all(np.isfinite(entries)):
        raise ValueError(f"gamma={gamma} yields non-finite decay entries")
    return DecayMatrix(
        entries=entries,
        gamma=float(gamma),
        metric_id=metric,
        colocation_epsilon_km=float(colocation_epsilon_km),
    )


def _parse_optional_float(raw: str) -> float | None:
    raw = raw.strip()
    return float(raw) if raw else None


def load_grid_csv(path: str | Path, cell_size_km: float = 1.0) -> Grid:
    """Read a grid from CSV with header ``cell_id,lon,lat,x_km,y_km,population``."""
    path = Path(path)
    cells = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != GRID_CSV_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(GRID_CSV_HEADER)}, got {reader.fieldnames}"
            )
        for row in reader:
            cells.append(
                GridCell(
                    cell_id=row["cell_id"],
                    x_km=float(row["x_km"]),
                    y_km=float(row["y_km"]),
                    population=float(row["population"]),
                    lon=_parse_optional_float(row["lon"]),
                    lat=_parse_optional_float(row["lat"]),
                )
            )
    if not cells:
        raise ValueError(f"{path}: no grid cells")
    xs = [c.x_km for c in cells]
    ys = [c.y_km for c in cells]
    half = cell_size_km / 2.0
    bounds = (min(xs) - half, min(ys) - half, max(xs) + half, max(ys) + half)
    return Grid(cells=tuple(cells), cell_size_km=float(cell_size_km), bounds=bounds)


def save_grid_csv(grid: Grid, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(GRID_CSV_HEADER)
        for c in grid.cells:
            writer.writerow(
                [
                    c.cell_id,
                    "" if c.lon is None else repr(c.lon),
                    "" if c.lat is None else repr(c.lat),
                    repr(c.x_km),
                    repr(c.y_km),
                    repr(c.population),
                ]
            )


def load_sites_csv(path: str | Path) -> list[FacilitySite]:
    """Read sites from CSV with header ``site_id,label,lon,lat,x_km,y_km``."""
    path = Path(path)
    sites = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SITES_CSV_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(SITES_CSV_HEADER)}, got {reader.fieldnames}"
            )
        for row in reader:
            sites.append(
                FacilitySite(
                    site_id=row["site_id"],
                    label=row["label"],
                    x_km=float(row["x_km"]),
                    y_km=float(row["y_km"]),
                    lon=_parse_optional_float(row["lon"]),
                    lat=_parse_optional_float(row["lat"]),
                )
            )
    if not sites:
        raise ValueError(f"{path}: no sites")
    seen = set()
    for site in sites:
        if site.site_id in seen:
            raise ValueError(f"{path}: duplicate site_id {site.site_id!r}")
        seen.add(site.site_id)
    return sites


def save_sites_csv(sites: Sequence[FacilitySite], path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SITES_CSV_HEADER)
        for s in sites:
            writer.writerow(
                [
                    s.site_id,
                    s.label,
                    "" if s.lon is None else repr(s.lon),
                    "" if s.lat is None else repr(s.lat),
                    repr(s.x_km),
                    repr(s.y_km),
                ]
            )

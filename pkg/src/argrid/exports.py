"""CSV and GeoJSON artifact writers.

All writers are deterministic: floats are serialized with ``repr``
(shortest round-trip form), JSON keys are sorted, and no wall-clock
values are embedded, so identical inputs produce byte-identical files.

GeoJSON cells are squares of the grid's cell size around each centroid.
When a grid carries geographic coordinates the features use lon/lat
(with the cell edge scaled locally); otherwise coordinates are the
planar km values, flagged via the collection's ``coordinate_space``
property so consumers can scale axes accordingly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .engine import ARMatrix, accessibility, reachability
from .geometry import FacilitySite, Grid
from .impact import ShockReport
from .stats import ADJUST_METHODS, DifferentialReport
from .synthetic import KM_PER_DEG_LAT, KM_PER_DEG_LON


def _fmt(value: float) -> str:
    return repr(float(value))


def dump_json(obj, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
    )


def parameter_block(matrix: ARMatrix) -> dict:
    return {
        "gamma": matrix.gamma,
        "tau_km": matrix.tau_km,
        "extpop_mode": matrix.extpop_mode,
        "standardized": matrix.standardized,
        "timestamp": matrix.timestamp.isoformat().replace("+00:00", "Z") if matrix.timestamp else None,
    }


def write_ar_matrix_csv(matrix: ARMatrix, grid: Grid, sites: Sequence[FacilitySite], path: str | Path) -> None:
    """Full matrix: header of site ids, one row per cell with leading cell_id."""
    if matrix.shape != (len(grid), len(sites)):
        raise ValueError(f"matrix shape {matrix.shape} does not match grid/sites")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", *(s.site_id for s in sites)])
        for cell, row in zip(grid.cells, matrix.entries):
            writer.writerow([cell.cell_id, *(_fmt(v) for v in row)])


def _cell_polygon(cell, grid: Grid) -> list[list[list[float]]]:
    if cell.lon is not None and cell.lat is not None:
        hx = grid.cell_size_km / 2.0 / KM_PER_DEG_LON
        hy = grid.cell_size_km / 2.0 / KM_PER_DEG_LAT
        x, y = cell.lon, cell.lat
    else:
        hx = hy = grid.cell_size_km / 2.0
        x, y = cell.x_km, cell.y_km
    ring = [
        [x - hx, y - hy],
        [x + hx, y - hy],
        [x + hx, y + hy],
        [x - hx, y + hy],
        [x - hx, y - hy],
    ]
    return [ring]


def _site_point(site: FacilitySite) -> list[float]:
    if site.lon is not None and site.lat is not None:
        return [site.lon, site.lat]
    return [site.x_km, site.y_km]


def cells_feature_collection(
    grid: Grid,
    values: Mapping[str, np.ndarray],
    extra: Mapping[str, Sequence] | None = None,
) -> dict:
    """FeatureCollection of cell squares carrying the named per-cell values."""
    for name, arr in values.items():
        if len(arr) != len(grid):
            raise ValueError(f"values[{name!r}] length {len(arr)} != {len(grid)} cells")
    geographic = grid.has_geographic
    features = []
    for i, cell in enumerate(grid.cells):
        props = {"cell_id": cell.cell_id, "population": cell.population}
        for name, arr in values.items():
            props[name] = float(arr[i])
        for name, seq in (extra or {}).items():
            props[name] = seq[i]
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": _cell_polygon(cell, grid)},
                "properties": props,
            }
        )
    return {
        "type": "FeatureCollection",
        "coordinate_space": "geographic" if geographic else "planar_km",
        "features": features,
    }


def sites_feature_collection(
    sites: Sequence[FacilitySite],
    values: Mapping[str, np.ndarray] | None = None,
) -> dict:
    features = []
    geographic = all(s.lon is not None and s.lat is not None for s in sites)
    for i, site in enumerate(sites):
        props = {"site_id": site.site_id, "label": site.label}
        for name, arr in (values or {}).items():
            props[name] = float(arr[i])
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": _site_point(site)},
                "properties": props,
            }
        )
    return {
        "type": "FeatureCollection",
        "coordinate_space": "geographic" if geographic else "planar_km",
        "features": features,
    }


def write_ar_geojson(matrix: ARMatrix, grid: Grid, sites: Sequence[FacilitySite], path: str | Path) -> None:
    """Cells with ``accessibility`` and sites with ``reachability``, one document."""
    doc = {
        "parameters": parameter_block(matrix),
        "cells": cells_feature_collection(grid, {"accessibility": accessibility(matrix)}),
        "sites": sites_feature_collection(sites, {"reachability": reachability(matrix)}),
    }
    dump_json(doc, path)


def write_ar_summary(matrix: ARMatrix, path: str | Path) -> None:
    a = accessibility(matrix)
    r = reachability(matrix)
    dump_json(
        {
            "parameters": parameter_block(matrix),
            "accessibility": {"min": _stat(a, min), "max": _stat(a, max), "mean": float(np.mean(a))},
            "reachability": {"min": _stat(r, min), "max": _stat(r, max), "mean": float(np.mean(r))},
        },
        path,
    )


def _stat(arr: np.ndarray, fn) -> float:
    return float(fn(arr.tolist()))


def write_shock_report_csv(report: ShockReport, path: str | Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", "A", "A_hat", "worst_site", "impact"])
        for i, cell_id in enumerate(report.cell_ids):
            writer.writerow(
                [
                    cell_id,
                    _fmt(report.accessibility[i]),
                    _fmt(report.shocked_accessibility[i]),
                    report.worst_site_ids[i],
                    _fmt(report.impacts[i]),
                ]
            )


def write_shock_scatter_csv(report: ShockReport, path: str | Path) -> None:
    """Scatter data for the pre- vs post-shock accessibility plot."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", "A", "A_hat", "fitted", "impact"])
        for i, cell_id in enumerate(report.cell_ids):
            writer.writerow(
                [
                    cell_id,
                    _fmt(report.accessibility[i]),
                    _fmt(report.shocked_accessibility[i]),
                    _fmt(report.fitted[i]),
                    _fmt(report.impacts[i]),
                ]
            )


def write_shock_geojson(report: ShockReport, grid: Grid, path: str | Path, parameters: dict | None = None) -> None:
    doc = {
        "parameters": parameters or {},
        "regression": {
            "intercept": report.intercept,
            "slope": report.slope,
            "r_squared": report.r_squared,
        },
        "cells": cells_feature_collection(
            grid,
            {
                "accessibility": report.accessibility,
                "shocked_accessibility": report.shocked_accessibility,
                "impact": report.impacts,
            },
            extra={"worst_site": list(report.worst_site_ids)},
        ),
    }
    dump_json(doc, path)


# Short column labels for the report CSV.
_METHOD_LABELS = {"none": "none", "bonferroni": "bonf", "holm": "holm",
                  "hochberg": "hochberg", "bh": "bh"}


def write_differential_csv(report: DifferentialReport, path: str | Path) -> None:
    header = ["cell_id", "t", "df", "p"]
    header += [f"p_{_METHOD_LABELS[m]}" for m in ADJUST_METHODS if m != "none"]
    header += [f"rej_{_METHOD_LABELS[m]}" for m in ADJUST_METHODS]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, cell_id in enumerate(report.cell_ids):
            row = [
                cell_id,
                _fmt(report.statistic[i]),
                _fmt(report.df[i]),
                _fmt(report.p_value[i]),
            ]
            row += [_fmt(report.adjusted[m][i]) for m in ADJUST_METHODS if m != "none"]
            row += [str(int(report.rejected[m][i])) for m in ADJUST_METHODS]
            writer.writerow(row)


def write_differential_geojson(
    report: DifferentialReport,
    grid: Grid,
    path: str | Path,
    parameters: dict | None = None,
) -> None:
    """Cells flagged with per-method rejection decisions (map panels)."""
    by_cell = {cell_id: i for i, cell_id in enumerate(report.cell_ids)}
    values: dict[str, np.ndarray] = {"p": np.full(len(grid), math.nan)}
    flags: dict[str, list] = {f"rej_{m}": [None] * len(grid) for m in ADJUST_METHODS}
    for gi, cell in enumerate(grid.cells):
        i = by_cell.get(cell.cell_id)
        if i is None:
            continue
        values["p"][gi] = report.p_value[i]
        for m in ADJUST_METHODS:
            flags[f"rej_{m}"][gi] = bool(report.rejected[m][i])
    cells = cells_feature_collection(grid, {}, extra=flags)
    for gi, feature in enumerate(cells["features"]):
        p = values["p"][gi]
        feature["properties"]["p"] = None if math.isnan(p) else float(p)
    doc = {
        "parameters": parameters or {},
        "alpha": report.alpha,
        "m": report.m,
        "variant": report.variant,
        "tail": report.tail,
        "rejection_counts": report.rejection_counts(),
        "skipped": [list(pair) for pair in report.skipped],
        "cells": cells,
    }
    dump_json(doc, path)


def write_method_comparison_csv(
    grid: Grid,
    columns: Mapping[str, np.ndarray],
    path: str | Path,
) -> None:
    """Side-by-side per-cell accessibility for several methods."""
    names = list(columns)
    for name in names:
        if len(columns[name]) != len(grid):
            raise ValueError(f"column {name!r} length != number of cells")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cell_id", *names])
        for i, cell in enumerate(grid.cells):
            writer.writerow([cell.cell_id, *(_fmt(columns[n][i]) for n in names)])

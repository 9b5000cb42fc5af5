"""Supply-shock analysis: saturated facilities, worst-case accessibility, impacts.

A shock zeroes a facility's column of the standardized matrix (the
facility is saturated or closed, everything else unchanged).  Shocking
the standardized matrix, rather than recomputing and re-standardizing,
keeps pre- and post-shock values on one scale so the residual
regression below stays meaningful.

For each cell the worst single-facility shock removes the cell's
largest entry, so the minimum accessibility under any single shock has
the closed form ``A_l - max_k ar_lk`` (validated against enumeration in
the tests).  Impacts are the residuals of an ordinary least squares
regression of post-shock on pre-shock accessibility: strongly negative
residuals mark cells whose accessibility hangs on one facility.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime
from typing import Sequence

import numpy as np

from .engine import ARMatrix, accessibility
from .validation import as_float_array, readonly


@dataclass(frozen=True)
class ShockScenario:
    """A set of saturated facilities at one instant (single site for the
    worst-case sweep; multi-site for interactive what-ifs)."""

    saturated_sites: frozenset[str]
    timestamp: datetime | None = None

    def __post_init__(self):
        if not self.saturated_sites:
            raise ValueError("saturated_sites must be non-empty")


@dataclass(frozen=True)
class OLSFit:
    intercept: float
    slope: float
    residuals: np.ndarray
    r_squared: float

    def __post_init__(self):
        readonly(self.residuals)


@dataclass(frozen=True)
class ShockReport:
    """Per-cell worst-case shock outcome plus the impact regression."""

    cell_ids: tuple[str, ...]
    accessibility: np.ndarray          # pre-shock A_l
    shocked_accessibility: np.ndarray  # worst single-facility A_l
    worst_site_ids: tuple[str, ...]
    fitted: np.ndarray                 # intercept + slope * A_l
    impacts: np.ndarray                # residuals
    intercept: float
    slope: float
    r_squared: float

    def __post_init__(self):
        for arr in (self.accessibility, self.shocked_accessibility, self.fitted, self.impacts):
            readonly(arr)


def shocked_ar(matrix: ARMatrix, site_index: int) -> ARMatrix:
    """Copy of the matrix with the given facility's column zeroed."""
    n_sites = matrix.shape[1]
    if not 0 <= site_index < n_sites:
        raise ValueError(f"site index {site_index} out of range [0, {n_sites})")
    entries = matrix.entries.copy()
    entries[:, site_index] = 0.0
    return replace(matrix, entries=entries)


def shocked_ar_multi(matrix: ARMatrix, site_indices: Sequence[int]) -> ARMatrix:
    """Zero several facility columns at once (interactive what-if scenarios)."""
    indices = list(site_indices)
    if not indices:
        raise ValueError("site_indices must be non-empty")
    n_sites = matrix.shape[1]
    for idx in indices:
        if not 0 <= idx < n_sites:
            raise ValueError(f"site index {idx} out of range [0, {n_sites})")
    entries = matrix.entries.copy()
    entries[:, indices] = 0.0
    return replace(matrix, entries=entries)


def min_accessibility_under_shock(matrix: ARMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Worst-case accessibility per cell over all single-facility shocks.

    Returns ``(a_hat, worst_index)`` where ``a_hat[l]`` is the minimum
    shocked row sum and ``worst_index[l]`` the facility whose saturation
    attains it (ties break to the lowest site index).  A cell with a
    sole in-catchment supplier collapses to 0.
    """
    entries = matrix.entries
    a = entries.sum(axis=1)
    worst = entries.argmax(axis=1)  # argmax takes the first maximum: lowest index on ties
    a_hat = a - entries.max(axis=1)
    return a_hat, worst


def ols_fit(x: np.ndarray, y: np.ndarray) -> OLSFit:
    """Ordinary least squares of y on x with intercept, via the closed form.

    Residuals satisfy sum(r) = 0 and sum(r * x) = 0.  A constant x is a
    degenerate design and rejected.
    """
    xv = as_float_array(x, "x", ndim=1)
    yv = as_float_array(y, "y", ndim=1)
    if xv.shape != yv.shape:
        raise ValueError(f"x and y must have equal length, got {xv.shape} and {yv.shape}")
    if xv.shape[0] < 2:
        raise ValueError("at least two points are required")
    x_mean = xv.mean()
    sxx = float(((xv - x_mean) ** 2).sum())
    if sxx == 0.0:
        raise ValueError("x is constant: degenerate regression design")
    y_mean = yv.mean()
    slope = float(((xv - x_mean) * (yv - y_mean)).sum()) / sxx
    intercept = float(y_mean - slope * x_mean)
    residuals = yv - intercept - slope * xv
    ss_res = float((residuals**2).sum())
    ss_tot = float(((yv - y_mean) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 and ss_res <= 1e-30 else (
        0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    )
    return OLSFit(intercept=intercept, slope=slope, residuals=residuals, r_squared=r_squared)


def impact_scores(
    accessibility_pre: np.ndarray,
    accessibility_shocked: np.ndarray,
    cell_ids: Sequence[str],
    worst_site_ids: Sequence[str],
) -> ShockReport:
    """Impacts: OLS residuals of worst-case accessibility on pre-shock accessibility."""
    a = as_float_array(accessibility_pre, "accessibility_pre", ndim=1)
    a_hat = as_float_array(accessibility_shocked, "accessibility_shocked", ndim=1)
    if a.shape != a_hat.shape:
        raise ValueError("accessibility vectors must have equal length")
    if len(cell_ids) != a.shape[0] or len(worst_site_ids) != a.shape[0]:
        raise ValueError("cell_ids and worst_site_ids must match the vector length")
    fit = ols_fit(a, a_hat)
    fitted = fit.intercept + fit.slope * a
    return ShockReport(
        cell_ids=tuple(cell_ids),
        accessibility=a,
        shocked_accessibility=a_hat,
        worst_site_ids=tuple(worst_site_ids),
        fitted=fitted,
        impacts=fit.residuals.copy(),
        intercept=fit.intercept,
        slope=fit.slope,
        r_squared=fit.r_squared,
    )


def worst_case_shock_report(matrix: ARMatrix, cell_ids: Sequence[str], site_ids: Sequence[str]) -> ShockReport:
    """Full single-facility sweep: per-cell worst shock plus impact regression."""
    if len(site_ids) != matrix.shape[1] or len(cell_ids) != matrix.shape[0]:
        raise ValueError("cell_ids/site_ids must match the matrix shape")
    a = accessibility(matrix)
    a_hat, worst_idx = min_accessibility_under_shock(matrix)
    worst_ids = tuple(site_ids[i] for i in worst_idx)
    return impact_scores(a, a_hat, cell_ids, worst_ids)

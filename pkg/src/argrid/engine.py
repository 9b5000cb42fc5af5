"""Joint accessibility-reachability computation.

Couples the supply at each facility with the decay-weighted population
competing for it (the "extended population"), gated by catchment
membership.  Row sums of the resulting cells-by-sites matrix measure
how much supply a cell can reach (accessibility); column sums measure
how much demand a facility can serve (reachability).

The matrix is min-max standardized globally so accessibility and
reachability stay comparable across cells and facilities regardless of
the measurement scale of supply.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .geometry import (
    DEFAULT_COLOCATION_EPSILON_KM,
    CatchmentMatrix,
    DecayMatrix,
    FacilitySite,
    Grid,
    catchment_matrix,
    decay_matrix,
)
from .validation import as_float_array, check_length, check_nonnegative, readonly

EXTPOP_MODES = ("facility_pool", "cell_aggregated")


@dataclass(frozen=True)
class ExtendedPopulation:
    """Decay-weighted demand pool.

    ``facility_pool`` indexes the pool by facility (length K): the
    population competing for each site.  ``cell_aggregated`` folds the
    facility pools back onto cells (length L) through the catchment.
    """

    values: np.ndarray
    mode: str

    def __post_init__(self):
        if self.mode not in EXTPOP_MODES:
            raise ValueError(f"mode must be one of {EXTPOP_MODES}, got {self.mode!r}")
        readonly(self.values)


@dataclass(frozen=True)
class ARMatrix:
    """Cells-by-sites accessibility-reachability matrix plus its parameterization."""

    entries: np.ndarray
    standardized: bool
    gamma: float
    tau_km: float
    extpop_mode: str
    timestamp: datetime | None = None

    def __post_init__(self):
        if self.entries.ndim != 2:
            raise ValueError("entries must be a 2-d matrix")
        if not np.all(np.isfinite(self.entries)) or np.any(self.entries < 0):
            raise ValueError("entries must be finite and non-negative")
        readonly(self.entries)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def _entries(matrix) -> np.ndarray:
    return matrix.entries if hasattr(matrix, "entries") else np.asarray(matrix, dtype=np.float64)


def extended_population(
    populations: np.ndarray,
    catchment: CatchmentMatrix | np.ndarray,
    decay: DecayMatrix | np.ndarray,
    mode: str = "facility_pool",
) -> ExtendedPopulation:
    """Decay-weighted population competing for each facility.

    ``facility_pool``: pool_k = sum_l p_l * c_lk * d_lk.
    ``cell_aggregated``: value_l = sum_k c_lk * pool_k.
    """
    c = _entries(catchment)
    d = _entries(decay)
    if c.shape != d.shape:
        raise ValueError(f"catchment shape {c.shape} != decay shape {d.shape}")
    p = check_nonnegative(as_float_array(populations, "populations", ndim=1), "populations")
    check_length(p, c.shape[0], "populations")
    pool = p @ (c * d)
    if mode == "facility_pool":
        return ExtendedPopulation(values=pool, mode=mode)
    if mode == "cell_aggregated":
        return ExtendedPopulation(values=c @ pool, mode=mode)
    raise ValueError(f"mode must be one of {EXTPOP_MODES}, got {mode!r}")


def ar_matrix(
    supply: np.ndarray,
    pstar: ExtendedPopulation,
    catchment: CatchmentMatrix,
    decay: DecayMatrix,
    timestamp: datetime | None = None,
) -> ARMatrix:
    """Raw accessibility-reachability matrix.

    Entry (l, k) is the supply at facility k divided by the relevant
    extended-population component, times the catchment and decay weights.
    Where the extended population is zero the entry is defined as 0: an
    unpopulated catchment carries no supply-demand interaction.
    """
    c = _entries(catchment)
    d = _entries(decay)
    if c.shape != d.shape:
        raise ValueError(f"catchment shape {c.shape} != decay shape {d.shape}")
    n_cells, n_sites = c.shape
    s = as_float_array(supply, "supply", ndim=1)
    check_nonnegative(s, "supply")
    check_length(s, n_sites, "supply")

    weights = c * d
    if pstar.mode == "facility_pool":
        check_length(pstar.values, n_sites, "extended population (facility_pool)")
        ratio = np.divide(
            s, pstar.values, out=np.zeros_like(s), where=pstar.values > 0
        )
        entries = weights * ratio[None, :]
    else:
        check_length(pstar.values, n_cells, "extended population (cell_aggregated)")
        inv = np.divide(
            np.ones_like(pstar.values),
            pstar.values,
            out=np.zeros_like(pstar.values),
            where=pstar.values > 0,
        )
        entries = weights * s[None, :] * inv[:, None]

    return ARMatrix(
        entries=entries,
        standardized=False,
        gamma=decay.gamma if isinstance(decay, DecayMatrix) else float("nan"),
        tau_km=catchment.tau_km if isinstance(catchment, CatchmentMatrix) else float("nan"),
        extpop_mode=pstar.mode,
        timestamp=timestamp,
    )


def minmax_standardize(matrix: ARMatrix) -> ARMatrix:
    """Rescale the whole matrix to [0, 1] by its global min and max.

    A constant matrix maps to all zeros.  Entry ordering is preserved,
    so per-cell and per-site rankings survive standardization.
    """
    entries = matrix.entries
    lo = float(entries.min())
    hi = float(entries.max())
    if hi == lo:
        scaled = np.zeros_like(entries)
    else:
        scaled = (entries - lo) / (hi - lo)
    return replace(matrix, entries=scaled, standardized=True)


def accessibility(matrix: ARMatrix | np.ndarray) -> np.ndarray:
    """Per-cell accessibility: row sums of the matrix."""
    return _entries(matrix).sum(axis=1)


def reachability(matrix: ARMatrix | np.ndarray) -> np.ndarray:
    """Per-site reachability: column sums of the matrix."""
    return _entries(matrix).sum(axis=0)


class AccessibilityReachability(BaseEstimator):
    """Accessibility-reachability transformer over a fixed geometry.

    ``fit`` consumes the demand grid and facility sites and precomputes
    everything supply-independent (catchment, decay, extended
    population); ``transform`` then maps supply snapshots to per-cell
    accessibility rows, so a stream of snapshots over one city reuses
    the fitted geometry.

    Parameters
    ----------
    gamma : distance-decay exponent.
    tau_km : catchment radius in km.
    extpop_mode : 'facility_pool' divides supply by the population pool
        competing for the facility; 'cell_aggregated' divides by the
        pool aggregated back onto the cell.
    catchment_metric, decay_metric : distance metrics for the two
        matrices; they may differ (e.g. euclidean radius, travel-time
        decay).
    colocation_epsilon_km : pairs closer than this get decay weight 1.
    standardize : min-max standardize each produced matrix globally.
    """

    def __init__(
        self,
        gamma: float = -2.0,
        tau_km: float = 5.0,
        extpop_mode: str = "facility_pool",
        catchment_metric: str = "projected_euclidean",
        decay_metric: str = "projected_euclidean",
        colocation_epsilon_km: float = DEFAULT_COLOCATION_EPSILON_KM,
        standardize: bool = True,
    ):
        self.gamma = gamma
        self.tau_km = tau_km
        self.extpop_mode = extpop_mode
        self.catchment_metric = catchment_metric
        self.decay_metric = decay_metric
        self.colocation_epsilon_km = colocation_epsilon_km
        self.standardize = standardize

    def fit(self, grid: Grid, sites: Sequence[FacilitySite]):
        """Precompute catchment, decay, and extended population for a geometry."""
        if self.extpop_mode not in EXTPOP_MODES:
            raise ValueError(f"extpop_mode must be one of {EXTPOP_MODES}")
        self.catchment_ = catchment_matrix(grid, sites, self.tau_km, self.catchment_metric)
        self.decay_ = decay_matrix(
            grid, sites, self.gamma, self.decay_metric, self.colocation_epsilon_km
        )
        self.extended_population_ = extended_population(
            grid.population, self.catchment_, self.decay_, self.extpop_mode
        )
        self.cell_ids_ = grid.cell_ids
        self.site_ids_ = tuple(s.site_id for s in sites)
        self.n_cells_ = len(grid)
        self.n_sites_ = len(sites)
        return self

    def ar_matrix(self, supply: np.ndarray, timestamp: datetime | None = None) -> ARMatrix:
        """Matrix for one supply snapshot (standardized per the parameter)."""
        check_is_fitted(self, "catchment_")
        raw = ar_matrix(supply, self.extended_population_, self.catchment_, self.decay_, timestamp)
        return minmax_standardize(raw) if self.standardize else raw

    def accessibility(self, supply: np.ndarray, timestamp: datetime | None = None) -> np.ndarray:
        return accessibility(self.ar_matrix(supply, timestamp))

    def reachability(self, supply: np.ndarray, timestamp: datetime | None = None) -> np.ndarray:
        return reachability(self.ar_matrix(supply, timestamp))

    def transform(self, supply_rows: np.ndarray) -> np.ndarray:
        """Map supply snapshots (n_samples, K) to accessibility rows (n_samples, L)."""
        check_is_fitted(self, "catchment_")
        rows = as_float_array(supply_rows, "supply_rows")
        if rows.ndim == 1:
            rows = rows[None, :]
        if rows.ndim != 2 or rows.shape[1] != self.n_sites_:
            raise ValueError(
                f"supply_rows must have shape (n_samples, {self.n_sites_}), got {rows.shape}"
            )
        return np.stack([self.accessibility(row) for row in rows])

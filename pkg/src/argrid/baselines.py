"""Classical accessibility baselines: gravity, two-step FCA, rational-agent cost.

Kept side by side with the joint accessibility-reachability engine so
the two families can be compared on identical geometry and supply.
All functions operate on a cells-by-sites distance matrix; the
estimator wrappers derive it from a ``Grid`` and ``FacilitySite`` list.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .geometry import (
    DEFAULT_COLOCATION_EPSILON_KM,
    FacilitySite,
    Grid,
    pairwise_distances,
)
from .validation import as_float_array, check_length, check_nonnegative


@dataclass(frozen=True)
class PowerDecay:
    """Weight ``distance ** exponent``; distances under ``min_distance_km`` weigh 1."""

    exponent: float = -2.0
    min_distance_km: float = DEFAULT_COLOCATION_EPSILON_KM

    def __call__(self, dist: np.ndarray) -> np.ndarray:
        dist = np.asarray(dist, dtype=np.float64)
        out = np.ones_like(dist)
        far = dist >= self.min_distance_km
        out[far] = dist[far] ** self.exponent
        if not np.all(np.isfinite(out)):
            raise ValueError(f"power decay with exponent {self.exponent} overflows")
        return out


@dataclass(frozen=True)
class UniformDecay:
    """Weight 1 inside ``threshold_km`` (inclusive), 0 outside."""

    threshold_km: float

    def __call__(self, dist: np.ndarray) -> np.ndarray:
        return (np.asarray(dist, dtype=np.float64) <= self.threshold_km).astype(np.float64)


@dataclass(frozen=True)
class GaussianDecay:
    """Gaussian kernel ``exp(-(d / bandwidth)^2 / 2)``."""

    bandwidth_km: float

    def __post_init__(self):
        if self.bandwidth_km <= 0:
            raise ValueError("bandwidth_km must be positive")

    def __call__(self, dist: np.ndarray) -> np.ndarray:
        d = np.asarray(dist, dtype=np.float64)
        return np.exp(-0.5 * (d / self.bandwidth_km) ** 2)


DecayFunction = Callable[[np.ndarray], np.ndarray]


def gravity_accessibility(
    supply: np.ndarray,
    populations: np.ndarray,
    dist: np.ndarray,
    decay: DecayFunction,
) -> np.ndarray:
    """Demand-adjusted gravity accessibility per cell.

    Each facility's contribution is its supply times the decay weight,
    normalized by the decay-weighted demand it attracts from all cells.
    Facilities with zero supply are skipped, so a dead facility with an
    empty neighbourhood cannot poison the run.
    """
    d = as_float_array(dist, "dist", ndim=2)
    s = check_nonnegative(as_float_array(supply, "supply", ndim=1), "supply")
    p = check_nonnegative(as_float_array(populations, "populations", ndim=1), "populations")
    check_length(s, d.shape[1], "supply")
    check_length(p, d.shape[0], "populations")

    w = decay(d)
    demand_at = p @ w  # decay-weighted demand attracted by each facility
    active = s > 0
    bad = active & (demand_at <= 0)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise ValueError(
            f"facility index {idx} has positive supply but zero decay-weighted demand"
        )
    ratio = np.divide(s, demand_at, out=np.zeros_like(s), where=active)
    return w @ ratio


def fca_step1(
    supply: np.ndarray,
    populations: np.ndarray,
    dist: np.ndarray,
    decay: DecayFunction,
    d0_km: float,
) -> np.ndarray:
    """Supply-to-demand ratio per facility over its ``d0_km`` catchment.

    A facility with positive supply whose catchment holds no weighted
    demand has an undefined ratio and is reported as an error; zero
    supply yields ratio 0 regardless.
    """
    if d0_km <= 0:
        raise ValueError("d0_km must be positive")
    d = as_float_array(dist, "dist", ndim=2)
    s = check_nonnegative(as_float_array(supply, "supply", ndim=1), "supply")
    p = check_nonnegative(as_float_array(populations, "populations", ndim=1), "populations")
    check_length(s, d.shape[1], "supply")
    check_length(p, d.shape[0], "populations")

    inside = d <= d0_km
    weighted_demand = p @ (decay(d) * inside)
    active = s > 0
    starved = active & (weighted_demand <= 0)
    if np.any(starved):
        idx = ", ".join(str(i) for i in np.flatnonzero(starved))
        raise ValueError(
            f"facilities with positive supply but empty catchment demand: indices {idx}"
        )
    return np.divide(s, weighted_demand, out=np.zeros_like(s), where=active)


def fca_step2(
    ratios: np.ndarray,
    dist: np.ndarray,
    decay: DecayFunction,
    d0_km: float,
) -> np.ndarray:
    """Per-cell accessibility: decay-weighted sum of in-range facility ratios."""
    if d0_km <= 0:
        raise ValueError("d0_km must be positive")
    d = as_float_array(dist, "dist", ndim=2)
    r = as_float_array(ratios, "ratios", ndim=1)
    check_length(r, d.shape[1], "ratios")
    inside = d <= d0_km
    return (decay(d) * inside) @ r


@dataclass(frozen=True)
class RaamParams:
    """Inputs for the rational-agent cost: normalizers plus OD structure.

    ``travel_time_min`` and ``od_demand`` are cells-by-sites; the
    congestion term charges each facility's total incoming demand
    against its supply.
    """

    rho: float
    delta: float
    travel_time_min: np.ndarray
    od_demand: np.ndarray

    def __post_init__(self):
        if self.rho <= 0 or self.delta <= 0:
            raise ValueError("rho and delta must be positive")
        tt = as_float_array(self.travel_time_min, "travel_time_min", ndim=2)
        od = as_float_array(self.od_demand, "od_demand", ndim=2)
        if tt.shape != od.shape:
            raise ValueError(f"travel_time shape {tt.shape} != od_demand shape {od.shape}")
        check_nonnegative(tt, "travel_time_min")
        check_nonnegative(od, "od_demand")


def raam_cost(params: RaamParams, supply: np.ndarray) -> np.ndarray:
    """Cells-by-sites total cost: normalized congestion plus normalized travel.

    congestion(k) = (total demand targeting k / supply at k) / rho;
    travel(l, k) = travel_time / delta.
    """
    s = check_nonnegative(as_float_array(supply, "supply", ndim=1), "supply")
    od = np.asarray(params.od_demand, dtype=np.float64)
    check_length(s, od.shape[1], "supply")
    col_demand = od.sum(axis=0)
    starved = (col_demand > 0) & (s <= 0)
    if np.any(starved):
        idx = ", ".join(str(i) for i in np.flatnonzero(starved))
        raise ValueError(f"zero supply at demanded facilities: indices {idx}")
    congestion = np.divide(
        col_demand, s, out=np.zeros_like(col_demand), where=s > 0
    ) / params.rho
    return congestion[None, :] + np.asarray(params.travel_time_min, dtype=np.float64) / params.delta


def raam_assign(cost: np.ndarray) -> np.ndarray:
    """Lowest-cost facility index per cell; ties break to the lowest index."""
    c = np.asarray(cost, dtype=np.float64)
    if c.ndim != 2:
        raise ValueError("cost must be a 2-d matrix")
    finite = np.isfinite(c).any(axis=1)
    if not finite.all():
        idx = ", ".join(str(i) for i in np.flatnonzero(~finite))
        raise ValueError(f"rows with no finite cost: indices {idx}")
    return np.argmin(np.where(np.isfinite(c), c, np.inf), axis=1)


def uniform_od_demand(populations: np.ndarray, dist: np.ndarray, tau_km: float) -> np.ndarray:
    """Split each cell's population uniformly across facilities within ``tau_km``.

    Stand-in OD matrix for when no observed origin-destination data
    exist; cells with no facility in range contribute no demand.
    """
    p = check_nonnegative(as_float_array(populations, "populations", ndim=1), "populations")
    d = as_float_array(dist, "dist", ndim=2)
    check_length(p, d.shape[0], "populations")
    inside = (d <= tau_km).astype(np.float64)
    counts = inside.sum(axis=1)
    share = np.divide(p, counts, out=np.zeros_like(p), where=counts > 0)
    return inside * share[:, None]


class TwoStepFCA(BaseEstimator):
    """Two-step floating catchment accessibility over a fixed geometry.

    Step 1 computes each facility's supply-to-demand ratio over its
    catchment; step 2 sums in-range ratios per cell.  ``fit`` stores the
    distance matrix; ``transform`` maps supply snapshots to
    accessibility rows.
    """

    def __init__(
        self,
        d0_km: float = 5.0,
        decay: DecayFunction = PowerDecay(-2.0),
        metric: str = "projected_euclidean",
    ):
        self.d0_km = d0_km
        self.decay = decay
        self.metric = metric

    def fit(self, grid: Grid, sites: Sequence[FacilitySite]):
        self.distances_ = pairwise_distances(grid, sites, self.metric)
        self.populations_ = grid.population
        self.cell_ids_ = grid.cell_ids
        self.site_ids_ = tuple(s.site_id for s in sites)
        return self

    def supply_demand_ratios(self, supply: np.ndarray) -> np.ndarray:
        check_is_fitted(self, "distances_")
        return fca_step1(supply, self.populations_, self.distances_, self.decay, self.d0_km)

    def accessibility(self, supply: np.ndarray) -> np.ndarray:
        return fca_step2(self.supply_demand_ratios(supply), self.distances_, self.decay, self.d0_km)

    def transform(self, supply_rows: np.ndarray) -> np.ndarray:
        check_is_fitted(self, "distances_")
        rows = as_float_array(supply_rows, "supply_rows")
        if rows.ndim == 1:
            rows = rows[None, :]
        return np.stack([self.accessibility(row) for row in rows])


class GravityAccessibility(BaseEstimator):
    """Demand-adjusted gravity accessibility over a fixed geometry."""

    def __init__(
        self,
        decay: DecayFunction = PowerDecay(-2.0),
        metric: str = "projected_euclidean",
    ):
        self.decay = decay
        self.metric = metric

    def fit(self, grid: Grid, sites: Sequence[FacilitySite]):
        self.distances_ = pairwise_distances(grid, sites, self.metric)
        self.populations_ = grid.population
        self.cell_ids_ = grid.cell_ids
        self.site_ids_ = tuple(s.site_id for s in sites)
        return self

    def accessibility(self, supply: np.ndarray) -> np.ndarray:
        check_is_fitted(self, "distances_")
        return gravity_accessibility(supply, self.populations_, self.distances_, self.decay)

    def transform(self, supply_rows: np.ndarray) -> np.ndarray:
        check_is_fitted(self, "distances_")
        rows = as_float_array(supply_rows, "supply_rows")
        if rows.ndim == 1:
            rows = rows[None, :]
        return np.stack([self.accessibility(row) for row in rows])

import numpy as np
import pytest

from argrid.baselines import (
    GaussianDecay,
    GravityAccessibility,
    PowerDecay,
    RaamParams,
    TwoStepFCA,
    UniformDecay,
    fca_step1,
    fca_step2,
    gravity_accessibility,
    raam_assign,
    raam_cost,
    uniform_od_demand,
)

from .test_geometry import random_instance

ONES = UniformDecay(threshold_km=np.inf)


class TestDecayKinds:
    def test_power(self):
        w = PowerDecay(-2.0)(np.array([1.0, 2.0, 4.0]))
        assert w.tolist() == [1.0, 0.25, 0.0625]

    def test_power_colocation_floor(self):
        assert PowerDecay(-2.0)(np.array([0.0]))[0] == 1.0

    def test_uniform(self):
        w = UniformDecay(threshold_km=3.0)(np.array([2.0, 3.0, 3.1]))
        assert w.tolist() == [1.0, 1.0, 0.0]

    def test_gaussian(self):
        w = GaussianDecay(bandwidth_km=2.0)(np.array([0.0, 2.0]))
        assert w[0] == 1.0
        assert w[1] == pytest.approx(np.exp(-0.5), rel=1e-12)

    def test_gaussian_bad_bandwidth(self):
        with pytest.raises(ValueError, match="bandwidth"):
            GaussianDecay(bandwidth_km=0.0)


class TestGravity:
    def test_single_pair_hand_value(self):
        # supply 10 at 2 km, one demand cell of 5: (10 * 0.25) / (5 * 0.25) = 2
        a = gravity_accessibility([10.0], [5.0], [[2.0]], PowerDecay(-2.0))
        assert a[0] == pytest.approx(2.0, rel=1e-12)

    def test_uniform_symmetric(self):
        dist = np.array([[1.0, 2.0], [2.0, 1.0], [1.5, 1.5]])
        a = gravity_accessibility([4.0, 4.0], [10.0, 10.0, 10.0], dist, ONES)
        assert np.allclose(a, a[0])

    def test_zero_supply_equals_omission(self):
        dist = np.array([[1.0, 2.0], [3.0, 1.0]])
        both = gravity_accessibility([5.0, 0.0], [10.0, 20.0], dist, PowerDecay(-2.0))
        only = gravity_accessibility([5.0], [10.0, 20.0], dist[:, :1], PowerDecay(-2.0))
        assert np.allclose(both, only)

    def test_single_cell_single_site_decay_cancels(self):
        for d in (0.5, 2.0, 7.0):
            a = gravity_accessibility([12.0], [4.0], [[d]], PowerDecay(-2.0))
            assert a[0] == pytest.approx(3.0, rel=1e-12)

    def test_zero_denominator_names_facility(self):
        with pytest.raises(ValueError, match="index 0"):
            gravity_accessibility([5.0], [0.0], [[1.0]], PowerDecay(-2.0))


class TestTwoStepFCA:
    def test_step1_unweighted(self):
        r = fca_step1([10.0], [100.0, 300.0], [[1.0], [2.0]], ONES, d0_km=5.0)
        assert r[0] == pytest.approx(0.025, rel=1e-12)

    def test_step1_zero_supply(self):
        r = fca_step1([0.0], [100.0], [[1.0]], ONES, d0_km=5.0)
        assert r[0] == 0.0

    def test_step1_power_decay(self):
        r = fca_step1([10.0], [100.0, 300.0], [[1.0], [2.0]], PowerDecay(-2.0), d0_km=5.0)
        assert r[0] == pytest.approx(10.0 / 175.0, rel=1e-12)

    def test_step1_empty_catchment_error(self):
        with pytest.raises(ValueError, match="indices 0"):
            fca_step1([10.0], [100.0], [[9.0]], ONES, d0_km=5.0)

    def test_step2_sums_in_range(self):
        a = fca_step2([0.025, 0.075], [[1.0, 2.0]], ONES, d0_km=5.0)
        assert a[0] == pytest.approx(0.1, rel=1e-12)

    def test_step2_nothing_in_range(self):
        a = fca_step2([0.5], [[10.0]], ONES, d0_km=5.0)
        assert a[0] == 0.0

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(31)
        dist = rng.uniform(0.2, 8.0, (25, 4))
        p = rng.integers(1, 200, 25).astype(float)
        s = rng.integers(0, 30, 4).astype(float)
        decay = PowerDecay(-2.0)
        d0 = 5.0
        r = fca_step1(s, p, dist, decay, d0)
        a = fca_step2(r, dist, decay, d0)
        for j in range(4):
            denom = sum(p[k] * dist[k, j] ** -2.0 for k in range(25) if dist[k, j] <= d0)
            want = s[j] / denom if s[j] > 0 else 0.0
            assert r[j] == pytest.approx(want, rel=1e-12)
        for i in range(25):
            want = sum(r[j] * dist[i, j] ** -2.0 for j in range(4) if dist[i, j] <= d0)
            assert a[i] == pytest.approx(want, rel=1e-12, abs=1e-15)

    def test_mass_balance_uniform_full_coverage(self):
        rng = np.random.default_rng(32)
        dist = rng.uniform(0.1, 4.0, (30, 5))  # everything within d0=5
        p = rng.integers(1, 500, 30).astype(float)
        s = rng.integers(1, 40, 5).astype(float)
        r = fca_step1(s, p, dist, ONES, d0_km=5.0)
        a = fca_step2(r, dist, ONES, d0_km=5.0)
        assert float(p @ a) == pytest.approx(float(s.sum()), rel=1e-9)

    def test_estimator_wrapper(self):
        grid, sites = random_instance(seed=33)
        est = TwoStepFCA(d0_km=5.0, decay=ONES).fit(grid, sites)
        supply = np.arange(1.0, 6.0)
        direct = fca_step2(
            fca_step1(supply, grid.population, est.distances_, ONES, 5.0),
            est.distances_, ONES, 5.0,
        )
        assert np.allclose(est.accessibility(supply), direct)
        assert est.transform(np.vstack([supply, supply])).shape == (2, len(grid))


class TestRaam:
    def params(self, t, od, rho=5.0, delta=60.0):
        return RaamParams(rho=rho, delta=delta,
                          travel_time_min=np.asarray(t, float),
                          od_demand=np.asarray(od, float))

    def test_hand_value(self):
        p = self.params([[30.0]], [[50.0]])
        cost = raam_cost(p, [10.0])
        assert cost[0, 0] == pytest.approx(1.5, rel=1e-12)

    def test_zero_everything(self):
        p = self.params([[0.0]], [[0.0]])
        assert raam_cost(p, [10.0])[0, 0] == 0.0

    def test_normalizer_homogeneity(self):
        p1 = self.params([[30.0]], [[50.0]], rho=5.0, delta=60.0)
        p2 = self.params([[30.0]], [[50.0]], rho=10.0, delta=120.0)
        assert raam_cost(p2, [10.0])[0, 0] == pytest.approx(
            raam_cost(p1, [10.0])[0, 0] / 2.0, rel=1e-12
        )

    def test_zero_supply_at_demanded_facility(self):
        p = self.params([[1.0]], [[5.0]])
        with pytest.raises(ValueError, match="zero supply"):
            raam_cost(p, [0.0])

    def test_assign_argmin(self):
        assert raam_assign([[1.5, 0.9, 2.0]])[0] == 1

    def test_assign_tie_lowest_index(self):
        assert raam_assign([[1.0, 1.0]])[0] == 0

    def test_assign_matches_brute_force(self):
        rng = np.random.default_rng(34)
        cost = rng.random((40, 6))
        got = raam_assign(cost)
        for i in range(40):
            assert got[i] == int(np.argmin(cost[i]))

    def test_assign_shift_and_scale_invariant(self):
        rng = np.random.default_rng(35)
        cost = rng.random((20, 5))
        base = raam_assign(cost)
        assert np.array_equal(raam_assign(cost + 3.7), base)
        assert np.array_equal(raam_assign(cost * 2.5), base)

    def test_assign_all_infinite_row_rejected(self):
        with pytest.raises(ValueError, match="no finite cost"):
            raam_assign([[np.inf, np.inf]])

    def test_uniform_od_helper(self):
        dist = np.array([[1.0, 9.0], [2.0, 3.0]])
        od = uniform_od_demand([100.0, 60.0], dist, tau_km=5.0)
        assert od.tolist() == [[100.0, 0.0], [30.0, 30.0]]
        # row sums equal populations wherever a facility is in range
        assert od.sum(axis=1).tolist() == [100.0, 60.0]


class TestGravityEstimator:
    def test_wrapper_matches_function(self):
        grid, sites = random_instance(seed=36)
        est = GravityAccessibility(decay=PowerDecay(-2.0)).fit(grid, sites)
        supply = np.arange(1.0, 6.0)
        want = gravity_accessibility(supply, grid.population, est.distances_, PowerDecay(-2.0))
        assert np.allclose(est.accessibility(supply), want)

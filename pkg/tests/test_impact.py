import numpy as np
import pytest

from argrid.engine import ARMatrix, accessibility
from argrid.impact import (
    ShockScenario,
    impact_scores,
    min_accessibility_under_shock,
    ols_fit,
    shocked_ar,
    shocked_ar_multi,
    worst_case_shock_report,
)


def matrix_of(entries) -> ARMatrix:
    return ARMatrix(
        entries=np.asarray(entries, dtype=float),
        standardized=True,
        gamma=-2.0,
        tau_km=5.0,
        extpop_mode="facility_pool",
    )


class TestShockedAR:
    def test_column_zeroing(self):
        m = shocked_ar(matrix_of([[1.0, 2.0], [3.0, 4.0]]), 1)
        assert m.entries.tolist() == [[1.0, 0.0], [3.0, 0.0]]

    def test_zero_column_noop(self):
        base = matrix_of([[1.0, 0.0], [3.0, 0.0]])
        assert np.array_equal(shocked_ar(base, 1).entries, base.entries)

    def test_row_sums_identity(self):
        rng = np.random.default_rng(40)
        entries = rng.random((12, 5))
        base = matrix_of(entries)
        a = accessibility(base)
        for j in range(5):
            got = accessibility(shocked_ar(base, j))
            assert np.allclose(got, a - entries[:, j], rtol=1e-12)

    def test_idempotent_and_commutative(self):
        base = matrix_of(np.random.default_rng(41).random((6, 4)))
        once = shocked_ar(base, 2)
        assert np.array_equal(shocked_ar(once, 2).entries, once.entries)
        ab = shocked_ar(shocked_ar(base, 1), 3)
        ba = shocked_ar(shocked_ar(base, 3), 1)
        assert np.array_equal(ab.entries, ba.entries)
        multi = shocked_ar_multi(base, [1, 3])
        assert np.array_equal(multi.entries, ab.entries)

    def test_unknown_site_rejected(self):
        with pytest.raises(ValueError, match="out of range"):
            shocked_ar(matrix_of([[1.0]]), 1)

    def test_standardized_flag_carried(self):
        assert shocked_ar(matrix_of([[1.0, 2.0]]), 0).standardized


class TestMinUnderShock:
    def test_two_site_row(self):
        a_hat, worst = min_accessibility_under_shock(matrix_of([[0.5, 0.3]]))
        assert a_hat[0] == pytest.approx(0.3)
        assert worst[0] == 0

    def test_sole_supplier_collapses_to_zero(self):
        a_hat, worst = min_accessibility_under_shock(matrix_of([[0.0, 0.7]]))
        assert a_hat[0] == 0.0
        assert worst[0] == 1

    def test_tie_breaks_to_lowest_index(self):
        _, worst = min_accessibility_under_shock(matrix_of([[0.4, 0.4, 0.1]]))
        assert worst[0] == 0

    def test_enumeration_oracle(self):
        rng = np.random.default_rng(42)
        entries = rng.random((50, 10))
        m = matrix_of(entries)
        a = accessibility(m)
        a_hat, worst = min_accessibility_under_shock(m)
        for l in range(50):
            shocked_sums = [a[l] - entries[l, j] for j in range(10)]
            assert a_hat[l] == pytest.approx(min(shocked_sums), rel=1e-12)
            assert a_hat[l] <= a[l]
            assert shocked_sums[worst[l]] == pytest.approx(min(shocked_sums), rel=1e-12)


class TestOLS:
    def test_exact_line(self):
        fit = ols_fit([1.0, 2.0, 3.0], [2.0, 4.0, 6.0])
        assert fit.intercept == pytest.approx(0.0, abs=1e-12)
        assert fit.slope == pytest.approx(2.0, rel=1e-12)
        assert np.allclose(fit.residuals, 0.0, atol=1e-12)
        assert fit.r_squared == pytest.approx(1.0)

    def test_flat_line(self):
        fit = ols_fit([0.0, 1.0], [1.0, 1.0])
        assert fit.intercept == pytest.approx(1.0)
        assert fit.slope == pytest.approx(0.0, abs=1e-15)

    def test_normal_equations_oracle(self):
        rng = np.random.default_rng(43)
        for _ in range(10):
            x = rng.normal(size=30)
            y = 1.5 * x - 0.7 + rng.normal(scale=0.3, size=30)
            fit = ols_fit(x, y)
            design = np.column_stack([np.ones_like(x), x])
            beta = np.linalg.solve(design.T @ design, design.T @ y)
            assert fit.intercept == pytest.approx(beta[0], rel=1e-9, abs=1e-9)
            assert fit.slope == pytest.approx(beta[1], rel=1e-9, abs=1e-9)
            assert fit.residuals.sum() == pytest.approx(0.0, abs=1e-9)
            assert float(fit.residuals @ x) == pytest.approx(0.0, abs=1e-9)

    def test_constant_x_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            ols_fit([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_short_input_rejected(self):
        with pytest.raises(ValueError, match="two points"):
            ols_fit([1.0], [2.0])


class TestImpactScores:
    def test_linear_relation_zero_impacts(self):
        a = np.array([1.0, 2.0, 3.0, 4.0])
        a_hat = 0.5 * a + 0.1
        report = impact_scores(a, a_hat, [f"c{i}" for i in range(4)], ["s0"] * 4)
        assert np.allclose(report.impacts, 0.0, atol=1e-12)
        assert report.r_squared == pytest.approx(1.0)

    def test_impacts_sum_to_zero(self):
        rng = np.random.default_rng(44)
        a = rng.random(30) + 0.1
        a_hat = a * rng.random(30)
        report = impact_scores(a, a_hat, [f"c{i}" for i in range(30)], ["s0"] * 30)
        assert report.impacts.sum() == pytest.approx(0.0, abs=1e-9)
        assert np.all(report.shocked_accessibility <= report.accessibility)

    def test_sole_supplier_border_cells_hit_hardest(self):
        # Interior cells keep most accessibility under their worst shock;
        # border cells with a sole supplier collapse to zero.
        rng = np.random.default_rng(45)
        interior = []
        for _ in range(20):
            row = rng.uniform(0.2, 0.4, size=4)
            interior.append(row)
        border = []
        for _ in range(6):
            row = np.zeros(4)
            row[0] = rng.uniform(0.9, 1.1)  # one dominant supplier
            border.append(row)
        entries = np.vstack(interior + border)
        m = matrix_of(entries / entries.max())
        cell_ids = [f"i{i}" for i in range(20)] + [f"b{i}" for i in range(6)]
        report = worst_case_shock_report(m, cell_ids, ["s0", "s1", "s2", "s3"])
        border_impacts = report.impacts[20:]
        interior_impacts = report.impacts[:20]
        assert border_impacts.mean() < interior_impacts.mean()
        assert np.all(report.shocked_accessibility[20:] == 0.0)

    def test_scenario_requires_sites(self):
        with pytest.raises(ValueError, match="non-empty"):
            ShockScenario(saturated_sites=frozenset())

import numpy as np
import pytest

from survcontour.contour import (
    ContourSurface,
    build_quantile_curves,
    build_stratified_panels,
    build_surface,
    to_surface3d,
)
from survcontour.cox import fit_cox
from survcontour.dataset import AdjusterProfile, ColumnRoles, default_adjuster_profile
from survcontour.errors import DataError, ModelValidationError
from survcontour.fine_gray import fit_fine_gray
from survcontour.jsonio import dumps, loads
from survcontour.rsf import fit_rsf

from conftest import make_dataset, simulate_cox_data

EMPTY_PROFILE = AdjusterProfile({})


def cox_setup(seed=1, n=60):
    ds, roles = simulate_cox_data(np.random.default_rng(seed), n)
    return fit_cox(ds, roles), ds, roles


class TestBuildSurface:
    def test_rows_equal_direct_predictions_exactly(self):
        fit, ds, roles = cox_setup()
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=12)
        for r in (0, 5, 11):
            direct = fit.predict({"x": surf.predictor_grid[r]}, surf.time_grid)
            assert np.array_equal(surf.prob[r], direct)

    def test_grid_endpoints_and_shape(self):
        fit, ds, roles = cox_setup()
        x = ds.covariates["x"].values
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=50)
        assert surf.prob.shape == (50, surf.time_grid.size)
        assert surf.predictor_grid[0] == float(x.min())
        assert surf.predictor_grid[-1] == float(x.max())
        assert surf.time_grid[0] == 0.0
        assert surf.time_grid[-1] == float(ds.time.max())
        assert surf.time_grid.size <= 200

    def test_time_grid_thinning_cap(self):
        rng = np.random.default_rng(2)
        n = 500
        ds, roles = simulate_cox_data(rng, n)
        fit = fit_cox(ds, roles)
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_time_grid=60)
        assert surf.time_grid.size <= 60
        assert surf.time_grid[0] == 0.0
        assert surf.time_grid[-1] == float(ds.time.max())
        with pytest.raises(DataError):
            build_surface(fit, ds, roles, EMPTY_PROFILE, n_time_grid=500)

    def test_histogram_one_value_per_bin(self):
        x = np.arange(20, dtype=float) + 0.5
        rng = np.random.default_rng(3)
        time = rng.exponential(size=20)
        status = np.ones(20, dtype=int)
        ds = make_dataset(time, status, x=x)
        roles = ColumnRoles("time", "status", "x")
        fit = fit_cox(ds, roles)
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, bins=20)
        assert np.array_equal(surf.histogram_counts, np.ones(20, dtype=np.int64))
        assert surf.histogram_counts.sum() == ds.n

    def test_monotone_rows_by_outcome_kind(self):
        fit, ds, roles = cox_setup(4)
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=8)
        assert np.all(np.diff(surf.prob, axis=1) <= 1e-12)
        assert np.all((surf.prob >= 0) & (surf.prob <= 1))

    def test_cif_surface_monotone_non_decreasing(self):
        rng = np.random.default_rng(5)
        n = 50
        x = rng.normal(size=n)
        t1 = rng.exponential(scale=np.exp(-0.5 * x))
        t2 = rng.exponential(scale=1.2, size=n)
        time = np.minimum(t1, t2)
        status = np.where(t1 <= t2, 1, 2)
        ds = make_dataset(time, status, x=x)
        roles = ColumnRoles("time", "status", "x")
        fg = fit_fine_gray(ds, roles)
        surf = build_surface(fg, ds, roles, EMPTY_PROFILE, n_pred_grid=6)
        assert surf.outcome_kind == "cif"
        assert np.all(np.diff(surf.prob, axis=1) >= -1e-12)

    def test_constant_predictor_rejected(self):
        ds = make_dataset([1, 2, 3], [1, 1, 0], x=[2.0, 2.0, 2.0])
        roles = ColumnRoles("time", "status", "x")
        fit = fit_cox(ds, roles, covariates=())
        with pytest.raises(DataError, match="constant predictor"):
            build_surface(fit, ds, roles, EMPTY_PROFILE)

    def test_rsf_ci_request_rejected(self):
        rng = np.random.default_rng(6)
        ds, roles = simulate_cox_data(rng, 40)
        fit = fit_rsf(ds, roles, n_trees=3, nodesize=10, seed=0)
        with pytest.raises(ModelValidationError, match="CI unsupported"):
            build_surface(fit, ds, roles, EMPTY_PROFILE, ci=True)

    def test_ci_bands_bracket_point_estimates(self):
        fit, ds, roles = cox_setup(7, n=40)
        surf = build_surface(
            fit, ds, roles, EMPTY_PROFILE, n_pred_grid=5, ci=True, ci_b=15, seed=2
        )
        assert surf.lower.shape == surf.prob.shape
        assert np.all(surf.lower <= surf.upper + 1e-15)

    def test_profile_must_match_adjusters(self):
        fit, ds, roles = cox_setup(8)
        with pytest.raises(DataError, match="adjuster"):
            build_surface(fit, ds, roles, AdjusterProfile({"zzz": (1.0, "user")}))

    def test_quantile_trim_option(self):
        fit, ds, roles = cox_setup(25, n=120)
        x = ds.covariates["x"].values
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=10,
                             trim=0.05)
        assert surf.predictor_grid[0] == float(np.quantile(x, 0.05))
        assert surf.predictor_grid[-1] == float(np.quantile(x, 0.95))
        # histogram still reflects the full observed distribution
        assert int(surf.histogram_counts.sum()) == ds.n

    def test_extrapolation_flags(self):
        fit, ds, roles = cox_setup(9)
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE)
        last = fit.last_knot()
        expected = [int(j) for j in range(surf.time_grid.size)
                    if surf.time_grid[j] > last]
        assert surf.flags["extrapolated_columns"] == expected


class TestAdjusters:
    def test_adjusters_fixed_at_profile(self):
        rng = np.random.default_rng(10)
        n = 50
        x = rng.normal(size=n)
        a = rng.normal(size=n)
        time = rng.exponential(scale=np.exp(-0.4 * x + 0.3 * a))
        status = np.ones(n, dtype=int)
        ds = make_dataset(time, status, x=x, a=a)
        roles = ColumnRoles("time", "status", "x", adjusters=("a",))
        fit = fit_cox(ds, roles)
        profile = default_adjuster_profile(ds, roles)
        surf = build_surface(fit, ds, roles, profile, n_pred_grid=4)
        r = 2
        direct = fit.predict(
            {"x": surf.predictor_grid[r], "a": profile.value("a")}, surf.time_grid
        )
        assert np.array_equal(surf.prob[r], direct)
        override = profile.with_overrides({"a": 1.5})
        surf2 = build_surface(fit, ds, roles, override, n_pred_grid=4)
        assert not np.array_equal(surf.prob, surf2.prob)
        assert surf2.adjusters.entries["a"] == (1.5, "user")


class TestQuantileCurves:
    def test_type7_quantiles_of_1_to_100(self):
        x = np.arange(1.0, 101.0)
        rng = np.random.default_rng(11)
        ds = make_dataset(rng.exponential(size=100), np.ones(100, dtype=int), x=x)
        roles = ColumnRoles("time", "status", "x")
        fit = fit_cox(ds, roles, covariates=())
        qc = build_quantile_curves(fit, ds, roles, EMPTY_PROFILE)
        assert np.allclose(
            qc.predictor_values, [10.9, 30.7, 50.5, 70.3, 90.1], atol=1e-12
        )

    def test_null_effect_curves_identical(self):
        rng = np.random.default_rng(12)
        ds, roles = simulate_cox_data(rng, 40)
        fit = fit_cox(ds, roles, covariates=())
        qc = build_quantile_curves(fit, ds, roles, EMPTY_PROFILE)
        for i in range(1, 5):
            assert np.array_equal(qc.curves[0], qc.curves[i])

    def test_extreme_levels_bracket_median_curve(self):
        fit, ds, roles = cox_setup(13, n=80)
        qc = build_quantile_curves(fit, ds, roles, EMPTY_PROFILE)
        lo, mid, hi = qc.curves[0], qc.curves[2], qc.curves[4]
        low_bound = np.minimum(lo, hi)
        high_bound = np.maximum(lo, hi)
        assert np.all(low_bound <= mid + 1e-12)
        assert np.all(mid <= high_bound + 1e-12)

    def test_ci_bands_when_requested(self):
        fit, ds, roles = cox_setup(14, n=40)
        qc = build_quantile_curves(
            fit, ds, roles, EMPTY_PROFILE, ci=True, ci_b=10, seed=1
        )
        assert qc.lower.shape == qc.curves.shape
        assert np.all(qc.lower <= qc.upper + 1e-15)


class TestPanels:
    def stratified_setup(self, seed=15, n=80, levels=("a", "b", "c", "d")):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=n)
        strata = rng.choice(levels, size=n)
        base = {lvl: 0.5 + i for i, lvl in enumerate(levels)}
        scale = np.array([np.exp(-0.5 * xi) * base[s] for xi, s in zip(x, strata)])
        time = rng.exponential(scale=scale)
        status = rng.integers(0, 2, size=n)
        status[:4] = 1
        ds = make_dataset(time, status, strata=strata, x=x)
        roles = ColumnRoles("time", "status", "x", strata="group")
        return fit_cox(ds, roles), ds, roles

    def test_four_panels_in_first_appearance_order(self):
        fit, ds, roles = self.stratified_setup()
        surf = build_stratified_panels(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=6)
        labels = [label for label, _ in surf.panels]
        assert labels == list(ds.strata.levels)
        for label, panel in surf.panels:
            assert panel.prob.shape[0] == 6
            assert np.all((panel.prob >= 0) & (panel.prob <= 1))
            assert np.array_equal(panel.predictor_grid, surf.predictor_grid)

    def test_single_stratum_equals_plain_surface(self):
        rng = np.random.default_rng(16)
        n = 30
        x = rng.normal(size=n)
        time = rng.exponential(scale=np.exp(-0.5 * x))
        ds = make_dataset(time, np.ones(n, dtype=int), strata=["only"] * n, x=x)
        roles = ColumnRoles("time", "status", "x", strata="group")
        fit = fit_cox(ds, roles)
        panels = build_stratified_panels(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=5)
        plain = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=5)
        assert panels.panels is None
        assert np.array_equal(panels.prob, plain.prob)

    def test_empty_stratum_omitted_with_flag(self):
        fit, ds, roles = self.stratified_setup(seed=17)
        keep = ds.strata.values != "b"
        filtered = ds.subset(np.flatnonzero(keep))
        surf = build_stratified_panels(fit, filtered, roles, EMPTY_PROFILE,
                                       n_pred_grid=4)
        labels = [label for label, _ in surf.panels]
        assert "b" not in labels
        assert surf.flags["omitted_strata"] == ["b"]

    def test_per_stratum_time_grids(self):
        fit, ds, roles = self.stratified_setup(seed=18)
        surf = build_stratified_panels(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=4)
        for label, panel in surf.panels:
            rows = ds.strata.values == label
            assert panel.time_grid[-1] == float(ds.time[rows].max())


class TestSurface3D:
    def test_z_bit_equal_to_prob(self):
        fit, ds, roles = cox_setup(19)
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=7)
        s3 = to_surface3d(surf)
        assert np.array_equal(s3.z, surf.prob)
        assert s3.ci_layers is None

    def test_ci_layers_present_iff_bands(self):
        fit, ds, roles = cox_setup(20, n=40)
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=4,
                             ci=True, ci_b=8, seed=5)
        s3 = to_surface3d(surf)
        assert np.array_equal(s3.ci_layers["lower"], surf.lower)
        assert np.array_equal(s3.ci_layers["upper"], surf.upper)

    def test_panels_convert_independently(self):
        panels_case = TestPanels()
        fit, ds, roles = panels_case.stratified_setup(seed=21)
        surf = build_stratified_panels(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=4)
        s3 = to_surface3d(surf)
        for (label_a, panel3d), (label_b, panel2d) in zip(s3.panels, surf.panels):
            assert label_a == label_b
            assert np.array_equal(panel3d.z, panel2d.prob)


class TestSerialization:
    def test_round_trip_value_identical(self):
        fit, ds, roles = cox_setup(22, n=40)
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=6,
                             ci=True, ci_b=6, seed=3)
        payload = loads(dumps(surf.to_dict()))
        again = ContourSurface.from_dict(payload)
        assert np.array_equal(again.time_grid, surf.time_grid)
        assert np.array_equal(again.predictor_grid, surf.predictor_grid)
        assert np.array_equal(again.prob, surf.prob)
        assert np.array_equal(again.lower, surf.lower)
        assert np.array_equal(again.upper, surf.upper)
        assert np.array_equal(again.histogram_counts, surf.histogram_counts)
        assert again.adjusters.entries == surf.adjusters.entries
        assert again.flags == surf.flags
        assert dumps(again.to_dict()) == dumps(surf.to_dict())

    def test_schema_field_names(self):
        fit, ds, roles = cox_setup(23)
        surf = build_surface(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=4)
        d = surf.to_dict()
        assert set(d) == {
            "schema_version", "outcome_kind", "time_grid", "predictor_grid",
            "prob", "histogram", "adjusters", "flags",
        }
        assert set(d["histogram"]) == {"edges", "counts"}
        assert d["schema_version"] == 1

    def test_panel_schema_round_trip(self):
        panels_case = TestPanels()
        fit, ds, roles = panels_case.stratified_setup(seed=24)
        surf = build_stratified_panels(fit, ds, roles, EMPTY_PROFILE, n_pred_grid=4)
        again = ContourSurface.from_dict(loads(dumps(surf.to_dict())))
        assert len(again.panels) == len(surf.panels)
        for (la, pa), (lb, pb) in zip(again.panels, surf.panels):
            assert la == lb
            assert np.array_equal(pa.prob, pb.prob)

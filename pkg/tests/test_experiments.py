"""Experiment drivers: test profile, error fits, scans, layer statistics."""

import numpy as np
import pytest

from ksgreen.cheb import chebyshev_nodes, interpolation_matrix
from ksgreen.errors import StatisticsError
from ksgreen.experiments import (
    boundary_layer_profile,
    contour_export,
    layer_settling_length,
    convergence_test,
    fit_order,
    quadrature_error_test,
    random_mode_amplitudes,
    real_root_transition_h,
    simulate_series,
    stability_scan,
)
from ksgreen.greens import ProblemParams
from ksgreen.operators import build_operators
from ksgreen.experiments import test_function as analytic_profile
from ksgreen.stepping import sbdf_scheme, seed_eigenmode_growth

P_REF = ProblemParams(nu=2e-4, delta=1e-5)


class TestTestFunction:
    def test_zero_at_boundaries(self):
        for k in (1, 3, 6, 17):
            val, _, _ = analytic_profile(k, np.array([-1.0, 1.0]))
            assert np.max(np.abs(val)) < 1e-15

    def test_zero_at_origin(self):
        val, _, _ = analytic_profile(5, 0.0)
        assert abs(val) < 1e-15

    def test_second_derivative_vanishes_at_boundaries(self):
        _, d2, _ = analytic_profile(6, np.array([-1.0, 1.0]))
        assert np.max(np.abs(d2)) < 1e-9  # curvature terms cancel

    def test_derivatives_match_finite_differences(self):
        import math

        k = 4
        off = np.arange(-4, 5).astype(float)
        hx = 1e-3 / k

        def fd_weights(d):
            rhs = np.zeros(off.size)
            rhs[d] = math.factorial(d)
            return np.linalg.solve(np.vander(off, increasing=True).T, rhs)

        w2, w4 = fd_weights(2), fd_weights(4)
        rng = np.random.default_rng(3)
        for x in rng.uniform(-0.9, 0.9, 25):
            vals = analytic_profile(k, x + off * hx)[0]
            _, d2, d4 = analytic_profile(k, x)
            fd2 = (w2 @ vals) / hx**2
            fd4 = (w4 @ vals) / hx**4
            assert abs(d2 - fd2) <= 1e-7 * max(1.0, abs(d2))
            assert abs(d4 - fd4) <= 5e-5 * max(1.0, abs(d4))

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            analytic_profile(0, 0.5)


class TestQuadratureError:
    def test_decay_with_grid_order(self):
        e_coarse = quadrature_error_test(P_REF, 120, 6)
        e_fine = quadrature_error_test(P_REF, 240, 6)
        assert e_fine < 0.05 * e_coarse
        assert e_fine < 1e-4


class TestFitOrder:
    def test_recovers_synthetic_slope(self):
        h = np.array([1e-2, 5e-3, 2.5e-3, 1.25e-3])
        errors = 3.0 * h**2.5
        assert fit_order(h, errors) == pytest.approx(2.5, abs=1e-12)

    def test_window_and_nonfinite_filtering(self):
        h = np.array([1e-1, 1e-2, 1e-3, 1e-4])
        errors = np.array([np.nan, 1e-4, 1e-6, 1e-3])
        slope = fit_order(h, errors, h_window=(5e-4, 5e-2))
        assert slope == pytest.approx(2.0, abs=1e-12)

    def test_too_few_points(self):
        with pytest.raises(StatisticsError):
            fit_order([1e-2], [1e-4])


class TestConvergence:
    def test_order2_small_case(self):
        nu = 5e-5
        rows = convergence_test(
            2, nu, 1000.0, -0.2, 700, 0.25 * nu,
            [nu / 20.0, nu / 40.0, nu / 80.0], workers=4,
        )
        hs = [r[0] for r in rows]
        errs = [r[2] for r in rows]
        assert all(r[3] == "ok" for r in rows)
        slope = fit_order(hs, errs)
        assert slope == pytest.approx(2.0, abs=0.4)

    def test_blowup_recorded_not_raised(self):
        nu = 1e-5  # under-resolved on a coarse grid: blows up
        rows = convergence_test(1, nu, 1000.0, -0.2, 80, 100.0 * nu, [nu])
        assert rows[0][3].startswith("blowup@")


class TestStabilityScan:
    def test_real_root_refusal(self):
        nu = 1e-3
        h_bad = 2.0 * real_root_transition_h(nu, 1, 0.0)
        res = stability_scan(1, 80, [nu], [h_bad])
        assert res.verdicts[0, 0] == -1
        assert res.verdict(0, 0) == "refused"

    def test_transition_curve_value(self):
        # S = 1 exactly at the returned step size
        nu = 1e-3
        for o in (1, 2, 3, 4):
            h = real_root_transition_h(nu, o, 0.0)
            delta = sbdf_scheme(o).delta(h)
            assert delta / (4.0 * nu) == pytest.approx(1.0, rel=1e-12)

    def test_stable_and_unstable_points(self):
        res = stability_scan(1, 200, [1e-3], [1e-4], rng_seed=5, workers=4)
        assert res.verdicts[0, 0] == 0
        res2 = stability_scan(1, 60, [1e-5], [1e-6], rng_seed=5,
                              horizon_scaled=150, workers=4)
        assert res2.verdicts[0, 0] > 0  # under-resolved grid blows up

    def test_deterministic_rerun(self):
        kw = dict(rng_seed=9, horizon_scaled=20, workers=2)
        a = stability_scan(2, 100, [1e-3], [1e-4, 5e-5], **kw)
        b = stability_scan(2, 100, [1e-3], [1e-4, 5e-5], **kw)
        assert np.array_equal(a.verdicts, b.verdicts)

    def test_seed_spectrum_scaling(self):
        rng = np.random.default_rng(0)
        odd, even = random_mode_amplitudes(1e-4, rng, scale=1e-4)
        assert odd.size == even.size == int(np.ceil(2.0 / np.sqrt(1e-4)))
        assert np.max(np.abs(odd)) <= 1e-4 / np.sqrt(1e-4)


class TestBoundaryLayer:
    def test_constant_solution_zero_rms(self):
        n, nu = 64, 1e-3
        times = np.linspace(200 * nu, 2000 * nu, 40)
        frames = np.full((40, n + 1), 3.0)
        xbar, rms, thickness = boundary_layer_profile(times, frames, nu)
        assert np.all(rms == 0.0)
        assert np.isnan(thickness)
        assert xbar[0] == 0.0 and np.all(np.diff(xbar) > 0)

    def test_insufficient_samples(self):
        with pytest.raises(StatisticsError):
            boundary_layer_profile(
                np.array([0.0, 1.0]), np.zeros((2, 11)), 1e-3
            )

    def test_known_profile_thickness(self):
        # rms rises like 1 - exp(-xbar/4): 90% of plateau at ~4*ln(10)
        n, nu = 400, 1e-3
        x = chebyshev_nodes(n).nodes
        xbar = (x + 1.0) / np.sqrt(nu)
        shape = 1.0 - np.exp(-xbar / 4.0)
        shape *= 1.0 - np.exp(-(2.0 / np.sqrt(nu) - xbar) / 4.0)  # right wall
        rng = np.random.default_rng(1)
        times = np.linspace(200 * nu, 2000 * nu, 64)
        frames = shape[None, :] * rng.choice([-1.0, 1.0], (64, 1)) / np.sqrt(nu)
        _, _, thickness = boundary_layer_profile(times, frames, nu)
        assert thickness == pytest.approx(4.0 * np.log(10.0), rel=0.1)


class TestSettlingLength:
    def test_flat_profile_settles_at_zero(self):
        xbar = np.linspace(0.0, 60.0, 400)
        assert layer_settling_length(xbar, np.full(400, 2.0)) == 0.0

    def test_rise_overshoot_dip_shape(self):
        # excursions beyond the band end where the dip re-enters it
        xbar = np.linspace(0.0, 60.0, 2000)
        rms = 1.0 - np.exp(-xbar / 3.0) + 0.3 * np.exp(-((xbar - 10.0) / 2.0) ** 2) \
            - 0.25 * np.exp(-((xbar - 14.0) / 2.0) ** 2)
        got = layer_settling_length(xbar, rms, band=0.1)
        # last 10% excursion: the dip at xbar ~ 14 decays below 0.1 by ~15.9
        assert got == pytest.approx(15.9, abs=0.5)

    def test_band_widening_shrinks_length(self):
        xbar = np.linspace(0.0, 60.0, 2000)
        rms = 1.0 - np.exp(-xbar / 4.0)
        narrow = layer_settling_length(xbar, rms, band=0.05)
        wide = layer_settling_length(xbar, rms, band=0.2)
        assert narrow > wide > 0.0
        # pure exponential approach: crossing at -4*ln(band)
        assert narrow == pytest.approx(-4.0 * np.log(0.05), abs=0.2)


class TestContourExport:
    def test_zero_field(self):
        times = np.linspace(0.0, 1.0, 5)
        frames = np.zeros((5, 65))
        t_s, xbar, field = contour_export(times, frames, 1e-3)
        assert np.all(field == 0.0)
        assert t_s.size == 5

    def test_uniform_scaled_grid(self):
        _, xbar, _ = contour_export(
            np.array([0.0]), np.zeros((1, 33)), 1e-3, n_points=50
        )
        d = np.diff(xbar)
        assert np.max(np.abs(d - d[0])) < 1e-12 * d[0]

    def test_round_trip_interpolation(self):
        n, nu = 128, 1e-3
        x = chebyshev_nodes(n).nodes
        smooth = np.exp(-3.0 * x**2) * np.sin(4.0 * x)
        t_s, xbar, field = contour_export(
            np.array([0.0]), smooth[None, :], nu, n_points=2000
        )
        # back onto the Chebyshev nodes from the uniform scaled grid
        x_even = xbar * np.sqrt(nu) - 1.0
        x_even[-1] = 1.0
        lin = np.interp(x[::-1], x_even, field[0] / np.sqrt(nu))[::-1]
        assert np.max(np.abs(lin - smooth)) < 5e-6  # linear-resample floor

        grid = chebyshev_nodes(n)
        onto = interpolation_matrix(grid, x_even)
        assert np.max(np.abs(onto.entries @ smooth - field[0] / np.sqrt(nu))) < 1e-8


class TestSimulateSeries:
    def test_samples_and_verdict(self):
        st = seed_eigenmode_growth(1e-3, 1e-4, 80, 1, [1e-3])
        ops = build_operators(st.params, 80)
        times, frames, last, verdict = simulate_series(st, ops, 20, sample_every=5)
        assert verdict == "ok"
        assert times.size == 4 and frames.shape == (4, 81)
        assert last.step_index == 20

    def test_blowup_verdict(self):
        st = seed_eigenmode_growth(1e-5, 1e-5, 60, 1, [1e-1])
        ops = build_operators(st.params, 60)
        _, _, _, verdict = simulate_series(st, ops, 2000)
        assert verdict.startswith("blowup@")

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blowup import (CylState, Dimension, IntegrationError,
                    NoPeriodicOrbitError, canonical_v, canonical_vprime,
                    canonical_vsecond, energy, fit_neck_period_law, integrate,
                    solve_by_neck, solve_by_period)
from blowup.odecore import _power_diff, canonical_vthird, ode_rhs_second


class TestDimension:
    def test_constants_n3(self):
        d = Dimension(3)
        assert d.p == 5.0
        assert d.q == 6.0
        assert d.quarter_sq == 0.25
        assert d.nonlinear_coeff == 3.0
        assert d.v_cyl == pytest.approx(12.0 ** -0.25, rel=1e-15)
        assert d.v_canonical_max == pytest.approx(2.0 ** -0.5, rel=1e-15)
        assert d.min_period == pytest.approx(2.0 * math.pi, rel=1e-15)

    def test_rejects_small_and_non_integer(self):
        with pytest.raises(ValueError):
            Dimension(2)
        with pytest.raises(TypeError):
            Dimension(3.0)
        with pytest.raises(TypeError):
            Dimension(True)

    def test_constant_solution_balances_ode(self):
        for n in range(3, 9):
            d = Dimension(n)
            assert ode_rhs_second(d, d.v_cyl) == pytest.approx(0.0, abs=1e-15)


class TestCanonicalProfile:
    def test_known_values(self):
        assert canonical_v(Dimension(3), 0.0) == pytest.approx(
            0.7071067811865476, rel=1e-15)
        assert canonical_v(Dimension(4), 1.0) == pytest.approx(
            1.0 / (2.0 * math.cosh(1.0)), rel=1e-15)

    def test_ode_residual_small_everywhere(self):
        t = np.linspace(-30.0, 30.0, 4001)
        for n in range(3, 9):
            d = Dimension(n)
            res = canonical_vsecond(d, t) - ode_rhs_second(d, canonical_v(d, t))
            assert np.max(np.abs(res)) < 1e-12

    def test_derivatives_match_finite_differences(self):
        d = Dimension(5)
        t = np.linspace(-4.0, 4.0, 81)
        h = 1e-5
        fd1 = (canonical_v(d, t + h) - canonical_v(d, t - h)) / (2 * h)
        fd2 = (canonical_vprime(d, t + h) - canonical_vprime(d, t - h)) / (2 * h)
        fd3 = (canonical_vsecond(d, t + h) - canonical_vsecond(d, t - h)) / (2 * h)
        assert np.max(np.abs(fd1 - canonical_vprime(d, t))) < 1e-9
        assert np.max(np.abs(fd2 - canonical_vsecond(d, t))) < 1e-9
        assert np.max(np.abs(fd3 - canonical_vthird(d, t))) < 1e-8

    def test_no_overflow_at_extreme_arguments(self):
        d = Dimension(8)
        v = canonical_v(d, np.array([-700.0, 700.0]))
        assert np.all(np.isfinite(v))
        assert np.all(v >= 0)

    def test_zero_energy(self):
        # the canonical profile is the homoclinic orbit at energy level 0
        d = Dimension(4)
        t = np.linspace(-10.0, 10.0, 101)
        h = energy(d, canonical_v(d, t), canonical_vprime(d, t))
        assert np.max(np.abs(h)) < 1e-14


class TestIntegration:
    def test_constant_solution_stays_constant(self):
        d = Dimension(3)
        traj = integrate(d, CylState(0.0, d.v_cyl, 0.0), (0.0, 50.0))
        assert np.max(np.abs(traj.v(np.linspace(0, 50, 500)) - d.v_cyl)) < 1e-8

    def test_energy_drift_tiny(self):
        d = Dimension(4)
        prof = solve_by_neck(d, 0.5 * d.v_cyl)
        traj = integrate(d, CylState(0.0, prof.vmax, 0.0), (0.0, 10 * prof.T))
        assert traj.energy_drift() < 1e-9

    def test_escape_to_zero_detected(self):
        d = Dimension(3)
        with pytest.raises(IntegrationError):
            integrate(d, CylState(0.0, 0.1, -1.0), (0.0, 20.0))

    def test_rejects_bad_initial_data(self):
        d = Dimension(3)
        with pytest.raises(ValueError):
            integrate(d, CylState(0.0, -1.0, 0.0), (0.0, 1.0))
        with pytest.raises(ValueError):
            integrate(d, CylState(0.0, 0.5, 0.0), (0.0, 1.0), tol=0.0)

    @settings(max_examples=20, deadline=None)
    @given(n=st.integers(3, 6), frac=st.floats(0.2, 0.95))
    def test_energy_is_a_first_integral(self, n, frac):
        d = Dimension(n)
        v0 = frac * d.v_canonical_max + (1 - frac) * d.v_cyl
        traj = integrate(d, CylState(0.0, v0, 0.0), (0.0, 10.0))
        h = [energy(d, s.v, s.vprime) for s in traj.states]
        assert np.max(np.abs(np.diff(h))) < 1e-10 * max(1.0, abs(h[0]))


class TestPeriodicProfiles:
    def test_round_trip_neck_and_period(self, n3):
        prof = solve_by_period(n3, 20.0)
        again = solve_by_neck(n3, prof.eta)
        assert again.T == pytest.approx(20.0, abs=1e-8)

    def test_profile_is_periodic_and_even(self, n3_profiles):
        prof = n3_profiles[20.0]
        t = np.linspace(0.3, 19.0, 57)
        assert np.max(np.abs(prof.v(t + prof.T) - prof.v(t))) < 1e-12
        assert np.max(np.abs(prof.v(-t) - prof.v(t))) < 1e-12
        assert np.max(np.abs(prof.vprime(-t) + prof.vprime(t))) < 1e-12

    def test_neck_is_the_minimum(self, n3_profiles):
        prof = n3_profiles[25.0]
        t = np.linspace(0.0, prof.T, 2000)
        assert prof.eta <= np.min(prof.v(t)) + 1e-13
        assert prof.v(prof.T / 2.0) == pytest.approx(prof.eta, rel=1e-10)

    def test_profile_solves_the_ode(self, n3, n3_profiles):
        prof = n3_profiles[15.0]
        t = np.linspace(1.0, 14.0, 200)
        h = 1e-4
        fd = (prof.v(t - h) - 2 * prof.v(t) + prof.v(t + h)) / h**2
        assert np.max(np.abs(fd - ode_rhs_second(n3, prof.v(t)))) < 1e-5

    def test_asymptotic_neck_law_constant(self, n3):
        # ln(eta) + T/4 approaches ln 2 for well-separated bumps
        prof = solve_by_period(n3, 80.0)
        assert math.log(prof.eta) + 80.0 / 4.0 == pytest.approx(
            math.log(2.0), abs=1e-6)

    def test_neck_bounds_enforced(self, n3):
        with pytest.raises(NoPeriodicOrbitError):
            solve_by_neck(n3, 0.0)
        with pytest.raises(NoPeriodicOrbitError):
            solve_by_neck(n3, n3.v_cyl)
        with pytest.raises(NoPeriodicOrbitError):
            solve_by_period(n3, 0.9 * n3.min_period)

    def test_extreme_period_warns(self, n3):
        with pytest.warns(RuntimeWarning):
            solve_by_period(n3, 0.95 * n3.period_ceiling)


class TestPowerDiff:
    @settings(max_examples=50, deadline=None)
    @given(t=st.floats(-5.0, 5.0), w=st.floats(-0.05, 0.05))
    def test_matches_direct_difference_when_benign(self, t, w):
        d = Dimension(3)
        vs = float(canonical_v(d, t))
        w = w * vs  # keep the perturbation relative
        direct = (vs + w) ** d.p - vs**d.p
        assert _power_diff(d, vs, w) == pytest.approx(direct, abs=2e-15 * vs**d.p)

    def test_full_accuracy_below_machine_epsilon(self):
        d = Dimension(3)
        vs, w = 0.5, 1e-40
        # direct evaluation would return exactly 0 here
        assert _power_diff(d, vs, w) == pytest.approx(
            d.p * vs ** (d.p - 1) * w, rel=1e-12)


class TestNeckPeriodFit:
    def test_fit_recovers_the_slope(self, n3):
        fit = fit_neck_period_law(n3, [15.0, 20.0, 25.0])
        assert fit.slope == pytest.approx(-0.25, rel=0.01)
        assert fit.residual < 0.1

    def test_degenerate_inputs_rejected(self, n3):
        with pytest.raises(ValueError):
            fit_neck_period_law(n3, [15.0, 20.0])
        with pytest.raises(ValueError):
            fit_neck_period_law(n3, [20.0, 20.0, 20.0])
        with pytest.raises(ValueError):
            fit_neck_period_law(n3, [5.0, 15.0, 20.0])

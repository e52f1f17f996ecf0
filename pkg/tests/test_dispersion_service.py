import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.errors import BranchMismatchError, InvalidParameterError, NoRootError, OriginEvaluationError
from app.schemas.dispersion import CurveTrace, TraceSample
from app.schemas.potential import PotentialSpec
from app.services.dispersion_service import (
    check_ell_equality,
    dipolar_ell_closed_form,
    dipolar_gamma_closed_form,
    estimate_ell,
    morse_crosscheck,
    omega_squared,
    quartic_residual,
    richardson_limit,
    slice_function,
    sonic_speed,
    trace_gamma,
)
from app.services.potential_service import build_potential


def _model(kind, dim=3, **params):
    return build_potential(PotentialSpec(kind=kind, dim=dim, params=params))


class TestDispersionRelation:
    def test_delta_unit_frequency(self, delta):
        assert omega_squared(delta, [1.0, 0.0]) == pytest.approx(3.0)

    def test_sk_unit_frequency(self, sk):
        assert omega_squared(sk, [0.0, 1.0, 0.0]) == pytest.approx(2.0)

    def test_origin(self, sk):
        assert omega_squared(sk, [0.0, 0.0, 0.0]) == 0.0

    def test_dipolar_origin_rejected(self, dipolar):
        with pytest.raises(OriginEvaluationError):
            omega_squared(dipolar, [0.0, 0.0, 0.0])


class TestSonicSpeed:
    def test_delta(self):
        assert sonic_speed(_model("delta", a=2.0)).c_s == pytest.approx(2.0)

    @pytest.mark.parametrize("b", [0.4, 1.0, 2.0, 5.0])
    def test_sk_is_root_two(self, b):
        assert sonic_speed(_model("radial-sk", a=1.0, b=b)).c_s == pytest.approx(math.sqrt(2.0))

    def test_dipolar_undefined(self, dipolar):
        sonic = sonic_speed(dipolar)
        assert not sonic.defined
        with pytest.raises(ValueError):
            sonic.alpha(2.0)

    @pytest.mark.parametrize("lam", [0.25, 4.0])
    def test_scaling(self, lam):
        assert sonic_speed(_model("delta", a=0.8 * lam)).c_s == pytest.approx(
            math.sqrt(lam) * sonic_speed(_model("delta", a=0.8)).c_s)

    def test_alpha_sign(self, delta):
        sonic = sonic_speed(delta)
        assert sonic.alpha(2.0) == pytest.approx(1.0)
        assert sonic.alpha(1.0) < 0


class TestSlices:
    def test_dipolar_slices(self, dipolar):
        assert slice_function(dipolar, 2)(0.3, 0.7) == pytest.approx(0.75)
        assert slice_function(dipolar, 3)(0.0, 1.0) == pytest.approx(1.5)

    def test_residual_vanishes_on_closed_form(self, dipolar):
        t = np.array([0.01, 0.1, 0.3])
        y = dipolar_gamma_closed_form(1.0, 0.25, 2.0, t, j=3)
        assert_allclose(quartic_residual(dipolar, 3, 2.0, t, y), 0.0, atol=1e-14)

    def test_axis_out_of_range(self, delta):
        with pytest.raises(InvalidParameterError):
            slice_function(delta, 3)


class TestTrace:
    def test_delta_closed_form_root(self, delta):
        trace = trace_gamma(delta, 2, 2.0)
        t = 0.3 * 2.0 ** -np.arange(12)
        # y^2 = sqrt(1 + c^2 t^2) - 1 - t^2 without the cancellation
        expected = np.sqrt(4.0 * t ** 2 / (1.0 + np.sqrt(1.0 + 4.0 * t ** 2)) - t ** 2)
        assert_allclose([s.gamma_plus for s in trace.samples], expected, rtol=1e-10)
        # gamma+(0.1) sits between the samples at 0.15 and 0.075
        assert math.sqrt(-1.0 - 0.01 + math.sqrt(1.04)) == pytest.approx(0.0990147, abs=1e-7)

    def test_samples_decrease_and_keep_signs(self, sk):
        trace = trace_gamma(sk, 2, 1.6)
        ts = trace.ts()
        assert len(ts) == 12
        assert all(a > b for a, b in zip(ts, ts[1:]))
        assert ts[-1] >= 1e-4
        for s in trace.samples:
            assert s.gamma_plus > 0 > s.gamma_minus
            assert abs(s.residual_plus) <= 1e-10 * (1 + s.t ** 4 + 1.6 ** 2 * s.t ** 2)
            assert abs(s.residual_minus) <= 1e-10 * (1 + s.t ** 4 + 1.6 ** 2 * s.t ** 2)

    @pytest.mark.parametrize("kind,params", [("delta", {"a": 1.0}), ("radial-sk", {"a": 1.0, "b": 2.0}),
                                             ("dipolar", {"a": 1.0, "b_tilde": 0.25})])
    def test_branch_symmetry(self, kind, params):
        model = _model(kind, **params)
        trace = trace_gamma(model, 3, 2.0)
        for s in trace.samples:
            assert abs(s.gamma_minus + s.gamma_plus) <= 1e-12 * s.gamma_plus

    def test_dipolar_matches_closed_form(self, dipolar):
        c = math.sqrt(3.0)
        trace = trace_gamma(dipolar, 3, c, t_min=1e-3, t_max=0.3, n=9)
        ts = np.array(trace.ts())
        assert ts[-1] >= 1e-3
        traced = np.array([s.gamma_plus for s in trace.samples])
        assert_allclose(traced, dipolar_gamma_closed_form(1.0, 0.25, c, ts, j=3), rtol=1e-6)

    def test_below_sonic_speed_has_no_root(self, delta):
        with pytest.raises(NoRootError):
            trace_gamma(delta, 2, 1.0)

    def test_large_t_without_root_are_dropped(self, delta):
        # t^2 < c^2 - 2 only for t < 0.283
        trace = trace_gamma(delta, 2, math.sqrt(2.08))
        assert trace.dropped == [0.3]
        assert len(trace.samples) == 11

    def test_rejects_bad_arguments(self, delta):
        with pytest.raises(InvalidParameterError):
            trace_gamma(delta, 2, 0.0)
        with pytest.raises(InvalidParameterError):
            trace_gamma(delta, 2, 2.0, t_min=0.5, t_max=0.1)


class TestEll:
    def test_delta(self, delta):
        assert estimate_ell(trace_gamma(delta, 2, 2.0)) == pytest.approx(1.0, abs=1e-8)

    def test_dipolar_limits(self, dipolar):
        ell2 = estimate_ell(trace_gamma(dipolar, 2, 2.0))
        ell3 = estimate_ell(trace_gamma(dipolar, 3, 2.0))
        # the (xi_1, xi_2) slice sees the constant a - b_tilde
        assert ell2 == pytest.approx(dipolar_ell_closed_form(1.0, 0.25, 2.0, j=2), abs=1e-4)
        assert ell2 == pytest.approx(4.0 / 1.5 - 1.0, abs=1e-4)
        assert ell3 == pytest.approx(5.0 / 6.0, abs=1e-4)
        assert estimate_ell(trace_gamma(dipolar, 3, math.sqrt(3.0))) == pytest.approx(0.5, abs=1e-4)

    def test_branch_mismatch(self):
        samples = [TraceSample(t=0.1 * 2.0 ** -k, gamma_plus=0.1 * 2.0 ** -k, gamma_minus=-0.2 * 2.0 ** -k,
                               residual_plus=0.0, residual_minus=0.0) for k in range(5)]
        with pytest.raises(BranchMismatchError):
            estimate_ell(CurveTrace(j=2, c=1.0, samples=samples))

    def test_too_few_samples(self):
        samples = [TraceSample(t=0.1, gamma_plus=0.1, gamma_minus=-0.1, residual_plus=0.0, residual_minus=0.0)]
        with pytest.raises(NoRootError):
            estimate_ell(CurveTrace(j=2, c=1.0, samples=samples))

    def test_richardson_removes_polynomial_terms(self):
        hs = [0.16, 0.04, 0.01]
        values = [2.0 + 3.0 * h - 5.0 * h * h for h in hs]
        assert richardson_limit(hs, values) == pytest.approx(2.0, abs=1e-14)


class TestMorse:
    @pytest.mark.parametrize("factor", [1.1, 1.5, 2.0])
    def test_smooth_kernels_agree_with_alpha(self, factor):
        model = _model("radial-sk", dim=2, a=1.0, b=1.0)
        c = factor * math.sqrt(2.0)
        check = morse_crosscheck(model, c)
        assert check.applicable
        assert check.predicted == pytest.approx(factor ** 2 - 1.0)
        assert check.max_abs_diff <= 1e-4

    def test_delta_value(self, delta):
        check = morse_crosscheck(delta, 1.5)
        assert check.traced[2] == pytest.approx(0.125, abs=1e-6)

    def test_dipolar_not_applicable(self, dipolar):
        assert not morse_crosscheck(dipolar, 2.0).applicable


class TestEllEquality:
    def test_radial_models_are_equal(self, sk):
        report = check_ell_equality(sk, 1.6)
        assert report.equal and report.all_positive
        assert set(report.ells) == {2, 3}

    def test_dipolar_unequal_at_two(self, dipolar):
        report = check_ell_equality(dipolar, 2.0)
        assert not report.equal
        assert report.all_positive
        assert report.ells[3] == pytest.approx(5.0 / 6.0, abs=1e-4)
        assert report.max_spread > report.tolerance

    def test_dipolar_equal_where_closed_forms_cross(self, dipolar):
        # c^2 / 1.5 - 1 = (1.5 + c^2) / 3 - 1 at c^2 = 1.5, where both vanish
        assert dipolar_ell_closed_form(1.0, 0.25, math.sqrt(1.5), j=2) == pytest.approx(0.0, abs=1e-15)
        assert dipolar_ell_closed_form(1.0, 0.25, math.sqrt(1.5), j=3) == pytest.approx(0.0, abs=1e-15)

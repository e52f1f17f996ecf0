import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.errors import InvalidParameterError, OriginEvaluationError, UnsupportedDimensionError
from app.schemas.potential import PotentialSpec
from app.services.potential_service import (
    build_potential,
    check_hypotheses,
    eval_grad_scaled,
    eval_w_hat,
    radial_profile,
)

BUILT_INS = [
    PotentialSpec(kind="delta", dim=2, params={"a": 1.5}),
    PotentialSpec(kind="radial-sk", dim=3, params={"a": 1.0, "b": 2.0}),
    PotentialSpec(kind="radial-sk", dim=2, params={"a": 0.7, "b": 0.4}),
    PotentialSpec(kind="delta-plus-f", dim=3, params={"a": 1.0, "epsilon": 0.02}),
    PotentialSpec(kind="dipolar", dim=3, params={"a": 1.0, "b_tilde": 0.25}),
]


def _random_points(dim, n=1000, seed=1):
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    r = np.exp(rng.uniform(math.log(0.1), math.log(10.0), size=n))
    return dirs * r[:, None]


class TestBuild:
    def test_delta_is_constant(self):
        model = build_potential(PotentialSpec(kind="delta", dim=2, params={"a": 2.0}))
        assert eval_w_hat(model, [5.0, -3.0]) == 2.0
        assert_allclose(eval_grad_scaled(model, [0.3, 4.0]), [0.0, 0.0])

    def test_sk_flags_and_origin(self, sk):
        assert sk.radial and sk.smooth_at_origin and sk.even_per_component
        assert sk.w_hat_origin == 1.0

    def test_dipolar_flags(self, dipolar):
        assert not dipolar.radial
        assert dipolar.even_per_component
        assert not dipolar.smooth_at_origin
        assert dipolar.w_hat_origin is None
        assert radial_profile(dipolar) is None

    def test_dipolar_needs_three_dimensions(self):
        with pytest.raises(UnsupportedDimensionError):
            build_potential(PotentialSpec(kind="dipolar", dim=2, params={"a": 1.0, "b_tilde": 0.25}))

    def test_dimension_one_rejected(self):
        with pytest.raises(UnsupportedDimensionError):
            build_potential(PotentialSpec(kind="delta", dim=1))

    @pytest.mark.parametrize("params", [{"a": 0.0, "b": 1.0}, {"a": 1.0, "b": -2.0}])
    def test_sk_parameter_domain(self, params):
        with pytest.raises(InvalidParameterError):
            build_potential(PotentialSpec(kind="radial-sk", dim=3, params=params))

    def test_delta_needs_positive_a(self):
        with pytest.raises(InvalidParameterError):
            build_potential(PotentialSpec(kind="delta", dim=3, params={"a": -1.0}))

    @pytest.mark.parametrize("a", [0.0, -1.0])
    def test_dipolar_needs_positive_a(self, a):
        with pytest.raises(InvalidParameterError):
            build_potential(PotentialSpec(kind="dipolar", dim=3, params={"a": a, "b_tilde": 0.25}))

    def test_dipolar_raw_b_is_rescaled(self):
        model = build_potential(PotentialSpec(kind="dipolar", dim=3, params={"a": 1.0, "b": 3.0 / (16.0 * math.pi)}))
        assert eval_w_hat(model, [0.0, 0.0, 1.0]) == pytest.approx(1.5)

    def test_custom_radial_rejects_unsorted_table(self):
        with pytest.raises(InvalidParameterError):
            build_potential(PotentialSpec(kind="custom-radial", dim=2, table=[[0.0, 1.0], [2.0, 0.5], [1.0, 0.2]]))


class TestEvaluation:
    def test_sk_at_unit_radius(self, sk):
        assert eval_w_hat(sk, [1.0, 0.0, 0.0]) == pytest.approx(0.5)
        assert_allclose(eval_grad_scaled(sk, [1.0, 0.0, 0.0]), [-0.5, 0.0, 0.0], atol=1e-15)

    def test_dipolar_values(self, dipolar):
        assert eval_w_hat(dipolar, [0.0, 0.0, 1.0]) == pytest.approx(1.5)
        assert eval_grad_scaled(dipolar, [1.0, 0.0, 1.0])[2] == pytest.approx(0.375)

    def test_dipolar_origin_rejected(self, dipolar):
        with pytest.raises(OriginEvaluationError):
            eval_w_hat(dipolar, [0.0, 0.0, 0.0])

    def test_grad_scaled_rejects_origin(self, sk):
        with pytest.raises(OriginEvaluationError):
            eval_grad_scaled(sk, [0.0, 0.0, 0.0])

    def test_smooth_model_at_origin(self, sk):
        assert eval_w_hat(sk, [0.0, 0.0, 0.0]) == 1.0

    def test_radial_profile(self, sk):
        rho, drho = radial_profile(sk)
        assert rho(np.array([1.0]))[0] == pytest.approx(0.5)
        assert drho(np.array([1.0]))[0] == pytest.approx(-0.5)
        delta = build_potential(PotentialSpec(kind="delta", dim=2, params={"a": 3.0}))
        rho, drho = radial_profile(delta)
        assert_allclose(rho(np.array([0.0, 2.0, 9.0])), 3.0)
        assert_allclose(drho(np.array([0.0, 2.0, 9.0])), 0.0)


@pytest.mark.parametrize("spec", BUILT_INS, ids=lambda s: f"{s.kind}-{s.dim}")
class TestInvariants:
    def test_evenness_is_exact(self, spec):
        model = build_potential(spec)
        pts = _random_points(spec.dim)
        assert np.array_equal(model.w_hat(pts), model.w_hat(-pts))

    def test_even_per_component(self, spec):
        model = build_potential(spec)
        pts = _random_points(spec.dim, n=200)
        for k in range(spec.dim):
            flipped = pts.copy()
            flipped[:, k] *= -1.0
            assert_allclose(model.w_hat(flipped), model.w_hat(pts), rtol=1e-14)

    def test_gradient_matches_finite_differences(self, spec):
        model = build_potential(spec)
        pts = _random_points(spec.dim)
        h = 1e-6
        fd = np.empty_like(pts)
        for k in range(spec.dim):
            step = np.zeros(spec.dim)
            step[k] = h
            fd[:, k] = (model.w_hat(pts + step) - model.w_hat(pts - step)) / (2.0 * h)
        scaled = model.grad_scaled(pts)
        scale = np.maximum(np.abs(model.w_hat(pts)), 1.0)[:, None]
        assert_allclose(scaled / scale, pts * fd / scale, atol=1e-6)


def test_radial_reduction(sk):
    pts = _random_points(3, n=300)
    r = np.linalg.norm(pts, axis=1)
    _, drho = radial_profile(sk)
    expected = drho(r)[:, None] * pts ** 2 / r[:, None]
    assert_allclose(sk.grad_scaled(pts), expected, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("lam", [0.25, 4.0])
def test_scaling_of_delta(lam):
    base = build_potential(PotentialSpec(kind="delta", dim=3, params={"a": 1.3}))
    scaled = build_potential(PotentialSpec(kind="delta", dim=3, params={"a": 1.3 * lam}))
    pts = _random_points(3, n=50)
    assert_allclose(scaled.w_hat(pts), lam * base.w_hat(pts))


class TestHypotheses:
    def test_sk_all_pass(self, sk, grid):
        report = check_hypotheses(sk, grid)
        assert all(chk.status == "pass" for chk in report.checks())

    def test_dipolar_h4_pass_h5_fail(self, dipolar, dipolar_grid):
        report = check_hypotheses(dipolar, dipolar_grid)
        assert report.h1_to_h4_pass
        assert report.h5_regular_origin.status == "fail"
        assert report.h5_regular_origin.witness == [0.0, 0.0, 0.0]

    def test_cosine_h4_fails_near_pi(self, cosine, grid):
        report = check_hypotheses(cosine, grid)
        h4 = report.h4_nonnegative
        assert h4.status == "fail"
        assert h4.value < 0
        assert np.linalg.norm(h4.witness) == pytest.approx(math.pi, abs=0.25)

    def test_delta_h5_passes(self, delta, grid):
        report = check_hypotheses(delta, grid)
        assert report.h5_passes

    def test_sk_high_dimension_note(self, grid):
        model = build_potential(PotentialSpec(kind="radial-sk", dim=4, params={"a": 1.0, "b": 2.0}))
        report = check_hypotheses(model, grid)
        assert any("b > 3" in note for note in report.notes)

import math

import pytest

from app.core.errors import DivergentQuadratureError, InvalidParameterError
from app.schemas.certificate import PerturbationSpec
from app.schemas.potential import PotentialSpec
from app.services import perturbation_service
from app.services.certifier_service import corollary_gradient_bound
from app.services.dispersion_service import sonic_speed
from app.services.perturbation_service import epsilon_bound, sphere_area
from app.services.potential_service import build_potential


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2.0 * math.pi)
    assert sphere_area(3) == pytest.approx(4.0 * math.pi)


@pytest.mark.parametrize("dim,expected", [
    (2, 1.0 / (6.0 * math.pi)),
    (3, 1.0 / (7.0 * math.pi ** 1.5)),
])
def test_gaussian_bound(dim, expected):
    bound = epsilon_bound(PerturbationSpec(kind="gaussian"), dim)
    assert bound.bound == pytest.approx(expected, rel=1e-8)
    assert bound.f_integral == pytest.approx(math.pi ** (dim / 2.0), rel=1e-8)
    assert len(bound.scaled_derivative_l1) == dim
    assert sum(bound.scaled_derivative_l1) == pytest.approx(dim * math.pi ** (dim / 2.0), rel=1e-8)


@pytest.mark.parametrize("lam", [0.5, 3.0])
def test_bound_scales_inversely(lam):
    base = epsilon_bound(PerturbationSpec(kind="gaussian"), 3).bound
    scaled = epsilon_bound(PerturbationSpec(kind="gaussian", scale=lam), 3).bound
    assert scaled == pytest.approx(base / lam, rel=1e-10)


def test_tabulated_tent():
    # f = 1 - r on [0, 1]: ||f||_1 = pi/3, sum ||x_k d_k f||_1 = 2 pi/3 in the plane
    bound = epsilon_bound(PerturbationSpec(kind="tabulated", table=[[0.0, 1.0], [1.0, 0.0]]), 2)
    assert bound.f_l1 == pytest.approx(math.pi / 3.0, rel=1e-10)
    assert bound.bound == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-10)


def test_sonic_speed_matches_model():
    bound = epsilon_bound(PerturbationSpec(kind="gaussian"), 3)
    model = build_potential(PotentialSpec(kind="delta-plus-f", dim=3, params={"a": 1.0, "epsilon": 0.01}))
    assert bound.sonic_speed(0.01) == pytest.approx(sonic_speed(model).c_s, rel=1e-9)


def test_gradient_corollary_below_bound(grid):
    eps = 0.9 * epsilon_bound(PerturbationSpec(kind="gaussian"), 3).bound
    model = build_potential(PotentialSpec(kind="delta-plus-f", dim=3, params={"a": 1.0, "epsilon": eps}))
    assert corollary_gradient_bound(model, grid)


def test_divergent_integral(monkeypatch):
    def slow_tail(f_spec):
        return (lambda r: r ** -2.0, lambda r: -2.0 * r ** -3.0, [(1.0, math.inf)])

    monkeypatch.setattr(perturbation_service, "_profile", slow_tail)
    with pytest.raises(DivergentQuadratureError):
        epsilon_bound(PerturbationSpec(kind="gaussian"), 3)


@pytest.mark.parametrize("table", [None, [[0.0, 1.0]], [[1.0, 1.0], [0.5, 0.0]]])
def test_bad_tables(table):
    with pytest.raises(InvalidParameterError):
        epsilon_bound(PerturbationSpec(kind="tabulated", table=table), 2)


def test_dimension_one_rejected():
    with pytest.raises(InvalidParameterError):
        epsilon_bound(PerturbationSpec(kind="gaussian"), 1)

import math

import pytest

from app.schemas.potential import GridSpec, PotentialSpec
from app.services.potential_service import build_potential


@pytest.fixture
def grid():
    """Coarser than the production default, same radius range"""
    return GridSpec(n_r=80, n_dir=32)


@pytest.fixture
def dipolar_grid():
    return GridSpec.default_for(False, n_r=80, n_dir=48)


@pytest.fixture
def delta():
    return build_potential(PotentialSpec(kind="delta", dim=2, params={"a": 1.0}))


@pytest.fixture
def delta3():
    return build_potential(PotentialSpec(kind="delta", dim=3, params={"a": 1.0}))


@pytest.fixture
def sk():
    return build_potential(PotentialSpec(kind="radial-sk", dim=3, params={"a": 1.0, "b": 2.0}))


@pytest.fixture
def dipolar():
    return build_potential(PotentialSpec(kind="dipolar", dim=3, params={"a": 1.0, "b_tilde": 0.25}))


@pytest.fixture
def cosine():
    table = [[0.06 * k, math.cos(0.06 * k)] for k in range(101)]
    return build_potential(PotentialSpec(kind="custom-radial", dim=2, table=table))

import pytest

from constants import EXAMPLE_BOTH, EXAMPLE_MODEL2, EXAMPLE_SIGMA_ONLY
from laminate import BilayerSpec, Model, make_bilayer


@pytest.fixture
def both_bilayer() -> BilayerSpec:
    return BilayerSpec(**EXAMPLE_BOTH)


@pytest.fixture
def sigma_only_bilayer() -> BilayerSpec:
    return BilayerSpec(**EXAMPLE_SIGMA_ONLY)


@pytest.fixture
def gamma_only_bilayer() -> BilayerSpec:
    return BilayerSpec(sigma_a=50.0, sigma_b=50.0, gamma_a=2e6, gamma_b=1e6, phi=0.4, h=0.1, v_m=1e-2)


@pytest.fixture
def density_bilayer() -> BilayerSpec:
    return BilayerSpec(model=Model.MODEL2, **EXAMPLE_MODEL2)


@pytest.fixture
def both_spec(both_bilayer):
    return make_bilayer(both_bilayer)


@pytest.fixture
def sigma_only_spec(sigma_only_bilayer):
    return make_bilayer(sigma_only_bilayer)


@pytest.fixture
def density_spec(density_bilayer):
    return make_bilayer(density_bilayer)

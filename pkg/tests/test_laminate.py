import math

import numpy as np
import pytest

from laminate import (
    BilayerSpec,
    DegreeOverflowError,
    LaminateSpec,
    LaminateValidationError,
    Model,
    ScaleSet,
    UnitCellFunction,
    dimensionalize,
    eta_for_gaussian,
    integrate_product,
    make_bilayer,
    mean,
    nondimensionalize,
)


def test_piecewise_constant_mean_and_evaluation():
    f = UnitCellFunction.piecewise_constant([0.0, 0.3, 1.0], [10.0, 190.0])
    assert f.mean() == pytest.approx(0.3 * 10.0 + 0.7 * 190.0, rel=1e-14)
    assert f(0.1) == 10.0
    assert f(0.5) == 190.0
    # periodic extension
    assert f(1.1) == 10.0
    assert np.allclose(f(np.array([0.05, 0.95])), [10.0, 190.0])


def test_harmonic_mean_of_worked_bilayer(both_spec):
    sigma0 = 1.0 / (1.0 / both_spec.profile.sigma).mean()
    assert sigma0 == pytest.approx(29.7, abs=0.1)


def test_product_merges_breakpoints():
    f = UnitCellFunction.piecewise_constant([0.0, 0.5, 1.0], [1.0, 3.0])
    g = UnitCellFunction.piecewise_constant([0.0, 0.25, 1.0], [2.0, 4.0])
    prod = f * g
    assert np.allclose(prod.edges, [0.0, 0.25, 0.5, 1.0])
    assert prod.mean() == pytest.approx(0.25 * 2.0 + 0.25 * 4.0 + 0.5 * 12.0, rel=1e-14)
    assert integrate_product(f, g) == pytest.approx(prod.mean(), rel=1e-14)
    assert mean(g) == pytest.approx(3.5)


def test_antiderivative_of_zero_mean_is_continuous_and_periodic():
    f = UnitCellFunction.piecewise_constant([0.0, 0.2, 0.7, 1.0], [3.0, -1.0, 0.5])
    F = f.zero_mean().antiderivative()
    assert F.is_continuous()
    assert np.allclose(F.derivative()(np.array([0.1, 0.4, 0.9])), f.zero_mean()(np.array([0.1, 0.4, 0.9])))


def test_linear_pieces_integrate_exactly():
    f = UnitCellFunction.from_coefficients([0.0, 0.5, 1.0], [[0.0, 2.0], [1.0, -2.0]])
    # tent function with peak 1 at y = 0.5
    assert f.mean() == pytest.approx(0.5, rel=1e-14)
    assert f.is_continuous()
    assert f.maximum() == pytest.approx(1.0)


def test_reciprocal_needs_piecewise_constant():
    f = UnitCellFunction.from_coefficients([0.0, 1.0], [[1.0, 1.0]])
    with pytest.raises(DegreeOverflowError):
        f.reciprocal()


def test_edges_must_cover_unit_cell():
    with pytest.raises(LaminateValidationError) as info:
        UnitCellFunction.piecewise_constant([0.1, 1.0], [1.0])
    assert info.value.field == "edges"


def test_bilayer_rejects_bad_volume_fraction():
    with pytest.raises(LaminateValidationError) as info:
        BilayerSpec(sigma_a=1.0, sigma_b=2.0, gamma_a=1.0, gamma_b=1.0, phi=1.5, h=0.1, v_m=0.0)
    assert info.value.field == "phi"


def test_bilayer_rejects_nonpositive_conductivity():
    with pytest.raises(LaminateValidationError) as info:
        BilayerSpec(sigma_a=-1.0, sigma_b=2.0, gamma_a=1.0, gamma_b=1.0, phi=0.5, h=0.1, v_m=0.0)
    assert info.value.field == "sigma_a"


def test_density_bilayer_derives_capacity(density_bilayer):
    assert density_bilayer.gamma_pair == (2e6 * 1000.0, 1.4e6 * 1000.0)
    spec = make_bilayer(density_bilayer)
    assert spec.model is Model.MODEL2
    assert spec.is_sigma_constant
    assert not spec.is_rho_constant


def test_replace_keeps_other_fields(sigma_only_bilayer):
    flipped = sigma_only_bilayer.replace(v_m=-sigma_only_bilayer.v_m)
    assert flipped.v_m == -sigma_only_bilayer.v_m
    assert flipped.sigma_pair == sigma_only_bilayer.sigma_pair
    assert flipped.gamma_pair == sigma_only_bilayer.gamma_pair


def test_default_scales_normalize_profile(both_spec):
    scales = ScaleSet.default_for(both_spec)
    problem = nondimensionalize(both_spec, scales)
    assert (1.0 / problem.sigma).mean() == pytest.approx(1.0, rel=1e-14)
    assert problem.gamma.mean() == pytest.approx(1.0, rel=1e-14)
    assert problem.v == pytest.approx(both_spec.v_m / scales.v_star)


def test_dimensionalize_inverts_nondimensionalize(density_spec):
    scales = ScaleSet.default_for(density_spec, kappa_star=2.5)
    back = dimensionalize(nondimensionalize(density_spec, scales))
    assert back.h == pytest.approx(density_spec.h)
    assert back.v_m == pytest.approx(density_spec.v_m)
    assert back.profile.sigma.mean() == pytest.approx(density_spec.profile.sigma.mean())
    assert back.profile.rho.mean() == pytest.approx(density_spec.profile.rho.mean())
    assert back.profile.c_specific == pytest.approx(density_spec.profile.c_specific)


def test_eta_for_gaussian_width():
    assert eta_for_gaussian(0.1, 1.0) == pytest.approx(math.pi / 30.0)


def test_profile_table_matches_bilayer(both_bilayer):
    rows = [
        {"breakpoint": 0.0, "sigma": both_bilayer.sigma_a, "gamma": both_bilayer.gamma_a},
        {"breakpoint": both_bilayer.phi, "sigma": both_bilayer.sigma_b, "gamma": both_bilayer.gamma_b},
    ]
    spec = LaminateSpec.from_profile_table(rows, h=both_bilayer.h, v_m=both_bilayer.v_m)
    reference = make_bilayer(both_bilayer)
    assert spec.profile.sigma.mean() == pytest.approx(reference.profile.sigma.mean())
    assert spec.profile.gamma.mean() == pytest.approx(reference.profile.gamma.mean())


def test_profile_table_rejects_unsorted_breakpoints():
    rows = [
        {"breakpoint": 0.0, "sigma": 1.0, "gamma": 1.0},
        {"breakpoint": 0.6, "sigma": 2.0, "gamma": 1.0},
        {"breakpoint": 0.4, "sigma": 3.0, "gamma": 1.0},
    ]
    with pytest.raises(LaminateValidationError):
        LaminateSpec.from_profile_table(rows, h=0.1, v_m=0.0)


def _bump(y):
    return y * (1.0 - y)


@pytest.mark.parametrize("degree, ratio", [(0, 2.0), (1, 4.0)])
def test_sampled_profile_pointwise_order(degree, ratio):
    y = np.linspace(0.0, 1.0, 4001)[:-1]
    errors = [np.max(np.abs(UnitCellFunction.sample(_bump, n, degree=degree)(y) - _bump(y))) for n in (32, 64)]
    assert errors[0] / errors[1] == pytest.approx(ratio, rel=0.15)


def test_linear_sample_is_continuous_but_not_invertible():
    f = UnitCellFunction.sample(_bump, 16, degree=1)
    assert f.is_continuous()
    assert f(0.25) == pytest.approx(_bump(0.25), abs=1e-15)
    assert f.mean() == pytest.approx(1.0 / 6.0 - 1.0 / (6.0 * 16 ** 2), rel=1e-12)
    with pytest.raises(DegreeOverflowError):
        f.reciprocal()
    with pytest.raises(LaminateValidationError):
        UnitCellFunction.sample(_bump, 16, degree=2)

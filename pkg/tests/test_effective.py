import numpy as np
import pytest

from cell import dimensional_order0, homogenize
from effective import (
    EffectivePde,
    EffectiveVariantError,
    Variant,
    cascade_solvers_spec,
    closed_form_pde,
    compare_dispersion,
    dispersion_table,
    effective_pde,
    effective_prediction,
    nondimensional_coefficients,
    pde_dispersion,
    select_variant,
)

_PDE_FIELDS = ("coeff_t", "coeff_x", "coeff_xx", "coeff_xxx", "coeff_txx")


def test_pde_dispersion_formula():
    pde = EffectivePde(2.0, 0.5, -3.0, 0.25, -0.1, Variant.SIGMA_ONLY_ORDER2)
    kappa = np.array([0.0, 0.7, 2.0])
    expected = (0.5 * kappa + 3.0j * kappa ** 2 - 0.25 * kappa ** 3) / (2.0 + 0.1 * kappa ** 2)
    assert np.allclose(pde_dispersion(pde, kappa), expected, rtol=1e-15)


def test_pde_must_be_diffusive():
    with pytest.raises(EffectiveVariantError):
        EffectivePde(1.0, 0.0, 1.0, 0.0, 0.0, Variant.ORDER0_BOTH)
    with pytest.raises(EffectiveVariantError):
        EffectivePde(0.0, 0.0, -1.0, 0.0, 0.0, Variant.ORDER0_BOTH)


def test_variant_selection(both_spec, sigma_only_spec, density_spec):
    assert select_variant(homogenize(both_spec), 0) is Variant.ORDER0_BOTH
    assert select_variant(homogenize(both_spec), 2) is Variant.CASCADE_GENERAL
    assert select_variant(homogenize(sigma_only_spec), 2) is Variant.SIGMA_ONLY_ORDER2
    assert select_variant(homogenize(density_spec), 2) is Variant.MODEL2_RHO_ONLY_ORDER2
    with pytest.raises(EffectiveVariantError):
        select_variant(homogenize(both_spec), 3)


def test_general_laminate_has_no_single_order2_equation(both_spec):
    with pytest.raises(EffectiveVariantError):
        effective_pde(both_spec, 2)
    relation = effective_prediction(both_spec, 2)
    assert relation.order == 1
    assert relation.variant is Variant.ORDER1_BOTH


def test_leading_order_speed(both_spec):
    pde = effective_pde(both_spec, 0)
    order0 = dimensional_order0(homogenize(both_spec))
    assert pde.coeff_t == pytest.approx(order0["gamma0"], rel=1e-12)
    assert pde.coeff_xx == pytest.approx(-order0["sigma0"], rel=1e-12)
    assert pde.coeff_x / pde.coeff_t == pytest.approx(-order0["v_m_W0"] / order0["gamma0"], rel=1e-10)


def test_leading_order_does_not_depend_on_wavenumber_scale(both_spec):
    a = effective_pde(both_spec, 0, kappa_star=1.0)
    b = effective_pde(both_spec, 0, kappa_star=7.0)
    for name in _PDE_FIELDS:
        assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-10, abs=1e-300)


def test_sigma_only_assembled_matches_closed_form(sigma_only_spec):
    assembled = effective_pde(sigma_only_spec, 2)
    closed = closed_form_pde(homogenize(sigma_only_spec), Variant.SIGMA_ONLY_ORDER2)
    for name in ("coeff_t", "coeff_xx", "coeff_xxx", "coeff_txx"):
        assert getattr(assembled, name) == pytest.approx(getattr(closed, name), rel=1e-8)
    assert assembled.coeff_x == 0.0
    assert assembled.coeff_xxx < 0.0


def test_density_assembled_matches_closed_form(density_spec):
    assembled = effective_pde(density_spec, 2)
    closed = closed_form_pde(homogenize(density_spec), Variant.MODEL2_RHO_ONLY_ORDER2)
    for name in ("coeff_t", "coeff_xx", "coeff_xxx", "coeff_txx"):
        assert getattr(assembled, name) == pytest.approx(getattr(closed, name), rel=1e-8)


def test_closed_form_rejects_wrong_laminate(both_spec):
    with pytest.raises(EffectiveVariantError):
        closed_form_pde(homogenize(both_spec), Variant.SIGMA_ONLY_ORDER2)


def test_leading_models_miss_sigma_only_propagation(sigma_only_spec):
    kappa = np.linspace(1.0, 30.0, 12)
    for order in (0, 1):
        omega = effective_prediction(sigma_only_spec, order)(kappa)
        assert np.all(np.abs(omega.real) <= 1e-12 * np.abs(omega))
    omega2 = effective_prediction(sigma_only_spec, 2)(kappa)
    assert np.all(omega2.real > 0.0)
    assert np.all(omega2.imag > 0.0)


def test_dispersion_table_frames(sigma_only_spec):
    relation = effective_prediction(sigma_only_spec, 2)
    kappa = np.linspace(0.0, 10.0, 6)
    table = dispersion_table(relation, kappa)
    assert len(table) == 12
    fixed = table[table["frame"] == "fixed"].reset_index(drop=True)
    moving = table[table["frame"] == "moving"].reset_index(drop=True)
    assert np.allclose(fixed["re_omega"] - moving["re_omega"], sigma_only_spec.v_m * kappa)
    assert np.allclose(fixed["im_omega"], moving["im_omega"])
    assert set(table["order"]) == {2}


def test_compare_dispersion_against_itself(density_spec):
    relation = effective_prediction(density_spec, 2)
    table = dispersion_table(relation, np.linspace(0.0, 20.0, 5))
    merged = compare_dispersion(table, table)
    assert len(merged) == 10
    assert np.all(merged["abs_error"] == 0.0)
    assert np.all(merged["rel_error"] == 0.0)


def test_cascade_levels(both_spec, density_spec):
    pipeline = homogenize(both_spec)
    cascade = cascade_solvers_spec(pipeline.coefficients, pipeline.scales)
    assert [level.index for level in cascade.levels] == [0, 1, 2]
    assert cascade.eta == pytest.approx(pipeline.coefficients.eta)
    assert cascade.levels[0].operator == (
        pipeline.coefficients.gamma0,
        -pipeline.coefficients.W0,
        -pipeline.coefficients.sigma0,
    )
    density = homogenize(density_spec)
    assert cascade_solvers_spec(density.coefficients).model == "model2"


def test_cascade_folds_to_sigma_only_equation(sigma_only_spec):
    pipeline = homogenize(sigma_only_spec)
    cascade = cascade_solvers_spec(pipeline.coefficients, pipeline.scales)
    folded = cascade.combined_single_parameter()
    single = nondimensional_coefficients(pipeline.coefficients, Variant.SIGMA_ONLY_ORDER2)
    assert folded[0] == pytest.approx(single[0], rel=1e-12)
    for a, b in zip(folded[2:], single[2:]):
        assert a == pytest.approx(b, rel=1e-8, abs=1e-14)

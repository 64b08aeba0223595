import numpy as np
import pytest

from cell import (
    CellProblem,
    PipelineError,
    SolvabilityError,
    bilayer_closed_forms,
    dimensional_order0,
    homogenize,
    nonreciprocity_model1,
    sample_correctors,
    solve_cell,
)
from laminate import UnitCellFunction, make_bilayer

_Y = np.linspace(0.01, 0.99, 37)


def test_solve_cell_satisfies_flux_equation():
    sigma = UnitCellFunction.piecewise_constant([0.0, 0.4, 1.0], [2.0, 5.0])
    G = UnitCellFunction.piecewise_constant([0.0, 0.4, 1.0], [1.0, -3.0])
    H = UnitCellFunction.piecewise_constant([0.0, 0.5, 1.0], [1.0, -1.0])
    X = solve_cell(CellProblem(sigma, G, H, "X"))
    flux = sigma * X.slope + G
    assert abs(X.value.mean()) < 1e-14
    assert X.value.is_continuous()
    assert flux.is_continuous()
    assert np.allclose(flux.derivative()(_Y), H(_Y), atol=1e-12)


def test_cell_problem_checks_solvability():
    sigma = UnitCellFunction.constant(1.0)
    with pytest.raises(SolvabilityError) as info:
        CellProblem(sigma, UnitCellFunction.constant(0.0), UnitCellFunction.constant(1.0), "bad")
    assert info.value.problem == "bad"


def test_leading_order_reproduces_worked_bilayer(both_spec):
    values = dimensional_order0(homogenize(both_spec))
    assert values["sigma0"] == pytest.approx(29.7, abs=0.1)
    assert values["gamma0"] == pytest.approx(0.3 * 2e6 + 0.7 * 1.4e6)
    assert values["v_m_W0"] == pytest.approx(values["v_m_W0_from_scaled"], rel=1e-10)
    assert values["v_m_W0"] != 0.0


def test_first_corrector_gives_constant_flux(both_spec):
    pipeline = homogenize(both_spec)
    sigma = pipeline.problem.sigma
    P = pipeline.correctors.require("P")
    flux = sigma * (P.slope + 1.0)
    assert np.allclose(flux(_Y), pipeline.coefficients.sigma0, rtol=1e-12)
    assert pipeline.coefficients.sigma0 == pytest.approx(1.0 / (1.0 / sigma).mean(), rel=1e-12)


def test_drift_vanishes_for_single_parameter_modulation(sigma_only_spec, gamma_only_bilayer):
    assert abs(homogenize(sigma_only_spec).coefficients.W0) < 1e-12
    assert abs(homogenize(make_bilayer(gamma_only_bilayer)).coefficients.W0) < 1e-12


def test_sigma_only_nonreciprocity_closed_form(sigma_only_spec):
    result = nonreciprocity_model1(homogenize(sigma_only_spec))
    assert result["name"] == "N_sigma"
    assert result["assembled"] == pytest.approx(result["closed_form"], rel=1e-8)
    assert result["assembled"] > 0.0


def test_gamma_only_nonreciprocity_closed_form(gamma_only_bilayer):
    result = nonreciprocity_model1(homogenize(make_bilayer(gamma_only_bilayer)))
    assert result["name"] == "N_gamma"
    assert result["assembled"] == pytest.approx(result["closed_form"], rel=1e-8)
    assert result["assembled"] > 0.0


def test_nonreciprocity_sign_follows_modulation_speed(sigma_only_bilayer):
    forward = homogenize(make_bilayer(sigma_only_bilayer)).coefficients.e_xxx
    backward = homogenize(make_bilayer(sigma_only_bilayer.replace(v_m=-sigma_only_bilayer.v_m))).coefficients.e_xxx
    assert backward == pytest.approx(-forward, rel=1e-10)


def test_nonreciprocity_needs_single_parameter(both_spec):
    with pytest.raises(PipelineError):
        nonreciprocity_model1(homogenize(both_spec))


def test_static_laminate_has_no_speed_correctors(sigma_only_bilayer):
    pipeline = homogenize(make_bilayer(sigma_only_bilayer.replace(v_m=0.0)))
    assert pipeline.correctors.require("Q").value.max_abs() == 0.0
    assert pipeline.coefficients.e_xxx == pytest.approx(0.0, abs=1e-14)


def test_beta1_matches_closed_form(sigma_only_bilayer):
    pipeline = homogenize(make_bilayer(sigma_only_bilayer))
    closed = bilayer_closed_forms(sigma_only_bilayer)
    assert closed["beta1"] == pytest.approx(0.05075, rel=1e-3)
    assert pipeline.coefficients.beta1 == pytest.approx(closed["beta1"], rel=1e-10)
    assert pipeline.coefficients.beta2 == pytest.approx(closed["beta2"], rel=1e-10)


def test_beta3_matches_closed_form(density_bilayer):
    pipeline = homogenize(make_bilayer(density_bilayer))
    closed = bilayer_closed_forms(density_bilayer)
    assert closed["beta3"] == pytest.approx(7.68e8, rel=1e-12)
    assert pipeline.coefficients.beta3 == pytest.approx(closed["beta3"], rel=1e-10)


def test_density_modulation_has_no_drift_and_reduced_form(density_spec):
    coeffs = homogenize(density_spec).coefficients
    assert coeffs.W0 == 0.0
    assert coeffs.N_adv == pytest.approx(coeffs.N_adv_reduced, rel=1e-8)
    assert coeffs.N_adv > 0.0


def test_sample_correctors_table(sigma_only_spec):
    table = sample_correctors(homogenize(sigma_only_spec).correctors, resolution=11)
    assert len(table) == 11
    for column in ("y", "P", "P_prime", "Q", "R", "L"):
        assert column in table.columns
    assert table["y"].iloc[0] == 0.0

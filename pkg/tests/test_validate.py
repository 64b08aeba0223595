import numpy as np
import pytest

from cell import homogenize
from laminate import Model, UnitCellFunction
from validate import (
    OracleReport,
    beta_audit,
    fitted_order,
    identity_audit,
    identity_report,
    order_errors,
    order_improvement,
    order0_reproduction,
    phi_polynomial_audit,
    product_moment,
    quadrature_moment,
    random_laminate,
    summarize,
    taylor_consistency,
)


def _failures(reports):
    return [r.to_dict() for r in reports if not r.passed]


def test_oracle_report_compare_and_summary():
    good = OracleReport.compare("same", 1.0, 1.0 + 1e-12)
    bad = OracleReport.compare("different", 1.0, 1.1)
    tiny = OracleReport.vanishing("tiny", 1e-15, 1.0)
    assert good.passed and tiny.passed
    assert not bad.passed
    assert bad.rel_error == pytest.approx(0.1 / 1.1)
    assert summarize([good, bad, tiny]) == {"total": 3, "passed": 2, "failed": 1}
    assert set(good.to_dict()) >= {"name", "lhs", "rhs", "abs_error", "rel_error", "tolerance", "pass", "provenance"}


def test_oracle_report_at_least():
    assert OracleReport.at_least("order", 2.95, 3.0, 0.3).passed
    assert not OracleReport.at_least("order", 2.5, 3.0, 0.3).passed


def test_fitted_order_recovers_power_law():
    h = np.array([0.1, 0.05, 0.025])
    assert fitted_order(h, 3.0 * h ** 2) == pytest.approx(2.0, abs=1e-12)
    assert fitted_order(h, [0.0, 0.0, 1e-3]) == float("inf")


def test_quadrature_matches_exact_means():
    tent = UnitCellFunction.from_coefficients([0.0, 0.5, 1.0], [[0.0, 2.0], [1.0, -2.0]])
    estimate = quadrature_moment(tent)
    assert estimate.converged
    assert estimate.value == pytest.approx(0.5, rel=1e-13)
    smooth = quadrature_moment(lambda y: np.exp(y))
    assert smooth.value == pytest.approx(np.e - 1.0, rel=1e-12)


def test_product_moment_uses_all_breakpoints():
    f = UnitCellFunction.piecewise_constant([0.0, 0.3, 1.0], [1.0, 2.0])
    g = UnitCellFunction.piecewise_constant([0.0, 0.6, 1.0], [3.0, 5.0])
    assert product_moment(f, g).value == pytest.approx((f * g).mean(), rel=1e-13)


@pytest.mark.parametrize("spec_name", ["both_spec", "sigma_only_spec", "density_spec"])
def test_identities_hold_for_worked_bilayers(spec_name, request):
    spec = request.getfixturevalue(spec_name)
    reports = identity_report(homogenize(spec))
    assert reports
    assert _failures(reports) == []


def test_random_laminate_respects_freeze():
    rng = np.random.default_rng(3)
    spec = random_laminate(rng, model=Model.MODEL1, freeze="gamma")
    assert spec.is_gamma_constant
    assert 2 <= spec.profile.sigma.edges.size - 1 <= 6
    density = random_laminate(rng, model=Model.MODEL2, freeze="sigma")
    assert density.model is Model.MODEL2
    assert density.is_sigma_constant


def test_identity_audit_few_seeds():
    reports = identity_audit(range(5))
    assert _failures(reports) == []
    assert any("freeze=gamma" in r.name for r in reports)


def test_beta_audit(sigma_only_bilayer, density_bilayer):
    assert _failures(beta_audit(sigma_only_bilayer)) == []
    reports = beta_audit(density_bilayer)
    assert any(r.name.startswith("beta3") for r in reports)
    assert _failures(reports) == []


def test_order0_reproduction(both_bilayer):
    assert _failures(order0_reproduction(both_bilayer)) == []


def test_phi_polynomial_audit(density_bilayer):
    reports = phi_polynomial_audit(density_bilayer)
    assert _failures(reports) == []
    with pytest.raises(ValueError):
        phi_polynomial_audit(density_bilayer, samples=5)


def test_taylor_consistency_rejects_general_laminate(both_bilayer):
    with pytest.raises(ValueError):
        taylor_consistency(both_bilayer)


@pytest.mark.slow
def test_identity_audit_default_seeds():
    assert _failures(identity_audit()) == []


@pytest.mark.slow
def test_taylor_consistency_sigma_only(sigma_only_bilayer):
    report = taylor_consistency(sigma_only_bilayer)
    assert report.passed, report.to_dict()


@pytest.mark.slow
def test_taylor_consistency_density(density_bilayer):
    report = taylor_consistency(density_bilayer)
    assert report.passed, report.to_dict()


def test_order_improvement_rejects_two_modulated_parameters(both_bilayer):
    with pytest.raises(ValueError):
        order_improvement(both_bilayer)


@pytest.mark.slow
def test_first_order_matches_order0_for_sigma_only(sigma_only_bilayer):
    errors = order_errors(sigma_only_bilayer)
    assert set(errors) == {0, 1, 2}
    assert errors[1] == pytest.approx(errors[0], rel=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("spec_name", ["sigma_only_bilayer", "density_bilayer"])
def test_order2_improves_on_order0(spec_name, request):
    report = order_improvement(request.getfixturevalue(spec_name))
    assert report.passed, report
    assert report.lhs < report.rhs

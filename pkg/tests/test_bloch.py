import math

import numpy as np
import pytest

from bloch import (
    DispersionBranch,
    Frame,
    SearchRectangle,
    branches_table,
    count_roots,
    find_branch,
    find_branches,
    layer_exponents,
    newton_root,
    parity_defects,
    uniform_ladder,
)
from effective import effective_prediction
from laminate import BilayerSpec, Model, make_bilayer


@pytest.fixture
def uniform_bilayer() -> BilayerSpec:
    return BilayerSpec(sigma_a=5.0, sigma_b=5.0, gamma_a=1e6, gamma_b=1e6, phi=0.5, h=0.1, v_m=0.0)


def test_layer_exponents_solve_characteristic_quadratic():
    sigma, gamma, b = 3.0, 2e6, 40.0
    omega = np.array([1e-4 + 2e-5j, -3e-3 + 1e-2j])
    r_plus, r_minus, root = layer_exponents(sigma, gamma, b, omega)
    for r in (r_plus, r_minus):
        residual = sigma * r * r + b * r - 1j * omega * gamma
        scale = sigma * np.abs(r) ** 2 + np.abs(b * r) + np.abs(omega * gamma)
        assert np.all(np.abs(residual) <= 1e-12 * scale)
    assert np.allclose(r_plus - r_minus, root / sigma)


def test_uniform_medium_matches_diffusion(uniform_bilayer):
    for kappa in np.linspace(2.0, 0.9 * math.pi / uniform_bilayer.h, 6):
        exact = 1j * 5.0 * kappa ** 2 / 1e6
        result = newton_root(kappa, exact * 1.02, uniform_bilayer)
        assert result.converged
        assert abs(result.omega - exact) <= 1e-8 * abs(exact)


def test_uniform_ladder_is_a_root(uniform_bilayer):
    kappa = 5.0
    target = uniform_ladder(5.0, 1e6, 0.0, uniform_bilayer.h, kappa, 1)
    result = newton_root(kappa, target * (1.0 + 1e-3), uniform_bilayer)
    assert result.converged
    assert abs(result.omega - target) <= 1e-8 * abs(target)


def test_static_laminate_is_reciprocal(sigma_only_bilayer):
    static = sigma_only_bilayer.replace(v_m=0.0)
    predictor = effective_prediction(make_bilayer(static), 2)
    for kappa in (3.0, 10.0, 20.0):
        forward = newton_root(kappa, predictor(kappa), static)
        backward = newton_root(-kappa, predictor(kappa), static)
        assert forward.converged and backward.converged
        assert abs(forward.omega.real) <= 1e-8 * abs(forward.omega)
        assert abs(forward.omega - backward.omega) <= 1e-8 * abs(forward.omega)


def test_frame_change_round_trip():
    kappa = np.array([0.0, 1.0, 2.0])
    branch = DispersionBranch(
        kappa=kappa,
        omega=np.array([0.0, 1j, 4j]),
        frame=Frame.FIXED,
        branch_index=0,
        residuals=np.zeros(3),
        converged=np.ones(3, dtype=bool),
        v_m=0.5,
    )
    moving = branch.in_frame(Frame.MOVING)
    assert np.allclose(moving.omega, branch.omega - 0.5 * kappa)
    assert np.allclose(moving.in_frame("fixed").omega, branch.omega)
    assert branch.in_frame(Frame.FIXED) is branch
    assert branch.n_failed == 0


def test_branches_table_layout(uniform_bilayer):
    branch = find_branch(uniform_bilayer, kappa_grid=np.linspace(1.0, 10.0, 4))
    table = branches_table([branch])
    assert list(table.columns) == ["branch", "kappa", "re_omega", "im_omega", "residual", "frame"]
    assert len(table) == 8
    assert set(table["frame"]) == {"fixed", "moving"}


def test_find_branch_rejects_unsorted_grid(uniform_bilayer):
    with pytest.raises(ValueError):
        find_branch(uniform_bilayer, kappa_grid=[0.0, 2.0, 1.0])


def test_count_roots_in_small_box(uniform_bilayer):
    kappa = 10.0
    root = 1j * 5.0 * kappa ** 2 / 1e6
    box = SearchRectangle(-0.5 * abs(root), 0.5 * abs(root), 0.5 * root.imag, 1.5 * root.imag)
    assert count_roots(kappa, box, uniform_bilayer, Model.MODEL1) == 1


@pytest.mark.slow
def test_sigma_only_branch_propagates_with_modulation(sigma_only_bilayer):
    kappa = np.linspace(0.0, math.pi / sigma_only_bilayer.h, 25)
    branch = find_branch(sigma_only_bilayer, kappa_grid=kappa)
    assert branch.n_failed == 0
    assert np.all(branch.residuals <= 1e-10)
    assert np.all(branch.omega.real[1:] > 0.0)


@pytest.mark.slow
def test_both_modulated_branch_propagates_against_modulation(both_bilayer):
    kappa = np.linspace(0.0, math.pi / both_bilayer.h, 25)
    branch = find_branch(both_bilayer, kappa_grid=kappa)
    assert branch.n_failed == 0
    assert np.all(branch.omega.real[1:] < 0.0)


@pytest.mark.slow
def test_several_branches_are_sorted_by_damping(sigma_only_bilayer):
    kappa = np.linspace(5.0, math.pi / sigma_only_bilayer.h, 4)
    branches = find_branches(sigma_only_bilayer, kappa=kappa, n=3)
    assert len(branches) == 3
    damping = np.array([b.omega.imag for b in branches])
    assert np.all(np.isfinite(damping))
    assert np.all(np.diff(damping, axis=0) >= 0.0)


def test_parity_needs_negated_grid(uniform_bilayer):
    kappa = np.linspace(0.0, 10.0, 3)
    branch = find_branch(uniform_bilayer, kappa_grid=kappa)
    with pytest.raises(ValueError):
        parity_defects(branch, branch)


@pytest.mark.slow
def test_moving_sigma_only_branch_has_conjugate_parity(sigma_only_bilayer):
    kappa = np.linspace(0.0, 20.0, 9)
    forward = find_branch(sigma_only_bilayer, kappa_grid=kappa)
    backward = find_branch(sigma_only_bilayer, kappa_grid=-kappa)
    defects = parity_defects(forward, backward)
    assert defects["points"] == 9
    assert defects["max_re_odd_defect"] < 1e-8
    assert defects["max_im_even_defect"] < 1e-8
    assert defects["max_asymmetry"] > 1e-6

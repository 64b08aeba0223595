import math

import numpy as np
import pytest

from cell import homogenize
from effective import EffectivePde, Variant, cascade_solvers_spec, effective_pde, pde_dispersion
from fdsolver import (
    SimConfig,
    SolverConfigError,
    diagnostics_table,
    energy_audit,
    gaussian_solution,
    initial_state,
    l2_error,
    mirror,
    run,
    run_cascade,
    scheme_dispersion,
    snapshots_table,
    step,
)
from handlers.simulate import config_for, default_t_end, simulate
from laminate import make_bilayer


@pytest.fixture
def drift_pde() -> EffectivePde:
    # speed 0.2, diffusivity 0.05
    return EffectivePde(1.0, 0.2, -0.05, 0.0, 0.0, Variant.ORDER0_BOTH)


def _config(n_points: int, t_end: float = 10.0, dt: float = 0.01, snapshots=None) -> SimConfig:
    return SimConfig(
        domain_length=40.0,
        n_points=n_points,
        dt=dt,
        t_end=t_end,
        snapshot_times=snapshots if snapshots is not None else (t_end,),
        x0=20.0,
        nu=1.0,
    )


def test_config_rejects_odd_or_tiny_grids():
    with pytest.raises(SolverConfigError):
        _config(129)
    with pytest.raises(SolverConfigError):
        _config(4)
    with pytest.raises(SolverConfigError):
        _config(128, snapshots=(11.0,))


def test_gaussian_matches_closed_form(drift_pde):
    config = _config(512)
    final = run(drift_pde, config)[-1]
    reference = gaussian_solution(drift_pde, config, config.t_end)
    assert final.time == pytest.approx(10.0)
    assert l2_error(final.values, reference, config.dx) < 1e-2


def test_spatial_convergence_is_second_order(drift_pde):
    sizes = [128, 256, 512]
    errors = []
    for n in sizes:
        config = _config(n)
        final = run(drift_pde, config)[-1]
        errors.append(l2_error(final.values, gaussian_solution(drift_pde, config, config.t_end), config.dx))
    dx = [40.0 / n for n in sizes]
    slope = np.polyfit(np.log(dx), np.log(errors), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.3)


def test_single_steps_match_run(drift_pde):
    config = _config(128, t_end=0.05, dt=0.01)
    state = initial_state(drift_pde, config)
    for _ in range(5):
        state = step(drift_pde, state, config.dt)
    assert state.step_index == 5
    assert state.time == pytest.approx(0.05)
    assert np.allclose(state.values, run(drift_pde, config)[-1].values, atol=1e-12)


def test_mass_and_energy_audits(drift_pde):
    config = config_for(drift_pde, nu=1.0, t_end=10.0, x0=20.0)
    result = simulate(drift_pde, config)
    assert result["mass_ok"]
    assert result["mass_drift"] <= 1e-10
    assert result["energy"].passed
    assert result["energy"].monotone
    energies = [s.diagnostics.energy for s in result["states"]]
    assert energies[-1] < energies[0]


def test_centroid_moves_with_effective_speed(drift_pde):
    times = tuple(np.linspace(0.0, 20.0, 11))
    config = _config(1024, t_end=20.0, dt=0.05, snapshots=times)
    states = run(drift_pde, config)
    centroids = np.array([s.diagnostics.centroid for s in states])
    velocity = np.polyfit([s.time for s in states], centroids, 1)[0]
    assert velocity == pytest.approx(0.2, rel=1e-2)


def test_third_moment_follows_dispersive_coefficient():
    pde = EffectivePde(1.0, 0.2, -0.05, 0.01, 0.0, Variant.SIGMA_ONLY_ORDER2)
    final = run(pde, _config(1024))[-1]
    assert final.diagnostics.third_moment == pytest.approx(6.0 * 0.01 * 10.0, rel=2e-2)


def test_even_operator_keeps_profile_symmetric():
    static = EffectivePde(1.0, 0.0, -0.05, 0.0, 0.0, Variant.ORDER0_BOTH)
    final = run(static, _config(256))[-1]
    assert abs(final.diagnostics.third_moment) < 1e-10
    assert abs(final.diagnostics.energy_skewness) < 1e-10
    assert np.allclose(mirror(final, 20.0).values, final.values, atol=1e-13)


def test_mirror_round_trip_and_grid_check(drift_pde):
    config = _config(256)
    state = run(drift_pde, config)[-1]
    twice = mirror(mirror(state, 20.0), 20.0)
    assert np.array_equal(twice.values, state.values)
    with pytest.raises(SolverConfigError):
        mirror(state, 20.0 + 0.5 * config.dx)


def test_config_for_puts_centre_on_grid_node(sigma_only_spec):
    pde = effective_pde(sigma_only_spec, 2)
    config = config_for(pde, nu=0.1, t_end=1.0, x0=3.0)
    position = config.x0 / config.dx
    assert position == pytest.approx(round(position), abs=1e-9)
    assert config.n_points % 2 == 0
    assert config.nu / config.dx >= 8


def test_scheme_dispersion_approaches_continuum():
    pde = EffectivePde(1.0, 0.2, -0.05, 0.01, -0.02, Variant.SIGMA_ONLY_ORDER2)
    kappa = 0.5
    exact = complex(pde_dispersion(pde, np.array([kappa]))[0])
    discrete = scheme_dispersion(pde, kappa, dx=0.01, dt=0.01)
    assert abs(discrete - exact) <= 1e-3 * abs(exact)


def test_gaussian_solution_needs_convection_diffusion():
    pde = EffectivePde(1.0, 0.0, -0.05, 0.01, 0.0, Variant.SIGMA_ONLY_ORDER2)
    with pytest.raises(SolverConfigError):
        gaussian_solution(pde, _config(128), 1.0)


def test_energy_audit_rejects_forced_equation():
    forced = EffectivePde(1.0, 0.0, -0.05, 0.0, 0.0, Variant.ORDER0_BOTH, source=lambda x, t: np.zeros_like(x))
    with pytest.raises(SolverConfigError):
        energy_audit(forced, [])


def test_tables(drift_pde):
    config = _config(128, snapshots=(0.0, 5.0, 10.0))
    states = run(drift_pde, config)
    assert len(states) == 3
    snaps = snapshots_table(states, config.x)
    assert list(snaps.columns) == ["time", "x", "theta"]
    assert len(snaps) == 3 * 128
    diag = diagnostics_table(states)
    assert len(diag) == 3
    assert list(diag.columns) == ["time", "mass", "energy", "centroid", "energy_skewness", "third_moment"]


def test_cascade_starts_from_gaussian_and_keeps_mass(both_spec):
    pipeline = homogenize(both_spec)
    cascade = cascade_solvers_spec(pipeline.coefficients, pipeline.scales)
    pde = effective_pde(both_spec, 0)
    config = config_for(pde, nu=1.0, t_end=100.0, x0=8.0)
    states = run_cascade(cascade, config)
    first = states[0]
    assert first.time == 0.0
    offsets = (config.x - config.x0 + 0.5 * config.domain_length) % config.domain_length - 0.5 * config.domain_length
    assert np.allclose(first.values, np.exp(-(offsets ** 2)), atol=1e-12)
    masses = np.array([s.diagnostics.mass for s in states])
    assert np.allclose(masses, masses[0], rtol=1e-10)


@pytest.mark.slow
def test_sigma_only_field_is_skewed_and_mirrors(sigma_only_bilayer):
    forward_pde = effective_pde(make_bilayer(sigma_only_bilayer), 2)
    backward_pde = effective_pde(make_bilayer(sigma_only_bilayer.replace(v_m=-sigma_only_bilayer.v_m)), 2)
    nu = 0.1
    config = config_for(forward_pde, nu=nu, t_end=default_t_end(forward_pde, nu), x0=3.0)
    forward = simulate(forward_pde, config)
    backward = simulate(backward_pde, config)
    assert forward["energy"].passed
    final = forward["snapshots"][-1].diagnostics
    assert final.third_moment < 0.0
    mirrored = backward["snapshots"][-1].diagnostics
    assert mirrored.third_moment == pytest.approx(-final.third_moment, rel=1e-8)
    assert mirrored.energy_skewness == pytest.approx(-final.energy_skewness, rel=1e-8, abs=1e-14)
    flipped = mirror(backward["snapshots"][-1], config.x0)
    assert np.max(np.abs(flipped.values - forward["snapshots"][-1].values)) <= 1e-10
    assert math.isfinite(final.centroid)

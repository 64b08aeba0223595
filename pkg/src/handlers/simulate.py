import logging
import math
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from cell import homogenize
from command_utils import _report
from constants import BOX_NU_MULTIPLE, EXIT_AUDIT, EXIT_OK, FIELD_SNAPSHOTS, MASS_RTOL, POINTS_PER_NU, SIGMA_ONLY_RUN_DIFFUSION_FRACTION
from context import RunContext
from data.tables import _write_json, _write_table
from effective import EffectivePde, Variant, assemble_pde, cascade_solvers_spec, select_variant
from fdsolver import (
    FieldState,
    SimConfig,
    diagnostics_table,
    energy_audit,
    run,
    run_cascade,
    snapshots_table,
)
from laminate import eta_for_gaussian
from logging_utils import _log_audit

_log = logging.getLogger(__name__)


def grid_points(length: float, nu: float, minimum: int = 512, multiple: int = 2) -> int:
    """Smallest multiple of `multiple` (even) giving POINTS_PER_NU points per nu."""
    step = multiple if multiple % 2 == 0 else 2 * multiple
    wanted = max(minimum, POINTS_PER_NU * length / nu)
    return int(step * math.ceil(wanted / step))


def config_for(
    pde: EffectivePde,
    nu: float,
    t_end: float,
    x0: Optional[float] = None,
    n_points: Optional[int] = None,
    domain_length: Optional[float] = None,
    snapshots: int = FIELD_SNAPSHOTS,
) -> SimConfig:
    """
    Grid for a Gaussian run. With x0 given the box length is a multiple of 2 x0
    and the point count a multiple of the same factor, so x0 is a grid node.
    """
    length = domain_length if domain_length is not None else BOX_NU_MULTIPLE * nu
    multiple = 2
    if x0 is not None and domain_length is None:
        repeats = max(1, math.ceil(length / (2.0 * x0)))
        length = 2.0 * x0 * repeats
        multiple = 2 * repeats
    if n_points is None:
        n_points = grid_points(length, nu, multiple=multiple)
    return SimConfig.for_pde(pde, nu=nu, t_end=t_end, n_points=n_points, x0=x0, n_snapshots=snapshots, domain_length=length)


def mass_drift(states: Sequence[FieldState]) -> float:
    masses = np.array([s.diagnostics.mass for s in states])
    if masses.size == 0 or masses[0] == 0.0:
        return 0.0
    return float(np.max(np.abs(masses - masses[0])) / abs(masses[0]))


def snapshot_states(states: Sequence[FieldState], times: Sequence[float]) -> List[FieldState]:
    picked = []
    for t in times:
        best = min(states, key=lambda s: abs(s.time - t))
        if abs(best.time - t) <= 1e-9 * max(1.0, abs(t)):
            picked.append(best)
    return picked


def simulate(pde: EffectivePde, config: SimConfig) -> Dict[str, Any]:
    """Run with every step kept; returns snapshots plus mass and energy audits."""
    states = run(pde, config, record_all=True)
    audit = energy_audit(pde, states)
    drift = mass_drift(states)
    return {
        "states": states,
        "snapshots": snapshot_states(states, config.snapshot_times),
        "energy": audit,
        "mass_drift": drift,
        "mass_ok": drift <= MASS_RTOL,
    }


def default_t_end(pde: EffectivePde, nu: float) -> float:
    return SIGMA_ONLY_RUN_DIFFUSION_FRACTION * nu * nu * pde.coeff_t / (-pde.coeff_xx)


def handle_simulate(ctx: RunContext) -> int:
    sim = ctx.config.get("simulation") or {}
    nu = ctx.args.nu or sim.get("nu") or 1.0
    pipeline = homogenize(ctx.spec, scales=ctx.scales)
    variant = select_variant(pipeline, ctx.args.order)
    use_cascade = ctx.args.cascade or variant is Variant.CASCADE_GENERAL
    if use_cascade and not ctx.args.cascade:
        _log.info("order %d has no single equation for this laminate; integrating the cascade", ctx.args.order)
    if use_cascade:
        variant = Variant.ORDER0_BOTH
    pde = assemble_pde(pipeline.coefficients, pipeline.scales, variant, v_m=ctx.spec.v_m)
    t_end = ctx.args.t_end or sim.get("t_end") or default_t_end(pde, nu)
    config = config_for(
        pde,
        nu=nu,
        t_end=t_end,
        x0=sim.get("x0"),
        n_points=ctx.args.points or sim.get("n_points"),
        domain_length=sim.get("domain_length"),
        snapshots=sim.get("snapshots", FIELD_SNAPSHOTS),
    )
    payload: Dict[str, Any] = {
        "pde": pde.to_dict(),
        "grid": {"domain_length": config.domain_length, "n_points": config.n_points, "dt": config.dt, "x0": config.x0, "nu": nu},
        "eta": eta_for_gaussian(ctx.spec.h, nu),
    }

    if use_cascade:
        cascade = cascade_solvers_spec(pipeline.coefficients, pipeline.scales)
        snapshots = run_cascade(cascade, config)
        drift = mass_drift(snapshots)
        payload["cascade"] = {"eta": cascade.eta, "model": cascade.model}
        payload["mass_drift"] = drift
        ok = drift <= MASS_RTOL
    else:
        result = simulate(pde, config)
        snapshots = result["snapshots"]
        payload["energy_audit"] = result["energy"].to_dict()
        payload["mass_drift"] = result["mass_drift"]
        ok = result["energy"].passed and result["mass_ok"]
        counts = {"total": 2, "passed": int(result["energy"].passed) + int(result["mass_ok"])}
        counts["failed"] = counts["total"] - counts["passed"]
        _log_audit(ctx.out_dir, ctx.run_id, counts, "simulate")

    _write_table(ctx.output("snapshots.csv"), snapshots_table(snapshots, config.x))
    _write_table(ctx.output("diagnostics.csv"), diagnostics_table(snapshots))
    _write_json(ctx.output("simulate.json"), payload)
    label = "cascade" if use_cascade else pde.variant.value
    _report(f"simulate: {len(snapshots)} snapshots, variant {label}, audits {'ok' if ok else 'FAILED'}")
    return EXIT_OK if ok else EXIT_AUDIT

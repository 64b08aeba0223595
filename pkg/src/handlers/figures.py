"""
Named data recipes. Each writes plot-ready CSV under <out>/<figure_id>/ together
with the laminate descriptor it used and a summary.json of the properties the
corresponding figure illustrates.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from bloch import Frame, branches_table, find_branch, find_branches
from command_utils import _kappa_grid, _report
from config import ConfigError, _bilayer_from_config, _laminate_from_config, _save_laminate_config
from constants import (
    BRANCH_RECIPE_COUNT,
    BRANCH_RECIPE_KAPPA_POINTS,
    EXAMPLE_BOTH,
    EXAMPLE_MODEL2,
    EXAMPLE_SIGMA_ONLY,
    EXIT_AUDIT,
    EXIT_OK,
    FIELD_LEADING_NU,
    FIELD_LEADING_T_END,
    FIELD_LEADING_X0,
    FIELD_ORDER2_NUS,
    FIELD_ORDER2_X0,
    RECIPE_KAPPA_POINTS,
    SYMMETRIC_THIRD_MOMENT_BOUND,
)
from context import RunContext
from data.tables import _write_json, _write_table
from effective import compare_dispersion, dispersion_table, effective_pde, effective_prediction
from fdsolver import diagnostics_table, gaussian_solution, l2_error, mirror, snapshots_table
from handlers.simulate import config_for, default_t_end, simulate
from laminate import BilayerSpec, LaminateSpec, make_bilayer

_log = logging.getLogger(__name__)


def _descriptor(example: Dict[str, float], model: str) -> Dict[str, Any]:
    bilayer = {k: v for k, v in example.items() if k not in ("h", "v_m")}
    return {"model": model, "bilayer": bilayer, "h": example["h"], "v_m": example["v_m"], "scales": {"kappa_star": 1.0}}


@dataclass(frozen=True)
class Recipe:
    figure_id: str
    description: str
    descriptor: Dict[str, Any]
    orders: Tuple[int, ...] = ()


RECIPES: Dict[str, Recipe] = {
    "dd-both": Recipe("dd-both", "exact branch with order-0 and order-1 models, both parameters modulated", _descriptor(EXAMPLE_BOTH, "model1"), (0, 1)),
    "dd-sigma-only": Recipe("dd-sigma-only", "exact branch with order-0, order-1 and order-2 models, conductivity only", _descriptor(EXAMPLE_SIGMA_ONLY, "model1"), (0, 1, 2)),
    "dd-model2": Recipe("dd-model2", "exact branch with order-0 and order-2 models, density modulation", _descriptor(EXAMPLE_MODEL2, "model2"), (0, 2)),
    "dd-branches": Recipe("dd-branches", "three least damped exact branches, conductivity only", _descriptor(EXAMPLE_SIGMA_ONLY, "model1")),
    "field-leading": Recipe("field-leading", "order-0 field from a Gaussian, both parameters modulated", _descriptor(EXAMPLE_BOTH, "model1"), (0,)),
    "field-order2": Recipe("field-order2", "order-2 field for three Gaussian widths, conductivity only", _descriptor(EXAMPLE_SIGMA_ONLY, "model1"), (2,)),
}


def _laminate_for(ctx: RunContext, recipe: Recipe) -> Tuple[Dict[str, Any], LaminateSpec, Optional[BilayerSpec]]:
    if ctx.args.config:
        return ctx.config, ctx.spec, ctx.bilayer
    config = dict(recipe.descriptor)
    return config, _laminate_from_config(config), _bilayer_from_config(config)


def _sign_fraction(kappa: np.ndarray, omega: np.ndarray) -> Dict[str, float]:
    """Share of kappa > 0 points whose phase velocity Re(Omega)/kappa is negative or positive."""
    mask = kappa > 0.0
    if not np.any(mask):
        return {"negative": 0.0, "positive": 0.0}
    velocity = omega.real[mask] / kappa[mask]
    return {"negative": float(np.mean(velocity < 0.0)), "positive": float(np.mean(velocity > 0.0))}


def dispersion_recipe(ctx: RunContext, recipe: Recipe, spec: LaminateSpec, bilayer: BilayerSpec) -> Dict[str, Any]:
    points = ctx.args.kappa_points or RECIPE_KAPPA_POINTS
    kappa = _kappa_grid(bilayer.h, ctx.args.kappa_max, points)
    branch = find_branch(bilayer, kappa_grid=kappa, tol=ctx.args.tol)
    exact = branches_table([branch])
    _write_table(ctx.output(f"{recipe.figure_id}/exact.csv"), exact)

    fixed = branch.in_frame(Frame.FIXED)
    summary: Dict[str, Any] = {
        "failed_points": branch.n_failed,
        "exact_phase_velocity_sign": _sign_fraction(fixed.kappa, fixed.omega),
        "orders": {},
    }
    window = (kappa * bilayer.h >= 0.1) & (kappa * bilayer.h <= 1.0)
    for order in recipe.orders:
        relation = effective_prediction(spec, order)
        table = dispersion_table(relation, kappa)
        _write_table(ctx.output(f"{recipe.figure_id}/order{order}.csv"), table)
        merged = compare_dispersion(exact, table)
        _write_table(ctx.output(f"{recipe.figure_id}/compare_order{order}.csv"), merged)
        in_window = merged[(merged["frame"] == "fixed") & np.isin(merged["kappa"].round(12), np.round(kappa[window], 12))]
        omega = relation(kappa)
        summary["orders"][str(order)] = {
            "variant": relation.variant.value,
            "emitted_order": relation.order,
            "max_rel_error_kh_0.1_1": float(in_window["rel_error"].max()) if len(in_window) else 0.0,
            "max_abs_re_omega": float(np.max(np.abs(np.real(omega)))),
        }
    return summary


def branches_recipe(ctx: RunContext, recipe: Recipe, bilayer: BilayerSpec) -> Dict[str, Any]:
    points = ctx.args.kappa_points or BRANCH_RECIPE_KAPPA_POINTS
    count = max(BRANCH_RECIPE_COUNT, ctx.args.branches or 0)
    kappa = _kappa_grid(bilayer.h, ctx.args.kappa_max, points, include_zero=False)
    branches = find_branches(bilayer, kappa=kappa, n=count, tol=ctx.args.tol)
    _write_table(ctx.output(f"{recipe.figure_id}/branches.csv"), branches_table(branches))
    per_branch = []
    counter = False
    for b in branches:
        fixed = b.in_frame(Frame.FIXED)
        sign = _sign_fraction(fixed.kappa, fixed.omega)
        if b.branch_index > 0 and sign["negative"] > 0.0:
            counter = True
        per_branch.append({"branch": b.branch_index, "failed_points": b.n_failed, "phase_velocity_sign": sign})
    return {"branches": per_branch, "located": len(branches), "counter_propagating_higher_branch": counter}


def field_leading_recipe(ctx: RunContext, recipe: Recipe, spec: LaminateSpec) -> Dict[str, Any]:
    pde = effective_pde(spec, 0)
    config = config_for(pde, nu=FIELD_LEADING_NU, t_end=FIELD_LEADING_T_END, x0=FIELD_LEADING_X0)
    result = simulate(pde, config)
    snaps = result["snapshots"]
    _write_table(ctx.output(f"{recipe.figure_id}/snapshots.csv"), snapshots_table(snaps, config.x))
    _write_table(ctx.output(f"{recipe.figure_id}/diagnostics.csv"), diagnostics_table(snaps))

    times = np.array([s.time for s in snaps])
    centroids = np.unwrap(np.array([s.diagnostics.centroid for s in snaps]), period=config.domain_length)
    measured = float(np.polyfit(times, centroids, 1)[0]) if times.size > 1 else 0.0
    predicted = pde.coeff_x / pde.coeff_t
    final = snaps[-1]
    reference = gaussian_solution(pde, config, final.time)
    return {
        "pde": pde.to_dict(),
        "centroid_velocity": measured,
        "predicted_velocity": predicted,
        "velocity_rel_error": abs(measured - predicted) / abs(predicted) if predicted else 0.0,
        "l2_error_final": l2_error(final.values, reference, config.dx),
        "mass_drift": result["mass_drift"],
        "energy_audit": result["energy"].to_dict(),
    }


def field_order2_recipe(ctx: RunContext, recipe: Recipe, spec: LaminateSpec, bilayer: Optional[BilayerSpec]) -> Dict[str, Any]:
    pde = effective_pde(spec, 2)
    mirrored_pde = None
    if bilayer is not None:
        mirrored_pde = effective_pde(make_bilayer(bilayer.replace(v_m=-bilayer.v_m)), 2)
    runs = []
    for nu in FIELD_ORDER2_NUS:
        config = config_for(pde, nu=nu, t_end=default_t_end(pde, nu), x0=FIELD_ORDER2_X0)
        result = simulate(pde, config)
        snaps = result["snapshots"]
        tag = f"nu{nu:g}"
        _write_table(ctx.output(f"{recipe.figure_id}/snapshots_{tag}.csv"), snapshots_table(snaps, config.x))
        _write_table(ctx.output(f"{recipe.figure_id}/diagnostics_{tag}.csv"), diagnostics_table(snaps))
        third = np.array([s.diagnostics.third_moment for s in snaps])
        entry = {
            "nu": nu,
            "t_end": config.t_end,
            "max_abs_third_moment_over_nu3": float(np.max(np.abs(third)) / nu ** 3),
            "final_third_moment": float(third[-1]),
            "final_energy_skewness": float(snaps[-1].diagnostics.energy_skewness),
            "mass_drift": result["mass_drift"],
            "energy_audit": result["energy"].to_dict(),
        }
        if nu >= 1.0:
            entry["nearly_symmetric"] = bool(entry["max_abs_third_moment_over_nu3"] <= SYMMETRIC_THIRD_MOMENT_BOUND)
        if mirrored_pde is not None:
            flipped = simulate(mirrored_pde, config)["snapshots"][-1]
            reflected = mirror(snaps[-1], config.x0)
            entry["mirror_max_abs_error"] = float(np.max(np.abs(flipped.values - reflected.values)))
        runs.append(entry)
    return {"pde": pde.to_dict(), "runs": runs}


def _audits_ok(summary: Dict[str, Any]) -> bool:
    blocks = summary.get("runs") or [summary]
    for block in blocks:
        audit = block.get("energy_audit")
        if audit is not None and not audit.get("passed", True):
            return False
    return True


def handle_figures(ctx: RunContext) -> int:
    recipe = RECIPES[ctx.args.figure_id]
    config, spec, bilayer = _laminate_for(ctx, recipe)
    _save_laminate_config(str(ctx.output(f"{recipe.figure_id}/config.json")), config)

    if recipe.figure_id.startswith("dd-"):
        if bilayer is None:
            raise ConfigError("config_schema", "bilayer", f"{recipe.figure_id} needs a two-phase bilayer")
        if recipe.figure_id == "dd-branches":
            summary = branches_recipe(ctx, recipe, bilayer)
        else:
            summary = dispersion_recipe(ctx, recipe, spec, bilayer)
    elif recipe.figure_id == "field-leading":
        summary = field_leading_recipe(ctx, recipe, spec)
    else:
        summary = field_order2_recipe(ctx, recipe, spec, bilayer)

    summary["figure_id"] = recipe.figure_id
    summary["description"] = recipe.description
    _write_json(ctx.output(f"{recipe.figure_id}/summary.json"), summary)
    _report(f"figures {recipe.figure_id}: written to {ctx.out_dir / recipe.figure_id}")
    return EXIT_OK if _audits_ok(summary) else EXIT_AUDIT

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from bloch import DispersionBranch, branches_table, find_branch, find_branches, parity_defects
from config import ConfigError
from command_utils import _kappa_grid, _report, _require_bilayer, _tolerances
from constants import EXIT_OK, ROOT_RESIDUAL_TOL
from context import RunContext
from data.tables import _read_table, _write_json, _write_table
from effective import compare_dispersion, dispersion_table, effective_prediction
from laminate import BilayerSpec
from logging_utils import _file_sha256, _runs_from_log

_log = logging.getLogger(__name__)


def exact_branches(bilayer: BilayerSpec, kappa: np.ndarray, count: int = 1, tol: float = ROOT_RESIDUAL_TOL) -> List[DispersionBranch]:
    if count <= 1:
        return [find_branch(bilayer, kappa_grid=kappa, tol=tol)]
    return find_branches(bilayer, kappa=kappa, n=count, tol=tol)


def exact_metadata(ctx: RunContext, branches: List[DispersionBranch]) -> dict:
    return {
        "config_path": ctx.manifest.config_path,
        "config_sha256": ctx.manifest.config_sha256,
        "model": ctx.spec.model.value,
        "tolerances": _tolerances(ctx.args),
        "branches": [
            {
                "branch": b.branch_index,
                "kappa_sign": "-" if b.kappa.size and b.kappa[-1] < 0.0 else "+",
                "points": int(b.kappa.size),
                "failed_points": b.n_failed,
                "max_residual": float(np.nanmax(b.residuals)) if b.residuals.size else 0.0,
            }
            for b in branches
        ],
    }


def handle_dispersion_exact(ctx: RunContext) -> int:
    bilayer = _require_bilayer(ctx)
    kappa = _kappa_grid(bilayer.h, ctx.args.kappa_max, ctx.args.kappa_points)
    count = ctx.args.branches or 1
    branches = exact_branches(bilayer, kappa, count, tol=ctx.args.tol)
    # mirrored grid for the parity report
    backward = exact_branches(bilayer, -kappa, count, tol=ctx.args.tol)
    _write_table(ctx.output("dispersion_exact.csv"), branches_table(branches + backward))
    meta = exact_metadata(ctx, branches + backward)
    meta["parity"] = [dict(branch=f.branch_index, **parity_defects(f, b)) for f, b in zip(branches, backward)]
    _write_json(ctx.output("dispersion_exact.json"), meta)
    failed = sum(b["failed_points"] for b in meta["branches"])
    _report(f"dispersion exact: {len(branches)} branch(es), {kappa.size} kappa points, {failed} unconverged")
    return EXIT_OK


def effective_frame(ctx: RunContext, order: int, kappa: np.ndarray) -> pd.DataFrame:
    relation = effective_prediction(ctx.spec, order)
    if relation.order != order:
        _log.warning("order %d is unavailable for this laminate; emitting order %d", order, relation.order)
    return dispersion_table(relation, kappa)


def handle_dispersion_effective(ctx: RunContext) -> int:
    kappa = _kappa_grid(ctx.spec.h, ctx.args.kappa_max, ctx.args.kappa_points)
    frame = effective_frame(ctx, ctx.args.order, kappa)
    _write_table(ctx.output("dispersion_effective.csv"), frame)
    _report(f"dispersion effective: order {int(frame['order'].iloc[0])}, {kappa.size} kappa points")
    return EXIT_OK


def _is_stale(ctx: RunContext, path: Path) -> bool:
    """True when the last run that wrote path used a different laminate descriptor."""
    producers = [r for r in _runs_from_log(ctx.out_dir) if str(path) in r.get("outputs", [])]
    if not producers:
        return False
    return producers[-1].get("config_sha256") != ctx.manifest.config_sha256


def _table_or_compute(ctx: RunContext, flag: Optional[str], default_name: str, build) -> pd.DataFrame:
    path = Path(flag) if flag else ctx.out_dir / default_name
    if path.exists() and (flag or not _is_stale(ctx, path)):
        ctx.manifest.inputs[str(path)] = _file_sha256(str(path))
        return _read_table(path)
    if flag:
        raise ConfigError("config_missing", default_name, f"file not found: {path}")
    _log.info("%s missing or stale in %s; computing it", default_name, ctx.out_dir)
    frame = build()
    _write_table(ctx.output(default_name), frame)
    return frame


def handle_dispersion_compare(ctx: RunContext) -> int:
    h = ctx.spec.h
    kappa = _kappa_grid(h, ctx.args.kappa_max, ctx.args.kappa_points)

    def build_exact() -> pd.DataFrame:
        return branches_table(exact_branches(_require_bilayer(ctx), kappa, 1, tol=ctx.args.tol))

    exact = _table_or_compute(ctx, ctx.args.exact, "dispersion_exact.csv", build_exact)
    effective = _table_or_compute(
        ctx, ctx.args.effective, "dispersion_effective.csv", lambda: effective_frame(ctx, ctx.args.order, kappa)
    )
    merged = compare_dispersion(exact, effective)
    _write_table(ctx.output("dispersion_compare.csv"), merged)

    summary = {}
    for frame_name, part in merged.groupby("frame"):
        window = part[(part["kappa"] * h >= 0.1) & (part["kappa"] * h <= 1.0)]
        summary[frame_name] = {
            "points": int(len(part)),
            "max_rel_error": float(part["rel_error"].max()) if len(part) else 0.0,
            "max_rel_error_kh_0.1_1": float(window["rel_error"].max()) if len(window) else 0.0,
        }
    _write_json(ctx.output("dispersion_compare.json"), summary)
    fixed = summary.get("fixed", {})
    _report(f"dispersion compare: {len(merged)} rows, max rel error (fixed frame) {fixed.get('max_rel_error', 0.0):.3e}")
    return EXIT_OK

import argparse
import math
import sys
from typing import Dict, Optional

import numpy as np

from config import ConfigError
from constants import ENERGY_AUDIT_RTOL, IDENTITY_RTOL, ROOT_RESIDUAL_TOL
from context import RunContext
from laminate import BilayerSpec


def _extract_command(args: argparse.Namespace) -> str:
    """
    Returns the full command name.

    "dispersion" is qualified by its mode: "dispersion exact", "dispersion compare".
    """
    command = getattr(args, "command", None) or ""
    mode = getattr(args, "mode", None)
    if command == "dispersion" and mode:
        return f"{command} {mode}"
    return command


def _tolerances(args: argparse.Namespace) -> Dict[str, float]:
    return {
        "root_residual": float(getattr(args, "tol", ROOT_RESIDUAL_TOL) or ROOT_RESIDUAL_TOL),
        "identity_rtol": IDENTITY_RTOL,
        "energy_rtol": ENERGY_AUDIT_RTOL,
    }


def _require_bilayer(ctx: RunContext) -> BilayerSpec:
    if ctx.bilayer is None:
        raise ConfigError("config_schema", "bilayer", "exact dispersion needs a two-phase bilayer, not a profile table")
    return ctx.bilayer


def _kappa_grid(h: float, kappa_max: Optional[float], points: int, include_zero: bool = True) -> np.ndarray:
    """Uniform grid on [0, kappa_max] (default pi/h)."""
    if points is None or points < 2:
        raise ConfigError("usage", "--kappa-points", f"need at least 2 points, got {points!r}")
    upper = kappa_max if kappa_max is not None else math.pi / h
    if not upper > 0.0:
        raise ConfigError("usage", "--kappa-max", f"must be positive, got {upper!r}")
    grid = np.linspace(0.0, upper, points)
    return grid if include_zero else grid[1:]


def _report(line: str) -> None:
    sys.stdout.write(line.rstrip("\n") + "\n")


def _report_error(code: str, message: str) -> None:
    sys.stderr.write(f"code={code} {message}\n")

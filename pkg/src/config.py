import argparse
import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Optional

from constants import DEFAULT_AUDIT_SEEDS, DEFAULT_KAPPA_POINTS, LOG_LEVEL_ENV, ROOT_RESIDUAL_TOL, TOOL_NAME
from laminate import BilayerSpec, LaminateSpec, LaminateValidationError, Model, ScaleSet, make_bilayer

EXAMPLE_CONFIG = Path(__file__).resolve().parent.parent / "laminate_config_example.json"

FIGURE_IDS = ("dd-both", "dd-sigma-only", "dd-model2", "field-leading", "field-order2", "dd-branches")


class ConfigError(ValueError):
    def __init__(self, code: str, field: str, message: str):
        self.code = code
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}" if field else message)


class _ArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so main() owns the exit code."""

    def error(self, message: str) -> None:
        raise ConfigError("usage", "", message)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None, help="Path to the JSON laminate descriptor")
    parser.add_argument("--out", type=str, default="out", help="Output directory (default: out)")
    parser.add_argument("--model", choices=("1", "2"), default=None, help="Override the descriptor's model")
    parser.add_argument("--kappa-star", type=float, default=None, help="Wavenumber scale kappa* in 1/m")
    parser.add_argument("--tol", type=float, default=ROOT_RESIDUAL_TOL, help="Root residual tolerance")


def _add_dispersion_flags(parser: argparse.ArgumentParser, kappa_points: int | None = DEFAULT_KAPPA_POINTS) -> None:
    parser.add_argument("--kappa-max", type=float, default=None, help="Largest kappa (default: pi/h)")
    parser.add_argument("--kappa-points", type=int, default=kappa_points)
    parser.add_argument("--branches", type=_positive_int, default=None, help="Number of exact branches")
    parser.add_argument("--order", type=int, choices=(0, 1, 2), default=2)


def _parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = _ArgumentParser(prog=TOOL_NAME, description="Space-time modulated diffusive laminates")
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    homogenize = sub.add_parser("homogenize", help="Cell problems, correctors and effective coefficients")
    _add_shared_flags(homogenize)
    homogenize.add_argument("--resolution", type=int, default=201, help="Samples per corrector table")

    dispersion = sub.add_parser("dispersion", help="Exact and effective dispersion relations")
    dispersion_sub = dispersion.add_subparsers(dest="mode", parser_class=_ArgumentParser)
    for mode in ("exact", "effective", "compare"):
        p = dispersion_sub.add_parser(mode)
        _add_shared_flags(p)
        _add_dispersion_flags(p)
        if mode == "compare":
            p.add_argument("--exact", type=str, default=None, help="Exact branches CSV")
            p.add_argument("--effective", type=str, default=None, help="Effective dispersion CSV")

    simulate = sub.add_parser("simulate", help="Crank-Nicolson run of an effective PDE")
    _add_shared_flags(simulate)
    simulate.add_argument("--order", type=int, choices=(0, 1, 2), default=2)
    simulate.add_argument("--nu", type=float, default=None, help="Initial Gaussian width in m")
    simulate.add_argument("--t-end", type=float, default=None, help="Final time in s")
    simulate.add_argument("--points", type=_positive_int, default=None, help="Grid points")
    simulate.add_argument("--cascade", action="store_true", help="Integrate the three-level cascade")

    validate = sub.add_parser("validate", help="Run the audit matrix")
    _add_shared_flags(validate)
    validate.add_argument("--seeds", type=_positive_int, default=DEFAULT_AUDIT_SEEDS)
    validate.add_argument("--quick", action="store_true", help="Skip the dispersion convergence audits")

    figures = sub.add_parser("figures", help="Named data recipes")
    figures.add_argument("figure_id", choices=FIGURE_IDS)
    _add_shared_flags(figures)
    _add_dispersion_flags(figures, kappa_points=None)

    sub.add_parser("help", help="List subcommands and figure recipes")
    return parser.parse_args(argv)


def _log_level() -> int:
    name = os.environ.get(LOG_LEVEL_ENV, "INFO").strip().upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        logging.getLogger(__name__).warning("Unknown log level %r in %s; using INFO", name, LOG_LEVEL_ENV)
        return logging.INFO
    return level


def _number(data: Dict[str, Any], key: str, prefix: str = "", positive: bool = True, required: bool = True) -> Optional[float]:
    field = f"{prefix}{key}"
    raw = data.get(key)
    if raw is None:
        if required:
            raise ConfigError("config_schema", field, "missing required number")
        return None
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError("config_schema", field, f"expected a number, got {raw!r}")
    value = float(raw)
    if not math.isfinite(value):
        raise ConfigError("config_schema", field, "must be finite")
    if positive and value <= 0.0:
        raise ConfigError("config_schema", field, f"must be positive, got {value!r}")
    return value


def _normalize_bilayer(raw: Any, model: Model) -> Dict[str, float]:
    if not isinstance(raw, dict):
        raise ConfigError("config_schema", "bilayer", "expected an object")
    out: Dict[str, float] = {}
    for key in ("sigma_a", "sigma_b", "phi"):
        out[key] = _number(raw, key, "bilayer.")
    if not 0.0 < out["phi"] < 1.0:
        raise ConfigError("config_schema", "bilayer.phi", f"must lie in (0, 1), got {out['phi']!r}")
    if model is Model.MODEL2 or "rho_a" in raw:
        for key in ("rho_a", "rho_b", "c"):
            out[key] = _number(raw, key, "bilayer.")
    else:
        for key in ("gamma_a", "gamma_b"):
            out[key] = _number(raw, key, "bilayer.")
    return out


def _normalize_profile(raw: Any, model: Model) -> list[Dict[str, float]]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("config_schema", "profile", "expected a non-empty array")
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, dict):
            raise ConfigError("config_schema", f"profile[{i}]", "expected an object")
        prefix = f"profile[{i}]."
        item = {"breakpoint": _number(row, "breakpoint", prefix, positive=False), "sigma": _number(row, "sigma", prefix)}
        key = "rho" if model is Model.MODEL2 else "gamma"
        item[key] = _number(row, key, prefix)
        rows.append(item)
    return rows


def _normalize_simulation(raw: Any) -> Dict[str, Any]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError("config_schema", "simulation", "expected an object")
    out: Dict[str, Any] = {}
    for key in ("nu", "t_end", "domain_length"):
        value = _number(raw, key, "simulation.", required=False)
        if value is not None:
            out[key] = value
    x0 = _number(raw, "x0", "simulation.", positive=False, required=False)
    if x0 is not None:
        out["x0"] = x0
    for key in ("n_points", "snapshots"):
        value = raw.get(key)
        if value is None:
            continue
        if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
            raise ConfigError("config_schema", f"simulation.{key}", f"expected a positive integer, got {value!r}")
        out[key] = value
    return out


def _load_laminate_config(config_path: str | None) -> Dict[str, Any]:
    """
    Load and validate a laminate descriptor.

    Expected schema:
      - model: "model1" | "model2"
      - bilayer: {sigma_a, sigma_b, phi, gamma_a, gamma_b | rho_a, rho_b, c}
      - h, v_m: period (m) and modulation speed (m/s)
      - profile: optional [{breakpoint, sigma, gamma|rho}], takes precedence over bilayer
      - scales: optional {kappa_star}
      - simulation: optional {nu, t_end, x0, n_points, snapshots, domain_length}

    Without a path the bundled example descriptor is used.
    """
    path = Path(config_path) if config_path else EXAMPLE_CONFIG
    if not path.exists():
        raise ConfigError("config_missing", "config", f"file not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("config_json", "config", f"{path}: {exc.msg} at line {exc.lineno}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config_schema", "config", "top level must be an object")

    try:
        model = Model.parse(data.get("model", "model1"))
    except LaminateValidationError as exc:
        raise ConfigError("config_schema", "model", str(exc)) from exc
    config: Dict[str, Any] = {
        "model": model.value,
        "h": _number(data, "h"),
        "v_m": _number(data, "v_m", positive=False),
    }
    if "profile" in data:
        config["profile"] = _normalize_profile(data["profile"], model)
        if model is Model.MODEL2:
            config["c"] = _number(data, "c")
    if "bilayer" in data or "profile" not in data:
        config["bilayer"] = _normalize_bilayer(data.get("bilayer"), model)
    scales = data.get("scales") or {}
    if not isinstance(scales, dict):
        raise ConfigError("config_schema", "scales", "expected an object")
    kappa_star = _number(scales, "kappa_star", "scales.", required=False)
    config["scales"] = {"kappa_star": kappa_star if kappa_star is not None else 1.0}
    config["simulation"] = _normalize_simulation(data.get("simulation"))
    config["path"] = str(path)
    return config


def _with_model(config: Dict[str, Any], model_flag: str | None) -> Dict[str, Any]:
    if model_flag is None:
        return config
    model = Model.parse(model_flag)
    if model.value == config["model"]:
        return config
    updated = dict(config)
    updated["model"] = model.value
    bilayer = config.get("bilayer") or {}
    if model is Model.MODEL2 and "rho_a" not in bilayer:
        raise ConfigError("config_schema", "bilayer.rho_a", "--model 2 needs a density bilayer (rho_a, rho_b, c)")
    return updated


def _bilayer_from_config(config: Dict[str, Any]) -> Optional[BilayerSpec]:
    if "bilayer" not in config or "profile" in config:
        return None
    try:
        return BilayerSpec(h=config["h"], v_m=config["v_m"], model=config["model"], **config["bilayer"])
    except LaminateValidationError as exc:
        raise ConfigError("config_schema", f"bilayer.{exc.field}", exc.reason) from exc


def _laminate_from_config(config: Dict[str, Any]) -> LaminateSpec:
    try:
        if "profile" in config:
            return LaminateSpec.from_profile_table(
                config["profile"], h=config["h"], v_m=config["v_m"], model=config["model"], c_specific=config.get("c")
            )
        return make_bilayer(_bilayer_from_config(config))
    except LaminateValidationError as exc:
        raise ConfigError("config_schema", exc.field, exc.reason) from exc


def _scales_from_config(config: Dict[str, Any], spec: LaminateSpec, kappa_star: float | None = None) -> ScaleSet:
    value = kappa_star if kappa_star is not None else config["scales"]["kappa_star"]
    return ScaleSet.default_for(spec, kappa_star=value)


def _save_laminate_config(config_path: str, config: Dict[str, Any]) -> None:
    """
    Save a laminate descriptor.

    Uses atomic write (tmp file + replace) to reduce risk of corruption.
    """
    path = Path(config_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_suffix(path.suffix + ".tmp")
    payload = {key: value for key, value in config.items() if key != "path" and value not in (None, {})}
    raw = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    tmp_path.write_text(raw, encoding="utf-8")
    tmp_path.replace(path)

import logging
import sys
import uuid
from pathlib import Path

from bloch import BlochStructureError
from cell import PipelineError, SolvabilityError
from command_utils import _extract_command, _report_error, _tolerances
from config import (
    ConfigError,
    _bilayer_from_config,
    _laminate_from_config,
    _load_laminate_config,
    _log_level,
    _parse_args,
    _scales_from_config,
    _with_model,
)
from constants import EXIT_AUDIT, EXIT_OK, EXIT_USAGE
from context import RunContext
from effective import EffectiveVariantError
from fdsolver import SolverConfigError, SolverDivergenceError
from handlers import dispatch
from handlers.misc import usage_text
from laminate import DegreeOverflowError, LaminateValidationError
from logging_utils import RunManifest, _file_sha256, _log_run

_ERROR_CODES = (
    (LaminateValidationError, "validation"),
    (DegreeOverflowError, "degree_overflow"),
    (SolvabilityError, "solvability"),
    (PipelineError, "pipeline"),
    (EffectiveVariantError, "variant"),
    (BlochStructureError, "bloch_structure"),
    (SolverConfigError, "solver_config"),
    (SolverDivergenceError, "solver_divergence"),
    (ValueError, "invalid_argument"),
)


def _build_context(args) -> RunContext:
    config = _with_model(_load_laminate_config(args.config), args.model)
    spec = _laminate_from_config(config)
    manifest = RunManifest(
        subcommand=_extract_command(args),
        config_path=config["path"],
        config_sha256=_file_sha256(config["path"]),
        tolerances=_tolerances(args),
        run_id=uuid.uuid4().hex,
    )
    return RunContext(
        args=args,
        config=config,
        spec=spec,
        bilayer=_bilayer_from_config(config),
        scales=_scales_from_config(config, spec, args.kappa_star),
        out_dir=Path(args.out),
        manifest=manifest,
    )


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=_log_level(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger = logging.getLogger(__name__)

    try:
        args = _parse_args(argv)
    except ConfigError as exc:
        _report_error(exc.code, exc.message)
        return EXIT_USAGE

    command = _extract_command(args)
    if not command:
        _report_error("usage", "missing subcommand")
        sys.stderr.write(usage_text() + "\n")
        return EXIT_USAGE
    if command == "help":
        sys.stdout.write(usage_text() + "\n")
        return EXIT_OK

    ctx = None
    try:
        ctx = _build_context(args)
        code = dispatch(ctx)
    except ConfigError as exc:
        _report_error(exc.code, str(exc))
        code = EXIT_USAGE
    except tuple(cls for cls, _ in _ERROR_CODES) as exc:
        name = next(label for cls, label in _ERROR_CODES if isinstance(exc, cls))
        _report_error(name, str(exc))
        code = EXIT_USAGE

    if code == EXIT_AUDIT:
        _report_error("audit_failed", f"{command}: see {Path(args.out)} for the failing checks")
    if ctx is not None:
        _log_run(ctx.out_dir, ctx.manifest)
    logger.debug("%s finished with exit code %d", command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())

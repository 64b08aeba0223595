import logging
from typing import Callable

from command_utils import _extract_command
from config import ConfigError
from context import RunContext

from handlers.audit import handle_validate
from handlers.dispersion import handle_dispersion_compare, handle_dispersion_effective, handle_dispersion_exact
from handlers.figures import handle_figures
from handlers.homogenize import handle_homogenize
from handlers.misc import handle_help
from handlers.simulate import handle_simulate

COMMAND_HANDLERS: dict[str, Callable[[RunContext], int]] = {
    "homogenize": handle_homogenize,
    "dispersion exact": handle_dispersion_exact,
    "dispersion effective": handle_dispersion_effective,
    "dispersion compare": handle_dispersion_compare,
    "simulate": handle_simulate,
    "validate": handle_validate,
    "figures": handle_figures,
    "help": handle_help,
}


def dispatch(ctx: RunContext) -> int:
    command = _extract_command(ctx.args)
    handler = COMMAND_HANDLERS.get(command)
    if handler is None:
        raise ConfigError("usage", "command", f"unknown command {command or '<none>'!r}")
    logging.getLogger(__name__).info("run %s: %s", ctx.run_id, command)
    return handler(ctx)

from command_utils import _report
from constants import EXIT_OK, TOOL_NAME, TOOL_VERSION
from handlers.figures import RECIPES


def usage_text() -> str:
    lines = [
        f"{TOOL_NAME} {TOOL_VERSION}",
        "",
        "Subcommands:",
        "- homogenize [--config PATH] [--model 1|2] [--kappa-star K] - correctors, coefficients, identity audit",
        "- dispersion exact [--branches N] - Bloch branches of the two-phase laminate",
        "- dispersion effective [--order 0|1|2] - Omega(kappa) of the effective equation",
        "- dispersion compare [--exact CSV] [--effective CSV] - exact against effective",
        "- simulate [--order 0|1|2] [--nu W] [--t-end T] [--cascade] - Gaussian run of the effective equation",
        "- validate [--seeds N] [--quick] - audit matrix",
        "- figures <figure_id> - named data recipe",
        "- help",
        "",
        "Figure recipes:",
    ]
    for recipe in RECIPES.values():
        lines.append(f"- {recipe.figure_id} - {recipe.description}")
    lines.append("")
    lines.append("Every subcommand accepts --out DIR (default: out) and --tol.")
    return "\n".join(lines)


def handle_help(ctx) -> int:
    _report(usage_text())
    return EXIT_OK

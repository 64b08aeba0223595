import logging

from cell import PipelineError, bilayer_closed_forms, homogenize, nonreciprocity_model1, sample_correctors
from command_utils import _report
from constants import EXIT_AUDIT, EXIT_OK
from context import RunContext
from data.tables import _write_json, _write_table
from effective import EffectiveVariantError, Variant, closed_form_pde, coefficients_report, effective_pde
from laminate import Model
from logging_utils import _log_audit
from validate import identity_report, summarize

_log = logging.getLogger(__name__)


def _effective_equations(ctx: RunContext, pipeline) -> dict:
    equations = {}
    for order in (0, 1, 2):
        try:
            equations[f"order{order}"] = effective_pde(ctx.spec, order, kappa_star=ctx.scales.kappa_star).to_dict()
        except EffectiveVariantError as exc:
            equations[f"order{order}"] = {"variant": exc.variant, "unavailable": exc.reason}
    for variant in (Variant.SIGMA_ONLY_ORDER2, Variant.MODEL2_RHO_ONLY_ORDER2):
        try:
            equations[f"closed_{variant.value}"] = closed_form_pde(pipeline, variant).to_dict()
        except EffectiveVariantError:
            continue
    return equations


def handle_homogenize(ctx: RunContext) -> int:
    pipeline = homogenize(ctx.spec, scales=ctx.scales)
    reports = identity_report(pipeline)
    counts = summarize(reports)

    payload = coefficients_report(pipeline)
    payload["model"] = pipeline.problem.model.value
    payload["identities"] = [r.to_dict() for r in reports]
    payload["identity_summary"] = counts
    payload["effective_equations"] = _effective_equations(ctx, pipeline)
    payload["notes"] = dict(pipeline.notes)
    if pipeline.problem.model is Model.MODEL1:
        try:
            payload["nonreciprocity"] = nonreciprocity_model1(pipeline)
        except PipelineError:
            payload["nonreciprocity"] = {"name": "general", "e_xxx": pipeline.coefficients.e_xxx}
    else:
        payload["nonreciprocity"] = {
            "name": "N_adv",
            "assembled": pipeline.coefficients.N_adv,
            "closed_form": pipeline.coefficients.N_adv_reduced,
        }
    if ctx.bilayer is not None:
        payload["closed_forms"] = bilayer_closed_forms(ctx.bilayer)

    table = sample_correctors(pipeline.correctors, resolution=ctx.args.resolution)
    _write_table(ctx.output("correctors.csv"), table)
    _write_json(ctx.output("homogenize.json"), payload)
    _log_audit(ctx.out_dir, ctx.run_id, counts, "identities")

    order0 = payload["dimensional"]
    _report(
        f"homogenize: sigma0={order0['sigma0']:.6g} gamma0={order0['gamma0']:.6g} "
        f"v_m*W0={order0['v_m_W0']:.6g} identities {counts['passed']}/{counts['total']}"
    )
    if counts["failed"]:
        _log.warning("%d identity checks failed", counts["failed"])
        return EXIT_AUDIT
    return EXIT_OK

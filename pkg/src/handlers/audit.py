import logging

from command_utils import _report
from constants import EXIT_AUDIT, EXIT_OK
from context import RunContext
from data.tables import _write_json
from logging_utils import _log_audit
from validate import audit_matrix, summarize

_log = logging.getLogger(__name__)


def handle_validate(ctx: RunContext) -> int:
    reports = audit_matrix(seeds=ctx.args.seeds, include_dispersion=not ctx.args.quick)
    counts = summarize(reports)
    _write_json(ctx.output("validate.json"), [r.to_dict() for r in reports])
    _log_audit(ctx.out_dir, ctx.run_id, counts, "validate")
    for report in reports:
        if not report.passed:
            _log.warning("FAIL %s: lhs=%.12g rhs=%.12g rel=%.3e", report.name, report.lhs, report.rhs, report.rel_error)
    status = "PASS" if counts["failed"] == 0 else "FAIL"
    _report(f"validate: {status} total={counts['total']} passed={counts['passed']} failed={counts['failed']}")
    return EXIT_OK if counts["failed"] == 0 else EXIT_AUDIT

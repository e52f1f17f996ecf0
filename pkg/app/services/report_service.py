"""
Report Service
Deterministic JSON / markdown / CSV renderings of run results
"""
import csv
import io
import os
from typing import Any, Dict, List, Sequence, Union

from app.core.errors import InvalidParameterError, ReportIOError
from app.core.helpers import dump_json, format_float
from app.core.logging import logger
from app.schemas.certificate import SigmaCertificate, SpeedVerdict, SweepReport
from app.schemas.dispersion import CurveTrace
from app.schemas.potential import HypothesisReport
from app.schemas.run import ReproCase

Result = Union[SweepReport, SpeedVerdict, CurveTrace, ReproCase]

TRACE_COLUMNS = ["t", "gamma_plus", "gamma_minus", "residual_plus", "residual_minus",
                 "ratio_sq_plus", "ratio_sq_minus"]
VERDICT_COLUMNS = ["c", "status", "route", "ell", "grid_margin"]


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------

def _trace_json(trace: CurveTrace) -> Dict[str, Any]:
    return {
        "j": trace.j,
        "c": trace.c,
        "ell_estimate": trace.ell_estimate,
        "ell_error": trace.ell_error,
        "branch_agreement": trace.branch_agreement,
        "dropped": list(trace.dropped),
        "samples": [_trace_row(s) for s in trace.samples],
    }


def _repro_json(case: ReproCase) -> Dict[str, Any]:
    return {
        "case": case.name,
        "potential": case.potential.model_dump() if case.potential else None,
        "passed": case.passed,
        "values": [
            {"name": v.name, "expected": v.expected, "computed": v.computed,
             "tolerance": v.tolerance, "matches": v.matches, "provenance": v.provenance}
            for v in case.values
        ],
        "certified_speeds": list(case.certified_speeds),
        "inconclusive_speeds": list(case.inconclusive_speeds),
        "failures": list(case.failures),
    }


def to_json(results: Result) -> Dict[str, Any]:
    if isinstance(results, (SweepReport, SpeedVerdict)):
        return results.to_report()
    if isinstance(results, CurveTrace):
        return _trace_json(results)
    if isinstance(results, ReproCase):
        return _repro_json(results)
    raise InvalidParameterError(f"no report layout for {type(results).__name__}")


# ---------------------------------------------------------------------------
# Markdown
# ---------------------------------------------------------------------------

def _table(header: Sequence[str], rows: List[Sequence[Any]]) -> List[str]:
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for row in rows:
        lines.append("| " + " | ".join(format_float(v) if not isinstance(v, str) else v for v in row) + " |")
    return lines


def _hypotheses_md(report: HypothesisReport) -> List[str]:
    rows = [[chk.name, chk.status, format_float(chk.value),
             "-" if chk.witness is None else str([round(x, 6) for x in chk.witness]), chk.note or "-"]
            for chk in report.checks()]
    lines = ["## Sampled hypotheses", ""] + _table(["check", "status", "value", "witness", "note"], rows)
    for note in report.notes:
        lines.append(f"- {note}")
    return lines + [""]


def _verdict_row(v: SpeedVerdict) -> List[Any]:
    margin = v.evidence.grid_margin if isinstance(v.evidence, SigmaCertificate) else None
    return [v.c, v.status, v.route, v.ell, margin, v.reason or "-"]


def _sweep_md(report: SweepReport) -> str:
    lines = ["# Speed sweep", "", "## Model", ""]
    for key, value in report.model.items():
        lines.append(f"- {key}: {value}")
    lines.append("")
    if report.hypotheses is not None:
        lines += _hypotheses_md(report.hypotheses)
    lines += ["## Certified intervals", ""]
    if report.certified_intervals:
        lines += [f"- [{format_float(lo)}, {format_float(hi)}]" for lo, hi in report.certified_intervals]
    else:
        lines.append("- none")
    lines += ["", "## Verdicts", ""]
    lines += _table(["c", "status", "route", "ell", "grid_margin", "reason"],
                    [_verdict_row(v) for v in report.verdicts])
    lines += ["", "Certified means the sufficient conditions hold on the sampled grid within the",
              "reported margins; it is not a formal proof.", ""]
    return "\n".join(lines)


def _verdict_md(v: SpeedVerdict) -> str:
    lines = [f"# Speed c = {format_float(v.c)}", "",
             f"- status: {v.status}", f"- route: {v.route}", f"- ell: {format_float(v.ell)}"]
    if v.reason:
        lines.append(f"- reason: {v.reason}")
    for a in v.assumptions:
        lines.append(f"- assumption: {a}")
    if isinstance(v.evidence, SigmaCertificate):
        ev = v.evidence
        lines += ["", "## sigma certificate", "",
                  f"- sigma: {[round(s, 10) for s in ev.sigma]}",
                  f"- grid margin: {format_float(ev.grid_margin)}",
                  f"- refined-grid margin: {format_float(ev.fine_margin)}",
                  f"- sigma-2 slacks: {[round(s, 10) for s in ev.sigma2_slacks]}",
                  f"- dual components: {[round(s, 10) for s in ev.dual_components]}"]
    return "\n".join(lines) + "\n"


def _trace_md(trace: CurveTrace) -> str:
    lines = [f"# Branch trace j = {trace.j}, c = {format_float(trace.c)}", "",
             f"- ell estimate: {format_float(trace.ell_estimate, 10)}",
             f"- extrapolation change: {format_float(trace.ell_error)}",
             f"- branch agreement: {format_float(trace.branch_agreement)}",
             f"- dropped t: {[format_float(t) for t in trace.dropped] or 'none'}", ""]
    rows = [[_trace_row(s)[col] for col in TRACE_COLUMNS] for s in trace.samples]
    return "\n".join(lines + _table(TRACE_COLUMNS, rows)) + "\n"


def _repro_md(case: ReproCase) -> str:
    lines = [f"# Reproduction: {case.name}", "", f"- passed: {case.passed}", ""]
    rows = [[v.name, v.expected, v.computed, v.tolerance, "yes" if v.matches else "NO", v.provenance]
            for v in case.values]
    lines += _table(["quantity", "expected", "computed", "tolerance", "match", "provenance"], rows)
    lines += ["", f"- certified speeds: {[format_float(c) for c in case.certified_speeds]}",
              f"- inconclusive speeds: {[format_float(c) for c in case.inconclusive_speeds]}"]
    for f in case.failures:
        lines.append(f"- FAILURE: {f}")
    return "\n".join(lines) + "\n"


def to_markdown(results: Result) -> str:
    if isinstance(results, SweepReport):
        return _sweep_md(results)
    if isinstance(results, SpeedVerdict):
        return _verdict_md(results)
    if isinstance(results, CurveTrace):
        return _trace_md(results)
    if isinstance(results, ReproCase):
        return _repro_md(results)
    raise InvalidParameterError(f"no report layout for {type(results).__name__}")


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _trace_row(sample) -> Dict[str, float]:
    return {
        "t": sample.t,
        "gamma_plus": sample.gamma_plus,
        "gamma_minus": sample.gamma_minus,
        "residual_plus": sample.residual_plus,
        "residual_minus": sample.residual_minus,
        "ratio_sq_plus": sample.ratio_sq_plus,
        "ratio_sq_minus": sample.ratio_sq_minus,
    }


def to_csv(results: Result) -> str:
    buf = io.StringIO()
    if isinstance(results, CurveTrace):
        writer = csv.DictWriter(buf, fieldnames=TRACE_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for s in results.samples:
            writer.writerow({k: repr(v) for k, v in _trace_row(s).items()})
    elif isinstance(results, (SweepReport, SpeedVerdict)):
        verdicts = results.verdicts if isinstance(results, SweepReport) else [results]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(VERDICT_COLUMNS)
        for v in verdicts:
            rec = v.to_report()
            writer.writerow(["" if rec[k] is None else rec[k] for k in VERDICT_COLUMNS])
    else:
        raise InvalidParameterError(f"no CSV layout for {type(results).__name__}")
    return buf.getvalue()


def _csv_name(results: Result) -> str:
    return "trace.csv" if isinstance(results, CurveTrace) else "report.csv"


def emit_report(results: Result, formats: Sequence[str], path: str) -> List[str]:
    """Write report.json / report.md / CSV under `path`; returns the written files"""
    renderers = {
        "json": ("report.json", lambda: dump_json(to_json(results))),
        "md": ("report.md", lambda: to_markdown(results)),
        "csv": (_csv_name(results), lambda: to_csv(results)),
    }
    written = []
    try:
        os.makedirs(path, exist_ok=True)
        for fmt in sorted(set(formats), key=["json", "md", "csv"].index):
            name, render = renderers[fmt]
            target = os.path.join(path, name)
            with open(target, "w", encoding="utf-8", newline="") as f:
                f.write(render())
            written.append(target)
    except OSError as e:
        raise ReportIOError(f"could not write report to {path}: {e}") from e
    logger.info(f"[Report] Wrote {[os.path.basename(p) for p in written]} to {path}")
    return written

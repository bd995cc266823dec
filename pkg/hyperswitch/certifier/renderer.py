"""Markdown report renderer for certificates and their audits."""

from datetime import datetime, timezone
from typing import Optional

from hyperswitch.certifier.schemas import AuditReport, Certificate


def _fmt(v: Optional[float]) -> str:
    return "n/a" if v is None else f"{v:.6g}"


def render_audit(report: AuditReport, certificate: Optional[Certificate] = None) -> str:
    """
    Render an audit report as Markdown.

    Includes the verdict, the certificate parameters, a per-inequality margin
    table (failures first) and the notes on how x-dependence was checked.
    """
    lines = []

    lines.append(f"# Certificate Audit: {report.variant.value}")
    lines.append("")
    lines.append(f"*Generated: {datetime.now(timezone.utc).strftime('%Y-%m-%d %H:%M:%S UTC')}*")
    lines.append("")
    lines.append(f"**Verdict:** {'PASSED' if report.passed else 'FAILED'}")
    lines.append("")
    lines.append(f"- tol_feas: {report.tol_feas:g}")
    lines.append(f"- x check: {report.x_check}")
    lines.append("")

    if certificate is not None:
        lines.append("## Certificate")
        lines.append("")
        if certificate.system:
            lines.append(f"- system: {certificate.system}")
        lines.append(f"- nu: {certificate.nu:.10g}")
        lines.append(f"- gamma: {certificate.gamma:.10g}")
        lines.append(f"- tau_D: {certificate.tau_D:.10g}")
        lines.append(f"- mu: {', '.join(f'{v:.6g}' for v in certificate.mu)}")
        for i, q in enumerate(certificate.Q):
            lines.append(f"- Q[{i}] = diag({', '.join(f'{v:.6g}' for v in q)})")
        lines.append("")

    if report.gamma_recomputed is not None or report.tau_D_recomputed is not None:
        lines.append("## Recomputed Quantities")
        lines.append("")
        lines.append(f"- gamma: {_fmt(report.gamma_recomputed)}")
        lines.append(f"- tau_D: {_fmt(report.tau_D_recomputed)}")
        lines.append("")

    worst = report.worst
    if worst is not None:
        lines.append(f"Worst slack: `{worst.name}` with lambda_min = {worst.margin:.3e}")
        lines.append("")

    lines.append("## Inequalities")
    lines.append("")
    lines.append("| Name | Kind | Margin | Passed | Detail |")
    lines.append("|------|------|--------|--------|--------|")
    ordered = sorted(report.entries, key=lambda e: (e.passed, e.kind, e.name))
    for e in ordered:
        detail = e.detail.replace("|", "\\|")[:80]
        lines.append(f"| {e.name} | {e.kind} | {e.margin:.3e} | {'yes' if e.passed else 'NO'} | {detail} |")
    lines.append("")

    if report.notes:
        lines.append("## Notes")
        lines.append("")
        for note in report.notes:
            lines.append(f"- {note}")
        lines.append("")

    return "\n".join(lines)

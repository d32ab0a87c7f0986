"""
Report artifacts - step CSV, JSON reports and the printed summaries.

Nothing written here carries a timestamp, so two runs with the same
configuration and seed produce identical files.
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any

import numpy as np
from tabulate import tabulate

from src.scalar.majorant import Certificate, IdentityReport, MajorantConfig, MajorantTrace
from src.solver.records import SolveResult

CSV_COLUMNS = ("n", "t_n", "delta_t", "step_norm", "residual", "error_bound", "bound_ok")
RULE = "=" * 60


def format_number(value: Any) -> str:
    """Positional decimal with 17 significant digits; booleans as true/false."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return np.format_float_positional(value, precision=17, unique=False, fractional=False, trim="-")


def jsonable(value: Any) -> Any:
    """Convert numpy values and non-finite floats for json.dumps."""
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


def dumps_json(payload: dict) -> str:
    return json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n"


def ensure_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)


def write_json(path: Path, payload: dict) -> None:
    path = Path(path)
    ensure_dir(path.parent)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(dumps_json(payload))


def steps_csv(result: SolveResult) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for step in result.steps:
        row = step.to_row()
        writer.writerow([format_number(row[column]) for column in CSV_COLUMNS])
    return buffer.getvalue()


def write_steps_csv(path: Path, result: SolveResult) -> None:
    path = Path(path)
    ensure_dir(path.parent)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(steps_csv(result))


def _certificate_lines(certificate: Certificate) -> list[str]:
    lines = []
    rows = [
        ("a", certificate.a),
        ("h", certificate.h),
        ("chi", certificate.chi),
        ("Omega(chi)", certificate.omega_chi),
        ("Psi(chi)", certificate.psi_chi),
        ("condition slack", certificate.majorant_condition_slack),
        ("W(0)", certificate.w_at_0),
        ("W(chi)", certificate.w_at_chi),
        ("t*", certificate.t_star),
        ("domain radius", certificate.domain_radius),
    ]
    lines.append(tabulate([(k, format_number(v)) for k, v in rows], tablefmt="plain", disable_numparse=True))
    lines.append(f"ball check: {'ok' if certificate.ball_radius_ok else 'failed'}")
    if certificate.passed:
        lines.append("Status: CERTIFIED")
    else:
        lines.append(f"Status: NOT CERTIFIED ({certificate.failure_reason})")
    return lines


def certificate_text(name: str, certificate: Certificate) -> str:
    lines = [RULE, f"CERTIFICATE: {name}", RULE, *_certificate_lines(certificate)]
    return "\n".join(lines) + "\n"


def solve_text(name: str, result: SolveResult) -> str:
    lines = [RULE, f"{result.method.upper()} RUN: {name}", RULE]
    table = [[format_number(step.to_row()[c]) for c in CSV_COLUMNS] for step in result.steps]
    if table:
        lines.append(tabulate(table, headers=CSV_COLUMNS, tablefmt="simple", disable_numparse=True))
    lines.append(f"status: {result.status.value}")
    lines.append(f"certified: {'yes' if result.certified else 'no'}")
    lines.append(f"final x: {', '.join(format_number(v) for v in result.final_x)}")
    lines.append(f"final residual: {format_number(result.final_residual)}")
    if result.diagnostic:
        lines.append(f"diagnostic: {result.diagnostic}")
    return "\n".join(lines) + "\n"


def majorant_text(
    cfg: MajorantConfig,
    certificate: Certificate,
    trace: MajorantTrace | None,
    identity: IdentityReport | None,
    classical_t_star: float | None = None,
) -> str:
    lines = [RULE, "SCALAR MAJORANT", RULE, *_certificate_lines(certificate)]
    if trace is not None:
        rows = []
        for n, t in enumerate(trace.t):
            delta = trace.delta(n) if n < trace.iterations else math.nan
            deviation = identity.deviations[n] if identity and n < len(identity.deviations) else math.nan
            rows.append([n, format_number(t), format_number(trace.alpha(n)), format_number(delta),
                         format_number(deviation)])
        lines.append(
            tabulate(rows, headers=("n", "t_n", "alpha_n", "delta_t", "identity_residual"),
                     tablefmt="simple", disable_numparse=True)
        )
        lines.append(f"trace converged: {'yes' if trace.converged else 'no'}")
        lines.append(f"trace limit: {format_number(trace.limit)}")
    if identity is not None:
        lines.append(f"worst identity residual: {format_number(identity.worst_deviation)}")
    if classical_t_star is not None:
        lines.append(f"classical closed form t*: {format_number(classical_t_star)}")
    lines.append(f"h = {format_number(cfg.h)}, a = {format_number(cfg.a)}")
    return "\n".join(lines) + "\n"


def audit_text(name: str, checks: dict[str, dict]) -> str:
    lines = [RULE, f"AUDIT: {name}", RULE]
    lines.append("Sampling can falsify but never prove the declared hypotheses.")
    rows = []
    for check, payload in checks.items():
        if payload.get("skipped"):
            verdict = "skipped"
        else:
            verdict = "pass" if payload.get("passed") else "FAIL"
        deficit = payload.get("max_deficit")
        rows.append([check, verdict, payload.get("violations", 0),
                     "-" if deficit is None else format_number(deficit)])
    lines.append(tabulate(rows, headers=("check", "result", "violations", "max_deficit"),
                          tablefmt="simple", disable_numparse=True))
    return "\n".join(lines) + "\n"


def corpus_text(entries: list) -> str:
    rows = [[e.name, e.problem.dim, ", ".join(e.override_keys), e.notes] for e in entries]
    return tabulate(rows, headers=("name", "dim", "overrides", "notes"), tablefmt="simple",
                    maxcolwidths=[None, None, 24, 60], disable_numparse=True) + "\n"

"""
Certification Pipeline - command orchestration for the certified solver.

Each CLI command maps to one handler. A handler loads the corpus problem
named by the run configuration, runs the library operations and returns a
CommandOutcome: exit code, printed text, JSON report and, for runs, the
SolveResult whose steps go to the CSV.

Exit codes:
    0  success
    1  configuration or setup error
    2  certificate failed / audit violation / majorant condition fails
    3  step bound violated during a certified run
    4  iteration failure (budget exhausted, domain exit, singular Jacobian)
"""

import math
from dataclasses import dataclass, field
from typing import Callable

from loguru import logger

from src.audit.bounds import (
    audit_ball_containment,
    audit_error_bound,
    audit_inverse_bound,
    audit_residual_estimate,
    oracle_solution,
    probe_uniqueness,
)
from src.audit.smoothness import (
    SAMPLING_NOTE,
    check_norm_regularity,
    check_psi_condition,
    check_regular_smoothness,
)
from src.corpus.problems import CorpusEntry, corpus_entry, corpus_list
from src.errors import (
    ConfigError,
    CorpusError,
    MajorantConfigError,
    OracleUnavailableError,
    SingularJacobianError,
)
from src.operators.problem import PreconditionedProblem, precondition
from src.orchestration.config import RunConfig, Settings
from src.orchestration.reporting import (
    audit_text,
    certificate_text,
    corpus_text,
    dumps_json,
    majorant_text,
    solve_text,
    write_json,
    write_steps_csv,
)
from src.scalar.majorant import (
    DEFAULT_TRACE_ITER,
    MajorantConfig,
    check_conditions,
    kantorovich_t_star,
    residual_identity_check,
    run_majorant,
)
from src.scalar.moduli import LipschitzModulus, ZeroRate
from src.solver.newton import solve_certified, solve_picard
from src.solver.records import SolveResult, SolveStatus

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAILED = 2
EXIT_BOUND = 3
EXIT_ITERATION = 4

STATUS_EXIT_CODES: dict[SolveStatus, int] = {
    SolveStatus.CONVERGED: EXIT_OK,
    SolveStatus.CERTIFICATE_FAILED: EXIT_FAILED,
    SolveStatus.BOUND_VIOLATED: EXIT_BOUND,
    SolveStatus.MAX_ITER: EXIT_ITERATION,
    SolveStatus.DOMAIN_EXIT: EXIT_ITERATION,
    SolveStatus.SINGULAR_JACOBIAN: EXIT_ITERATION,
}


@dataclass
class CommandOutcome:
    """Everything a command produced."""
    command: str
    exit_code: int
    text: str
    report: dict = field(default_factory=dict)
    result: SolveResult | None = None


class CertificationPipeline:
    """
    Runs one command of the certified solver against a RunConfig.

    Commands:
        certify  - evaluate the certificate of the configured problem
        solve    - certified Newton run with per-step bounds
        picard   - certified simplified (Picard) run
        audit    - sampling checks plus run-level bound audits
        majorant - scalar trace only, from a problem or direct data
        corpus   - list built-in problems
    """

    def __init__(self, config: RunConfig, settings: Settings | None = None):
        self.config = config
        self.settings = settings or Settings()
        self.command_handlers: dict[str, Callable[[], CommandOutcome]] = {
            "certify": self.cmd_certify,
            "solve": self.cmd_solve,
            "picard": self.cmd_picard,
            "audit": self.cmd_audit,
            "majorant": self.cmd_majorant,
            "corpus": self.cmd_corpus,
        }

    def run(self, command: str) -> CommandOutcome:
        """Dispatch ``command`` and write the configured artifacts."""
        handler = self.command_handlers.get(command)
        if handler is None:
            return CommandOutcome(command, EXIT_CONFIG, f"error: unknown command '{command}'\n")

        try:
            outcome = handler()
        except (ConfigError, CorpusError, MajorantConfigError, SingularJacobianError) as exc:
            logger.error("{} failed during setup: {}", command, exc)
            return CommandOutcome(command, EXIT_CONFIG, f"error: {exc}\n")

        outputs = self.config.outputs
        if outputs.report is not None:
            write_json(outputs.report, outcome.report)
        if outputs.csv is not None and outcome.result is not None:
            write_steps_csv(outputs.csv, outcome.result)
        return outcome

    # ------------------------------------------------------------------
    # Setup
    # ------------------------------------------------------------------

    def _entry(self) -> CorpusEntry:
        if self.config.problem is None:
            raise ConfigError("no problem given (use --problem or a config file)")
        entry = corpus_entry(
            self.config.problem.name, self.config.problem.overrides, self.config.norm_choice
        )
        if self.config.h is not None:
            entry.problem = entry.problem.with_declarations(h=self.config.h)
        return entry

    def _problem_header(self, entry: CorpusEntry) -> dict:
        return {
            "problem": entry.name,
            "parameters": entry.parameters,
            "norm": self.config.norm,
        }

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------

    def cmd_certify(self) -> CommandOutcome:
        entry = self._entry()
        pp = precondition(entry.problem)
        cfg = pp.majorant_config()
        certificate = check_conditions(cfg, pp.domain_radius)
        report = {
            "command": "certify",
            **self._problem_header(entry),
            "declared": cfg.describe(),
            "certificate": certificate.to_dict(),
        }
        code = EXIT_OK if certificate.passed else EXIT_FAILED
        return CommandOutcome("certify", code, certificate_text(entry.name, certificate), report)

    def _solve(self, command: str) -> CommandOutcome:
        entry = self._entry()
        pp = precondition(entry.problem)
        solver = solve_certified if command == "solve" else solve_picard
        result = solver(pp, tol=self.config.tol, max_iter=self.config.max_iter, force=self.config.force)
        report = {
            "command": command,
            **self._problem_header(entry),
            "certificate": result.certificate.to_dict(),
            "result": result.summary(),
            "steps": [
                {**step.to_row(), "x": step.x, "jacobian_inverse_bound": step.jacobian_inverse_bound}
                for step in result.steps
            ],
        }
        return CommandOutcome(
            command,
            STATUS_EXIT_CODES[result.status],
            solve_text(entry.name, result),
            report,
            result,
        )

    def cmd_solve(self) -> CommandOutcome:
        return self._solve("solve")

    def cmd_picard(self) -> CommandOutcome:
        return self._solve("picard")

    def _run_audits(self, entry: CorpusEntry, pp: PreconditionedProblem) -> dict[str, dict]:
        problem = pp.base
        samples, seed = self.config.audit.samples, self.config.audit.seed
        checks: dict[str, dict] = {
            "regular_smoothness": check_regular_smoothness(
                pp, problem.declared_modulus, problem.declared_h, samples, seed
            ).to_dict(),
            "norm_regularity": check_norm_regularity(
                pp, problem.declared_modulus, problem.declared_h, samples, seed
            ).to_dict(),
            "psi_condition": check_psi_condition(pp, problem.declared_psi, samples, seed).to_dict(),
        }

        cfg = pp.majorant_config()
        certificate = check_conditions(cfg, pp.domain_radius)
        checks["certificate"] = {
            "passed": certificate.passed,
            "skipped": False,
            "violations": 0 if certificate.passed else 1,
            "max_deficit": -certificate.majorant_condition_slack,
            "failure_reason": certificate.failure_reason,
        }
        if not certificate.passed:
            return checks

        result = solve_certified(pp, tol=self.config.tol, max_iter=self.config.max_iter)
        checks["step_bound"] = self._step_bound_check(result)
        checks["linearization_residual"] = audit_residual_estimate(pp, result, cfg).to_dict()

        try:
            oracle = oracle_solution(pp, max_iter=self.config.max_iter, bracket=entry.bracket)
        except OracleUnavailableError as exc:
            logger.warning("{}: error bound audit skipped: {}", entry.name, exc)
            oracle = None
        checks["error_bound"] = audit_error_bound(pp, result, oracle).to_dict()
        checks["ball_containment"] = audit_ball_containment(result).to_dict()
        checks["inverse_bound"] = audit_inverse_bound(pp, result).to_dict()
        checks["uniqueness_probe"] = probe_uniqueness(pp, certificate.t_star).to_dict()
        return checks

    @staticmethod
    def _step_bound_check(result: SolveResult) -> dict:
        failing = [step.n for step in result.steps if not step.bound_ok]
        deficits = [step.step_norm - step.majorant_delta for step in result.steps]
        return {
            "passed": not failing and result.status is not SolveStatus.BOUND_VIOLATED,
            "skipped": False,
            "violations": len(failing),
            "violating_steps": failing,
            "max_deficit": max(deficits) if deficits else None,
            "solve_status": result.status.value,
            "diagnostic": result.diagnostic,
        }

    def cmd_audit(self) -> CommandOutcome:
        entry = self._entry()
        pp = precondition(entry.problem)
        checks = self._run_audits(entry, pp)
        passed = all(payload["passed"] for payload in checks.values())
        report = {
            "command": "audit",
            **self._problem_header(entry),
            "samples": self.config.audit.samples,
            "seed": self.config.audit.seed,
            "note": SAMPLING_NOTE.format(pairs=self.config.audit.samples),
            "passed": passed,
            "checks": checks,
        }
        text = audit_text(entry.name, checks) + dumps_json(report)
        return CommandOutcome("audit", EXIT_OK if passed else EXIT_FAILED, text, report)

    def _majorant_config(self) -> tuple[MajorantConfig, float, str]:
        spec = self.config.majorant
        entry = None
        pp = None
        if self.config.problem is not None:
            entry = self._entry()
            pp = precondition(entry.problem)

        a = spec.a if spec and spec.a is not None else (pp.residual_bound if pp else None)
        modulus = spec.modulus if spec and spec.modulus is not None else (
            pp.base.declared_modulus if pp else None
        )
        if a is None or modulus is None:
            raise ConfigError("majorant needs a and a modulus, directly or through a problem")
        if spec is not None and spec.modulus is not None:
            psi = spec.psi
        else:
            psi = pp.base.declared_psi if pp else ZeroRate()
        if self.config.h is not None:
            h = self.config.h
        elif spec is not None:
            h = spec.h
        else:
            h = pp.base.declared_h if pp else 0.0

        cfg = MajorantConfig(a=a, h=h, modulus=modulus, psi=psi)
        radius = pp.domain_radius if pp else math.inf
        label = entry.name if entry else "direct"
        return cfg, radius, label

    def cmd_majorant(self) -> CommandOutcome:
        cfg, radius, label = self._majorant_config()
        certificate = check_conditions(cfg, radius)
        trace = identity = None
        if certificate.passed:
            trace = run_majorant(
                cfg, tol=self.settings.trace_tol, max_iter=max(self.config.max_iter, DEFAULT_TRACE_ITER)
            )
            identity = residual_identity_check(cfg, trace)

        classical = None
        if isinstance(cfg.modulus, LipschitzModulus) and cfg.h == 0.0 and isinstance(cfg.psi, ZeroRate):
            classical = kantorovich_t_star(cfg.modulus.K, cfg.a)

        report = {
            "command": "majorant",
            "source": label,
            "config": cfg.describe(),
            "certificate": certificate.to_dict(),
            "trace": None if trace is None else {
                "t": trace.t,
                "alpha": [trace.alpha(n) for n in range(len(trace.t))],
                "converged": trace.converged,
                "limit": trace.limit,
                "t_star": trace.t_star,
            },
            "identity": None if identity is None else {
                "deviations": identity.deviations,
                "worst": identity.worst_deviation,
                "ok": identity.ok,
            },
            "classical_t_star": classical,
        }
        code = EXIT_OK if certificate.passed else EXIT_FAILED
        return CommandOutcome(
            "majorant", code, majorant_text(cfg, certificate, trace, identity, classical), report
        )

    def cmd_corpus(self) -> CommandOutcome:
        entries = corpus_list()
        report = {
            "command": "corpus",
            "entries": [
                {
                    "name": e.name,
                    "dim": e.problem.dim,
                    "override_keys": list(e.override_keys),
                    "parameters": e.parameters,
                    "bracket": e.bracket,
                    "notes": e.notes,
                }
                for e in entries
            ],
        }
        return CommandOutcome("corpus", EXIT_OK, corpus_text(entries), report)

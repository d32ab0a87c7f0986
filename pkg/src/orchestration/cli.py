"""
Command-line interface for the certified solver.

    nkcert certify  --problem scalar_sqrt2_smooth
    nkcert solve    --problem system_2d_kink --csv out/steps.csv
    nkcert picard   --problem scalar_sqrt2_kink --set c=0.2
    nkcert audit    --problem hoelder_scalar --samples 10000 --seed 0xC0FFEE
    nkcert majorant --a 0.3 --modulus '{"kind": "lipschitz", "K": 1}'
    nkcert corpus

Flags override values read from --config, which override NKCERT_* settings.
"""

import argparse
import json
import sys
from pathlib import Path

from loguru import logger

from src.errors import ConfigError
from src.orchestration.config import (
    build_run_config,
    load_settings,
    read_config_file,
    resolve_log_level,
)
from src.orchestration.pipeline import EXIT_CONFIG, CertificationPipeline
from src.utils.logging import configure_logging

COMMANDS = ("certify", "solve", "picard", "audit", "majorant", "corpus")


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the configuration error code."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _json_arg(text: str) -> dict:
    try:
        value = json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not valid JSON: {exc}") from exc
    if not isinstance(value, dict):
        raise argparse.ArgumentTypeError("expected a JSON object")
    return value


def _seed_arg(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from exc


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON run configuration")
    parser.add_argument("--problem", help="corpus problem name")
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a problem parameter (repeatable)",
    )
    parser.add_argument("--norm", choices=("euclidean", "max_abs"))
    parser.add_argument("--h", type=float, help="regular-smoothness offset h in [0, 1)")
    parser.add_argument("--tol", type=float)
    parser.add_argument("--max-iter", type=int)
    parser.add_argument("--report", type=Path, help="write the JSON report here")
    parser.add_argument("--log-level", help="loguru level (default from NKCERT_LOG_LEVEL)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nkcert", description="Certified Newton-Kantorovich solver for f(x) + g(x) = 0")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("certify", "evaluate the certificate"),
        ("solve", "certified Newton run"),
        ("picard", "certified simplified Newton run"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        _add_common(cmd)
        if name != "certify":
            cmd.add_argument("--csv", type=Path, help="write per-step CSV here")
            cmd.add_argument("--force", action="store_true", help="iterate even without a certificate")

    audit = sub.add_parser("audit", help="sample the declared hypotheses and audit a run")
    _add_common(audit)
    audit.add_argument("--samples", type=int)
    audit.add_argument("--seed", type=_seed_arg)

    majorant = sub.add_parser("majorant", help="scalar majorant trace")
    _add_common(majorant)
    majorant.add_argument("--a", type=float, help="residual bound a")
    majorant.add_argument("--modulus", type=_json_arg, help="modulus as JSON")
    majorant.add_argument("--psi", type=_json_arg, help="psi rate as JSON")

    corpus = sub.add_parser("corpus", help="list built-in problems")
    corpus.add_argument("--report", type=Path)
    corpus.add_argument("--log-level")
    return parser


def _parse_overrides(pairs: list[str]) -> dict[str, float]:
    overrides: dict[str, float] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        try:
            overrides[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--set {key}: {value!r} is not a number") from exc
    return overrides


def flag_values(args: argparse.Namespace) -> dict:
    """Translate parsed flags into a partial RunConfig document."""
    values: dict = {}
    problem: dict = {}
    if getattr(args, "problem", None):
        problem["name"] = args.problem
    overrides = _parse_overrides(getattr(args, "overrides", []))
    if overrides:
        problem["overrides"] = overrides
    if problem:
        values["problem"] = problem

    for flag, key in (("norm", "norm"), ("h", "h"), ("tol", "tol"), ("max_iter", "max_iter")):
        value = getattr(args, flag, None)
        if value is not None:
            values[key] = value
    if getattr(args, "force", False):
        values["force"] = True

    audit = {k: getattr(args, k, None) for k in ("samples", "seed")}
    audit = {k: v for k, v in audit.items() if v is not None}
    if audit:
        values["audit"] = audit

    outputs = {k: getattr(args, k, None) for k in ("report", "csv")}
    outputs = {k: v for k, v in outputs.items() if v is not None}
    if outputs:
        values["outputs"] = outputs

    majorant = {k: getattr(args, k, None) for k in ("a", "modulus", "psi")}
    majorant = {k: v for k, v in majorant.items() if v is not None}
    if majorant:
        values["majorant"] = majorant
    return values


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging()

    try:
        settings = load_settings()
        configure_logging(resolve_log_level(args.log_level or settings.log_level))
        file_payload = read_config_file(args.config) if getattr(args, "config", None) else {}
        config = build_run_config(file_payload, flag_values(args), settings)
    except ConfigError as exc:
        logger.debug("configuration rejected: {}", exc)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outcome = CertificationPipeline(config, settings).run(args.command)
    stream = sys.stdout if outcome.exit_code != EXIT_CONFIG else sys.stderr
    stream.write(outcome.text)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())

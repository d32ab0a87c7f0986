"""
Run configuration.

A run is described by one JSON document validated into RunConfig; CLI
flags are merged on top. Process-wide defaults come from Settings, which
reads NKCERT_* environment variables (and an optional .env file).
"""

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import ConfigError
from src.operators.linalg import NormChoice
from src.scalar.moduli import Modulus, PsiRate, ZeroRate

LogLevel = Literal["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"]

_LOG_LEVEL_ADAPTER: TypeAdapter = TypeAdapter(LogLevel)


def _upper(value: Any) -> Any:
    return value.strip().upper() if isinstance(value, str) else value


class Settings(BaseSettings):
    """Defaults overridable through NKCERT_* environment variables."""
    model_config = SettingsConfigDict(env_prefix="NKCERT_", env_file=".env", extra="ignore")

    log_level: LogLevel = "WARNING"
    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=100, ge=1)
    audit_samples: int = Field(default=10_000, ge=0)
    audit_seed: int = Field(default=0xC0FFEE, ge=0)
    trace_tol: float = Field(default=1e-12, gt=0)

    @field_validator("log_level", mode="before")
    @classmethod
    def _normalize_level(cls, value: Any) -> Any:
        return _upper(value)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProblemRef(StrictModel):
    name: str
    overrides: dict[str, float] = Field(default_factory=dict)


class AuditSettings(StrictModel):
    samples: int = Field(default=10_000, ge=0)
    seed: int = Field(default=0xC0FFEE, ge=0, lt=2**64)


class OutputPaths(StrictModel):
    report: Path | None = None
    csv: Path | None = None


class MajorantSpec(StrictModel):
    """Scalar data given directly, without an operator."""
    a: float | None = Field(default=None, gt=0)
    h: float = Field(default=0.0, ge=0, lt=1)
    modulus: Modulus | None = None
    psi: PsiRate = Field(default_factory=ZeroRate)


class RunConfig(StrictModel):
    problem: ProblemRef | None = None
    norm: Literal["euclidean", "max_abs"] = "euclidean"
    h: float | None = Field(default=None, ge=0, lt=1)
    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=100, ge=1)
    audit: AuditSettings = Field(default_factory=AuditSettings)
    outputs: OutputPaths = Field(default_factory=OutputPaths)
    force: bool = False
    majorant: MajorantSpec | None = None

    @property
    def norm_choice(self) -> NormChoice:
        return NormChoice(self.norm)


def defaults_from_settings(settings: Settings) -> dict[str, Any]:
    return {
        "tol": settings.tol,
        "max_iter": settings.max_iter,
        "audit": {"samples": settings.audit_samples, "seed": settings.audit_seed},
    }


def _merge(base: dict, update: dict) -> dict:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_config_file(path: Path) -> dict:
    """
    Read a JSON run configuration.

    Raises:
        ConfigError: file missing or not valid JSON
    """
    try:
        with Path(path).open("r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return payload


def build_run_config(
    file_payload: dict | None = None,
    flag_values: dict | None = None,
    settings: Settings | None = None,
) -> RunConfig:
    """
    Layer settings defaults, file values and flag values, then validate.

    Raises:
        ConfigError: the merged document violates RunConfig
    """
    layered = defaults_from_settings(settings or Settings())
    layered = _merge(layered, file_payload or {})
    layered = _merge(layered, flag_values or {})
    try:
        return RunConfig.model_validate(layered)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_settings() -> Settings:
    """
    Read Settings from the environment.

    Raises:
        ConfigError: an NKCERT_* variable holds an invalid value
    """
    try:
        return Settings()
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_log_level(value: str) -> str:
    """
    Normalize a loguru level name such as ``debug``.

    Raises:
        ConfigError: not a loguru level
    """
    try:
        return _LOG_LEVEL_ADAPTER.validate_python(_upper(value))
    except ValidationError as exc:
        raise ConfigError(f"unknown log level {value!r}") from exc

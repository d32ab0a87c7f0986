"""Shared pytest fixtures."""

import sys
from pathlib import Path

import pytest

# Add project root to path
PROJECT_ROOT = Path(__file__).parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.corpus.problems import corpus_get
from src.operators.problem import precondition
from src.scalar.majorant import MajorantConfig
from src.scalar.moduli import LipschitzModulus


@pytest.fixture
def sqrt2_smooth():
    """Preconditioned x² − 2 = 0 from x₀ = 1.5."""
    return precondition(corpus_get("scalar_sqrt2_smooth"))


@pytest.fixture
def sqrt2_kink():
    return precondition(corpus_get("scalar_sqrt2_kink"))


@pytest.fixture
def system_kink():
    return precondition(corpus_get("system_2d_kink"))


@pytest.fixture
def lipschitz_config():
    """a = 0.3, K = 1, h = 0: χ = 1 and t* = 1 − √0.4."""
    return MajorantConfig(a=0.3, h=0.0, modulus=LipschitzModulus(K=1.0))


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch, tmp_path):
    """Keep NKCERT_* variables and a stray .env out of every test."""
    for name in ("LOG_LEVEL", "TOL", "MAX_ITER", "AUDIT_SAMPLES", "AUDIT_SEED", "TRACE_TOL"):
        monkeypatch.delenv(f"NKCERT_{name}", raising=False)
    monkeypatch.chdir(tmp_path)

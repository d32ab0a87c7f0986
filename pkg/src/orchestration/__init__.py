# Orchestration: run configuration, command pipeline, reports and CLI
from src.orchestration.pipeline import CertificationPipeline, CommandOutcome

__all__ = ["CertificationPipeline", "CommandOutcome"]

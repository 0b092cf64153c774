"""Reproduction harness: config parsing, pipelines, manifests, plot emission."""

from .config import KINDS, ConfigError, ExperimentConfig, validate_config
from .runner import RunManifest, rerun_from_manifest, run_experiment

__all__ = [
    "KINDS",
    "ConfigError",
    "ExperimentConfig",
    "RunManifest",
    "rerun_from_manifest",
    "run_experiment",
    "validate_config",
]

"""Experiment runner: registry dispatch, deterministic seeding, persistence."""

from __future__ import annotations

from ..errors import ConfigError
from ..seeding import seed_derive
from .config import ExperimentConfig, ExperimentResult, GridSpec
from .experiments import REGISTRY
from .io import emit, read_rows_json

__all__ = [
    "REGISTRY",
    "ExperimentConfig",
    "ExperimentResult",
    "GridSpec",
    "emit",
    "read_rows_json",
    "run",
    "seed_derive",
]


def run(config: ExperimentConfig) -> ExperimentResult:
    """Dispatch a validated config to its registered experiment."""
    entry = REGISTRY.get(config.experiment_id)
    if entry is None:
        known = ", ".join(sorted(REGISTRY))
        raise ConfigError(f"unknown experiment {config.experiment_id!r}; known: {known}")
    return entry.runner(config)

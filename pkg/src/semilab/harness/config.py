"""Declarative experiment configs and tabular results."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from ..errors import ConfigError


@dataclass(frozen=True)
class GridSpec:
    """A 1-d grid: {start, stop, count, scale in linear|log}."""

    start: float
    stop: float
    count: int
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.count < 1:
            raise ConfigError("grid count must be >= 1")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"unknown grid scale {self.scale!r}")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError("log grids need positive endpoints")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("grid endpoints must be finite")
        if self.stop < self.start:
            raise ConfigError("grid stop must be >= start")

    def resolve(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "GridSpec":
        try:
            return cls(
                start=float(d["start"]),
                stop=float(d["stop"]),
                count=int(d["count"]),
                scale=str(d.get("scale", "linear")),
            )
        except KeyError as exc:
            raise ConfigError(f"grid spec missing key {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        return {"start": self.start, "stop": self.stop, "count": self.count, "scale": self.scale}


@dataclass
class ExperimentConfig:
    """One experiment run: id, typed parameters, grids, seed, output dir."""

    experiment_id: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    grids: Dict[str, GridSpec] = field(default_factory=dict)
    seed: int = 0
    output_dir: Optional[str] = None

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ExperimentConfig":
        if "experiment_id" not in d:
            raise ConfigError("config must name an experiment_id")
        grids = {k: GridSpec.from_dict(v) for k, v in d.get("grids", {}).items()}
        return cls(
            experiment_id=str(d["experiment_id"]),
            parameters=dict(d.get("parameters", {})),
            grids=grids,
            seed=int(d.get("seed", 0)),
            output_dir=d.get("output_dir"),
        )

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment_id": self.experiment_id,
            "parameters": self.parameters,
            "grids": {k: v.to_dict() for k, v in self.grids.items()},
            "seed": self.seed,
            "output_dir": self.output_dir,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=float).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def grid(self, name: str, default: GridSpec) -> np.ndarray:
        return (self.grids.get(name) or default).resolve()

    def param(self, name: str, default: Any) -> Any:
        return self.parameters.get(name, default)


@dataclass
class ExperimentResult:
    """Column-named rows plus provenance metadata and a verdict."""

    experiment_id: str
    rows: List[Dict[str, Any]]
    metadata: Dict[str, Any]
    verdict: str  # pass | fail | exploratory

    def __post_init__(self) -> None:
        if self.verdict not in ("pass", "fail", "exploratory"):
            raise ConfigError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "fail" and "first_violation" not in self.metadata:
            raise ConfigError("failing results must record their first violating row")

    @property
    def exit_code(self) -> int:
        return 0 if self.verdict in ("pass", "exploratory") else 1

    @property
    def columns(self) -> List[str]:
        cols: List[str] = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

"""JSON experiment configuration."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..sequences import KINDS

KERNEL_KINDS = ("srw", "mhrw", "mhrw_modified", "fmmc")
GRAPH_KINDS = ("g1", "g2", "dolphins", "cycle", "path", "complete", "star", "random", "file")
OBJECTIVE_KINDS = ("quadratic_scalar", "logistic_ridge", "sum_nonconvex")
OPTIMIZERS = ("sgd", "nasgd", "adam")


class ConfigError(ValueError):
    pass


@dataclass
class SequenceSpec:
    """One input to compare; ``kernel`` names the transition kernel for chain walks."""

    kind: str
    label: str = ""
    kernel: str | None = None
    batch_size: int = 1
    seed: int | None = None

    def __post_init__(self):
        if not self.label:
            self.label = self.kernel if self.kind == "chain_walk" and self.kernel else self.kind


@dataclass
class ExperimentConfig:
    name: str = "experiment"
    graph: dict = field(default_factory=lambda: {"kind": "g2"})
    objective: dict = field(default_factory=lambda: {"kind": "quadratic_scalar", "params": {"b": "degrees"}})
    sequences: list = field(default_factory=lambda: [SequenceSpec("iid")])
    schedule: dict = field(default_factory=lambda: {"kind": "poly", "alpha": 0.9})
    optimizer: str = "sgd"
    horizon: int = 10_000
    replicas: int = 100
    seed: int = 0
    theta0: float | list | None = None
    output_dir: str | None = None

    def __post_init__(self):
        self.sequences = [s if isinstance(s, SequenceSpec) else SequenceSpec(**s)
                          for s in self.sequences]
        self.validate()

    def validate(self) -> None:
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if not self.sequences:
            raise ConfigError("at least one sequence is required")
        if self.graph.get("kind") not in GRAPH_KINDS:
            raise ConfigError(f"unknown graph kind {self.graph.get('kind')!r}")
        if self.objective.get("kind") not in OBJECTIVE_KINDS:
            raise ConfigError(f"unknown objective kind {self.objective.get('kind')!r}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        labels = [s.label for s in self.sequences]
        if len(set(labels)) != len(labels):
            raise ConfigError("sequence labels must be unique")
        for s in self.sequences:
            if s.kind not in KINDS:
                raise ConfigError(f"unknown sequence kind {s.kind!r}")
            if s.kind == "chain_walk" and s.kernel not in KERNEL_KINDS \
                    and not str(s.kernel).startswith("fixture:"):
                raise ConfigError(f"unknown kernel {s.kernel!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def config_hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir", None)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

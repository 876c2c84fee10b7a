"""Experiment configuration: nested dataclasses, JSON round trip, dotted overrides."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError

MODEL_KINDS = ("quchater", "qlstm", "lstm", "gru", "rnn", "cnn1d", "reservoir")


@dataclass
class DataConfig:
    train_path: str | None = None  # None selects the bundled Earthquakes files
    test_path: str | None = None
    format: str = "ts"
    train_fraction: float = 0.8
    stratify: bool = True


@dataclass
class PreprocessConfig:
    wavelet: str = "db4"
    levels: int = 3
    boundary: str = "symmetric"
    window: int = 64
    stride: int = 32
    smote_k: int = 5


@dataclass
class ChaosSection:
    r: float = 3.8475
    a: float = 1.4
    b: float = 0.3


@dataclass
class ModelConfig:
    hidden_size: int = 32
    tcn_channels: int = 16
    tcn_kernel: int = 3
    tcn_dilations: list = field(default_factory=lambda: [1, 2])
    qubits: int = 6
    circuit_layers: int = 2
    reservoir_size: int = 100
    spectral_radius: float = 0.9
    leak: float = 0.5
    cnn_channels: list = field(default_factory=lambda: [16, 32])
    cnn_kernel: int = 3
    use_chaos: bool = True
    use_quantum: bool = True


@dataclass
class TrainConfig:
    epochs: int = 50
    batch_size: int = 32  # 0 means full batch
    lr: float = 0.001
    reservoir_lr: float = 0.01
    threshold: float = 0.5


@dataclass
class BayesOptConfig:
    budget: int = 15
    initial_design: int = 5
    grid_size: int = 400
    low: float = 0.05
    high: float = 3.95
    length_scale: float = 0.5
    signal_std: float = 1.0
    noise_std: float = 1e-4
    objective_epochs: int = 10


@dataclass
class SweepConfig:
    qubits: list = field(default_factory=lambda: [2, 4, 6, 8])


@dataclass
class BenchmarkConfig:
    models: list = field(default_factory=lambda: list(MODEL_KINDS))
    ablations: bool = True
    svg: bool = True


@dataclass
class Config:
    seed: int = 42
    data: DataConfig = field(default_factory=DataConfig)
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    chaos: ChaosSection = field(default_factory=ChaosSection)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    bayesopt: BayesOptConfig = field(default_factory=BayesOptConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def validate(self) -> "Config":
        if not 0.0 < self.chaos.r < 4.0:
            raise ConfigError("chaos.r must lie in (0, 4)")
        if not 0.0 < self.data.train_fraction < 1.0:
            raise ConfigError("data.train_fraction must lie in (0, 1)")
        if self.data.format not in ("ts", "csv"):
            raise ConfigError("data.format must be 'ts' or 'csv'")
        for kind in self.benchmark.models:
            if kind not in MODEL_KINDS:
                raise ConfigError(f"unknown model kind {kind!r}")
        if self.train.epochs < 0 or self.train.batch_size < 0:
            raise ConfigError("train.epochs and train.batch_size must be non-negative")
        if self.model.qubits < 1 or self.model.circuit_layers < 1:
            raise ConfigError("model.qubits and model.circuit_layers must be >= 1")
        if self.bayesopt.budget < self.bayesopt.initial_design:
            raise ConfigError("bayesopt.budget must be >= bayesopt.initial_design")
        return self


def _from_dict(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where or 'config'} must be an object")
    names = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"unknown config key {where + key!r}")
        f = names[key]
        default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
        if dataclasses.is_dataclass(default):
            kwargs[key] = _from_dict(type(default), value, f"{where}{key}.")
        else:
            kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: dict) -> Config:
    return _from_dict(Config, data, "").validate()


def load_config(path: str | Path | None) -> Config:
    if path is None:
        return Config().validate()
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data)


def _coerce(raw: str, current: Any):
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    if isinstance(current, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"expected true/false, got {raw!r}")
    elif isinstance(current, float) and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    elif current is not None and not isinstance(value, type(current)):
        if isinstance(current, str):
            value = raw
        else:
            raise ConfigError(f"expected {type(current).__name__}, got {raw!r}")
    return value


def apply_overrides(cfg: Config, overrides: list[str]) -> Config:
    """Apply ``section.key=value`` strings; unknown keys raise :class:`ConfigError`."""
    data = cfg.to_dict()
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = data
        for p in parts[:-1]:
            if not isinstance(node, dict) or p not in node or not isinstance(node[p], dict):
                raise ConfigError(f"unknown config key {key!r}")
            node = node[p]
        leaf = parts[-1]
        if not isinstance(node, dict) or leaf not in node or isinstance(node[leaf], dict):
            raise ConfigError(f"unknown config key {key!r}")
        node[leaf] = _coerce(raw, node[leaf])
    return config_from_dict(data)

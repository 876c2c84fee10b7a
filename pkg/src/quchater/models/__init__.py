"""Model zoo with a uniform ``forward``/``backward``/``predict_proba`` surface."""

from __future__ import annotations

from ..chaos import ChaosConfig
from ..config import MODEL_KINDS, Config
from ..neural import load_checkpoint, save_checkpoint
from .base import ModelSpec, SequenceClassifier
from .conv import CNN1DClassifier
from .quchater import QuChaTeR
from .recurrent import GRUClassifier, LSTMClassifier, QLSTMClassifier, RNNClassifier
from .reservoir import ReservoirClassifier

DISPLAY_NAMES = {
    "quchater": "QuChaTeR",
    "cnn1d": "CNN1D",
    "lstm": "LSTM",
    "qlstm": "Quantum LSTM",
    "gru": "GRU",
    "reservoir": "Reservoir",
    "rnn": "RNN",
}


def model_spec(kind: str, cfg: Config, **overrides) -> ModelSpec:
    """Hyperparameters for ``kind`` drawn from the experiment config."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    m = cfg.model
    lr = cfg.train.reservoir_lr if kind == "reservoir" else cfg.train.lr
    hp: dict = {"lr": lr}
    if kind in ("lstm", "gru", "rnn", "qlstm", "quchater"):
        hp["hidden_size"] = m.hidden_size
    if kind in ("qlstm", "quchater"):
        hp.update(qubits=m.qubits, circuit_layers=m.circuit_layers)
    if kind == "quchater":
        hp.update(tcn_channels=m.tcn_channels, tcn_kernel=m.tcn_kernel,
                  tcn_dilations=list(m.tcn_dilations),
                  chaos={"r": cfg.chaos.r, "a": cfg.chaos.a, "b": cfg.chaos.b},
                  use_chaos=m.use_chaos, use_quantum=m.use_quantum)
    if kind == "cnn1d":
        hp.update(channels=list(m.cnn_channels), kernel_size=m.cnn_kernel)
    if kind == "reservoir":
        hp.update(size=m.reservoir_size, spectral_radius=m.spectral_radius, leak=m.leak)
    hp.update(overrides)
    return ModelSpec(kind, hp)


def build_model(spec: ModelSpec, n_features: int, seed: int) -> SequenceClassifier:
    hp = dict(spec.hyperparams)
    hp.pop("n_features", None)
    hp.pop("seed", None)
    if spec.kind == "quchater":
        chaos = hp.pop("chaos", {})
        return QuChaTeR(n_features, chaos=ChaosConfig(**chaos), seed=seed, **hp)
    cls = {
        "lstm": LSTMClassifier,
        "gru": GRUClassifier,
        "rnn": RNNClassifier,
        "qlstm": QLSTMClassifier,
        "cnn1d": CNN1DClassifier,
        "reservoir": ReservoirClassifier,
    }[spec.kind]
    return cls(n_features, seed=seed, **hp)


def save_model(prefix, model: SequenceClassifier) -> None:
    save_checkpoint(prefix, model.params, {"model": model.spec().to_dict()})


def load_model(prefix) -> SequenceClassifier:
    store, meta = load_checkpoint(prefix)
    spec = meta["model"]
    hp = dict(spec["hyperparams"])
    model = build_model(ModelSpec(spec["kind"], hp), hp["n_features"], hp["seed"])
    for name, arr in store.data.items():
        model.params.data[name][...] = arr
    return model


__all__ = [
    "CNN1DClassifier",
    "DISPLAY_NAMES",
    "GRUClassifier",
    "LSTMClassifier",
    "ModelSpec",
    "QLSTMClassifier",
    "QuChaTeR",
    "RNNClassifier",
    "ReservoirClassifier",
    "SequenceClassifier",
    "build_model",
    "load_model",
    "model_spec",
    "save_model",
]

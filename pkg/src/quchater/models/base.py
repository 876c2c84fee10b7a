from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch
from ..neural import ParamStore, linear, linear_backward, sigmoid


@dataclass
class ModelSpec:
    kind: str
    hyperparams: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "hyperparams": dict(self.hyperparams)}


class SequenceClassifier:
    """Shared plumbing: a parameter store, a linear readout and a sigmoid head.

    Subclasses implement ``forward(X) -> (logits, cache)`` and
    ``backward(cache, dlogits) -> grads`` on batches ``X (B, T, F)``.
    """

    kind = "base"

    def __init__(self, n_features: int, seed: int, lr: float = 0.001):
        self.n_features = n_features
        self.seed = seed
        self.lr = lr
        self.params = ParamStore()
        self.grad_enabled = True  # False skips caches only needed by backward

    def _init_readout(self, width: int) -> None:
        self.params.uniform("readout.W", (1, width), width, self.seed)
        self.params.zeros("readout.b", (1,))

    def _readout(self, feat):
        logit, _ = linear(feat, self.params["readout.W"], self.params["readout.b"])
        return logit[:, 0]

    def _readout_backward(self, dlogits, feat, grads: dict):
        dfeat, dW, db = linear_backward(dlogits[:, None], feat, self.params["readout.W"])
        grads["readout.W"] = dW
        grads["readout.b"] = db
        return dfeat

    def _check_input(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3 or X.shape[2] != self.n_features:
            raise ShapeMismatch(f"expected (batch, time, {self.n_features}), got {X.shape}")
        if X.shape[1] == 0:
            raise ShapeMismatch("zero-length sequence")
        return X

    def forward(self, X):
        raise NotImplementedError

    def backward(self, cache, dlogits) -> dict:
        raise NotImplementedError

    def predict_logits(self, X) -> np.ndarray:
        prev, self.grad_enabled = self.grad_enabled, False
        try:
            logits, _ = self.forward(X)
        finally:
            self.grad_enabled = prev
        return logits

    def predict_proba(self, X) -> np.ndarray:
        return sigmoid(self.predict_logits(X))

    def param_count(self, trainable_only: bool = False) -> int:
        return self.params.count(trainable_only)

    def spec(self) -> ModelSpec:
        return ModelSpec(self.kind, self.hyperparams())

    def hyperparams(self) -> dict:
        return {"n_features": self.n_features, "seed": self.seed, "lr": self.lr}

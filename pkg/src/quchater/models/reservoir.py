from __future__ import annotations

import numpy as np

from ..neural import param_rng
from .base import SequenceClassifier


class ReservoirClassifier(SequenceClassifier):
    """Echo state network: frozen leaky-tanh reservoir, trainable linear readout.

    ``x_t = (1 - leak) x_{t-1} + leak * tanh(W_in u_t + W x_{t-1})`` with ``W``
    rescaled to the requested spectral radius at construction.
    """

    kind = "reservoir"

    def __init__(self, n_features: int, size: int = 100, spectral_radius: float = 0.9,
                 leak: float = 0.5, input_scale: float = 1.0, seed: int = 0, lr: float = 0.01):
        super().__init__(n_features, seed, lr)
        if not 0 < spectral_radius < 1:
            raise ValueError("spectral radius must lie in (0, 1)")
        self.size = size
        self.spectral_radius = spectral_radius
        self.leak = leak
        self.input_scale = input_scale
        w_in = param_rng(seed, "reservoir.W_in").uniform(-input_scale, input_scale, (size, n_features))
        w = param_rng(seed, "reservoir.W").normal(size=(size, size))
        w *= spectral_radius / np.max(np.abs(np.linalg.eigvals(w)))
        self.params.add("reservoir.W_in", w_in, trainable=False)
        self.params.add("reservoir.W", w, trainable=False)
        self._init_readout(size)

    def hyperparams(self) -> dict:
        return {**super().hyperparams(), "size": self.size, "spectral_radius": self.spectral_radius,
                "leak": self.leak, "input_scale": self.input_scale}

    def states(self, U, x0=None) -> np.ndarray:
        """Reservoir trajectory ``(B, T, size)`` driven by ``U (B, T, F)``."""
        U = np.asarray(U, dtype=np.float64)
        B, T, _ = U.shape
        x = np.zeros((B, self.size)) if x0 is None else np.array(x0, dtype=np.float64, copy=True)
        drive = U @ self.params["reservoir.W_in"].T
        W = self.params["reservoir.W"]
        out = np.empty((B, T, self.size))
        for t in range(T):
            x = (1.0 - self.leak) * x + self.leak * np.tanh(drive[:, t] + x @ W.T)
            out[:, t] = x
        return out

    def forward(self, X):
        X = self._check_input(X)
        feat = self.states(X)[:, -1]
        return self._readout(feat), feat

    def backward(self, cache, dlogits) -> dict:
        grads: dict = {}
        self._readout_backward(dlogits, cache, grads)
        return grads

"""LSTM, GRU, tanh-RNN and quantum-residual LSTM classifiers."""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..neural import (
    gru_cell_backward,
    gru_cell_step,
    gru_params,
    init_gru,
    init_lstm,
    init_rnn,
    lstm_cell_backward,
    lstm_cell_step,
    lstm_params,
    param_rng,
    rnn_cell_backward,
    rnn_cell_step,
    rnn_params,
)
from .base import SequenceClassifier


def _prefixed(grads: dict, prefix: str, into: dict) -> None:
    for k, v in grads.items():
        name = f"{prefix}.{k}"
        into[name] = into[name] + v if name in into else v


class LSTMClassifier(SequenceClassifier):
    """Last hidden state of an LSTM through a linear readout."""

    kind = "lstm"

    def __init__(self, n_features: int, hidden_size: int = 32, seed: int = 0, lr: float = 0.001):
        super().__init__(n_features, seed, lr)
        self.hidden_size = hidden_size
        init_lstm(self.params, "lstm", n_features, hidden_size, seed)
        self._init_readout(hidden_size)

    def hyperparams(self) -> dict:
        return {**super().hyperparams(), "hidden_size": self.hidden_size}

    # hook for the quantum residual; identity here
    def _post_step(self, h):
        return h, None

    def _post_step_backward(self, dh, aux, grads):
        return dh

    def forward(self, X):
        X = self._check_input(X)
        B, T, _ = X.shape
        p = lstm_params(self.params, "lstm")
        h = np.zeros((B, self.hidden_size))
        c = np.zeros_like(h)
        steps = []
        for t in range(T):
            h_raw, c, cell = lstm_cell_step(X[:, t], h, c, p)
            h, aux = self._post_step(h_raw)
            steps.append((cell, aux))
        return self._readout(h), (steps, h)

    def backward(self, cache, dlogits) -> dict:
        steps, h_last = cache
        p = lstm_params(self.params, "lstm")
        grads: dict = {}
        dh = self._readout_backward(dlogits, h_last, grads)
        dc = np.zeros_like(dh)
        for cell, aux in reversed(steps):
            dh_raw = self._post_step_backward(dh, aux, grads)
            _, dh, dc, g = lstm_cell_backward(dh_raw, dc, cell, p)
            _prefixed(g, "lstm", grads)
        return grads


class QLSTMClassifier(LSTMClassifier):
    """LSTM whose hidden state gets a residual ``W_q <Z>(angles(h))`` after every step."""

    kind = "qlstm"

    def __init__(self, n_features: int, hidden_size: int = 32, qubits: int = 6,
                 circuit_layers: int = 2, seed: int = 0, lr: float = 0.001):
        super().__init__(n_features, hidden_size, seed, lr)
        self.qubits = qubits
        self.circuit_layers = circuit_layers
        self.params.uniform("proj.W", (qubits, hidden_size), hidden_size, seed)
        self.params.zeros("proj.b", (qubits,))
        self.params.add("circuit.theta",
                        param_rng(seed, "circuit.theta").uniform(-np.pi, np.pi, (circuit_layers, qubits)))
        self.params.uniform("W_q", (hidden_size, qubits), qubits, seed)

    def hyperparams(self) -> dict:
        return {**super().hyperparams(), "qubits": self.qubits, "circuit_layers": self.circuit_layers}

    def _post_step(self, h):
        a = h @ self.params["proj.W"].T + self.params["proj.b"]
        ta = np.tanh(a)
        angles = np.pi * ta
        if not self.grad_enabled:
            z = kernels.embedding_batch(angles, self.params["circuit.theta"])
            return h + z @ self.params["W_q"].T, None
        z, j_theta, j_x = kernels.circuit_jacobians(angles, self.params["circuit.theta"])
        return h + z @ self.params["W_q"].T, (h, ta, z, j_theta, j_x)

    def _post_step_backward(self, dh, aux, grads):
        h, ta, z, j_theta, j_x = aux
        dz = dh @ self.params["W_q"]
        _acc(grads, "W_q", dh.T @ z)
        _acc(grads, "circuit.theta", np.einsum("blqj,bj->lq", j_theta, dz))
        dangles = np.einsum("bqj,bj->bq", j_x, dz)
        da = dangles * np.pi * (1.0 - ta ** 2)
        _acc(grads, "proj.W", da.T @ h)
        _acc(grads, "proj.b", da.sum(axis=0))
        return dh + da @ self.params["proj.W"]


def _acc(grads: dict, name: str, value) -> None:
    grads[name] = grads[name] + value if name in grads else value


class GRUClassifier(SequenceClassifier):
    kind = "gru"

    def __init__(self, n_features: int, hidden_size: int = 32, seed: int = 0, lr: float = 0.001):
        super().__init__(n_features, seed, lr)
        self.hidden_size = hidden_size
        init_gru(self.params, "gru", n_features, hidden_size, seed)
        self._init_readout(hidden_size)

    def hyperparams(self) -> dict:
        return {**super().hyperparams(), "hidden_size": self.hidden_size}

    def forward(self, X):
        X = self._check_input(X)
        p = gru_params(self.params, "gru")
        h = np.zeros((X.shape[0], self.hidden_size))
        caches = []
        for t in range(X.shape[1]):
            h, cache = gru_cell_step(X[:, t], h, p)
            caches.append(cache)
        return self._readout(h), (caches, h)

    def backward(self, cache, dlogits) -> dict:
        caches, h_last = cache
        p = gru_params(self.params, "gru")
        grads: dict = {}
        dh = self._readout_backward(dlogits, h_last, grads)
        for c in reversed(caches):
            _, dh, g = gru_cell_backward(dh, c, p)
            _prefixed(g, "gru", grads)
        return grads


class RNNClassifier(SequenceClassifier):
    kind = "rnn"

    def __init__(self, n_features: int, hidden_size: int = 32, seed: int = 0, lr: float = 0.001):
        super().__init__(n_features, seed, lr)
        self.hidden_size = hidden_size
        init_rnn(self.params, "rnn", n_features, hidden_size, seed)
        self._init_readout(hidden_size)

    def hyperparams(self) -> dict:
        return {**super().hyperparams(), "hidden_size": self.hidden_size}

    def forward(self, X):
        X = self._check_input(X)
        p = rnn_params(self.params, "rnn")
        h = np.zeros((X.shape[0], self.hidden_size))
        caches = []
        for t in range(X.shape[1]):
            h, cache = rnn_cell_step(X[:, t], h, p)
            caches.append(cache)
        return self._readout(h), (caches, h)

    def backward(self, cache, dlogits) -> dict:
        caches, h_last = cache
        p = rnn_params(self.params, "rnn")
        grads: dict = {}
        dh = self._readout_backward(dlogits, h_last, grads)
        for c in reversed(caches):
            _, dh, g = rnn_cell_backward(dh, c, p)
            _prefixed(g, "rnn", grads)
        return grads

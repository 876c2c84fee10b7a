"""TCN front end, logistic modulation, chaotic LSTM and quantum recurrent readout.

Per time step ``t``:

1. ``u = TCN(X)[t]`` (stack of dilated causal ReLU convolutions)
2. ``m = r * sigmoid(u) * (1 - sigmoid(u))``
3. ``h, c = LSTM(m, h_prev, c_prev)``
4. ``h~ = perturb_hidden(h)``; ``h~`` is also the recurrent state for ``t + 1``
5. ``q = <Z>(pi * tanh(P h~ + p), theta)`` and ``hq += W_q q``

The classifier reads ``sigmoid(w . hq_T + b)``. ``use_chaos=False`` skips
step 4; ``use_quantum=False`` skips step 5 and reads out ``h~_T`` instead.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..chaos import ChaosConfig, perturb_hidden, perturb_hidden_backward
from ..errors import DimensionTooSmall
from ..neural import (
    init_lstm,
    lstm_cell_backward,
    lstm_cell_step,
    lstm_params,
    param_rng,
    sigmoid,
    tcn_layer,
    tcn_layer_backward,
)
from .base import SequenceClassifier
from .recurrent import _acc, _prefixed


class QuChaTeR(SequenceClassifier):
    kind = "quchater"

    def __init__(self, n_features: int, hidden_size: int = 32, tcn_channels: int = 16,
                 tcn_kernel: int = 3, tcn_dilations=(1, 2), qubits: int = 6,
                 circuit_layers: int = 2, chaos: ChaosConfig = ChaosConfig(),
                 use_chaos: bool = True, use_quantum: bool = True, seed: int = 0,
                 lr: float = 0.001):
        super().__init__(n_features, seed, lr)
        if use_chaos and hidden_size < 2:
            raise DimensionTooSmall("the Hénon stage needs hidden_size >= 2")
        self.hidden_size = hidden_size
        self.tcn_channels = tcn_channels
        self.tcn_kernel = tcn_kernel
        self.tcn_dilations = tuple(int(d) for d in tcn_dilations)
        self.qubits = qubits
        self.circuit_layers = circuit_layers
        self.chaos = chaos
        self.use_chaos = use_chaos
        self.use_quantum = use_quantum
        c_in = n_features
        for i, _ in enumerate(self.tcn_dilations):
            self.params.uniform(f"tcn{i}.W", (tcn_kernel, tcn_channels, c_in), tcn_kernel * c_in, seed)
            self.params.zeros(f"tcn{i}.b", (tcn_channels,))
            c_in = tcn_channels
        init_lstm(self.params, "lstm", c_in, hidden_size, seed)
        if use_quantum:
            self.params.uniform("proj.W", (qubits, hidden_size), hidden_size, seed)
            self.params.zeros("proj.b", (qubits,))
            self.params.add("circuit.theta", param_rng(seed, "circuit.theta").uniform(
                -np.pi, np.pi, (circuit_layers, qubits)))
            self.params.uniform("W_q", (hidden_size, qubits), qubits, seed)
        self._init_readout(hidden_size)

    def hyperparams(self) -> dict:
        return {**super().hyperparams(), "hidden_size": self.hidden_size,
                "tcn_channels": self.tcn_channels, "tcn_kernel": self.tcn_kernel,
                "tcn_dilations": list(self.tcn_dilations), "qubits": self.qubits,
                "circuit_layers": self.circuit_layers, "chaos": self.chaos.to_dict(),
                "use_chaos": self.use_chaos, "use_quantum": self.use_quantum}

    def forward(self, X):
        X = self._check_input(X)
        B, T, _ = X.shape
        u = X
        tcn_caches = []
        for i, d in enumerate(self.tcn_dilations):
            u, cache = tcn_layer(u, self.params[f"tcn{i}.W"], self.params[f"tcn{i}.b"],
                                 self.tcn_kernel, d)
            tcn_caches.append(cache)
        s = sigmoid(u)
        m_in = self.chaos.r * s * (1.0 - s)

        p = lstm_params(self.params, "lstm")
        h = np.zeros((B, self.hidden_size))
        c = np.zeros_like(h)
        hq = np.zeros_like(h)
        steps = []
        for t in range(T):
            h_raw, c, cell = lstm_cell_step(m_in[:, t], h, c, p)
            h = perturb_hidden(h_raw, self.chaos) if self.use_chaos else h_raw
            q_aux = None
            if self.use_quantum:
                ta = np.tanh(h @ self.params["proj.W"].T + self.params["proj.b"])
                if self.grad_enabled:
                    z, j_theta, j_x = kernels.circuit_jacobians(np.pi * ta, self.params["circuit.theta"])
                    q_aux = (ta, z, j_theta, j_x)
                else:
                    z = kernels.embedding_batch(np.pi * ta, self.params["circuit.theta"])
                hq = hq + z @ self.params["W_q"].T
            steps.append((cell, h_raw, h, q_aux))
        feat = hq if self.use_quantum else h
        return self._readout(feat), (tcn_caches, s, steps, feat)

    def backward(self, cache, dlogits) -> dict:
        tcn_caches, s, steps, feat = cache
        p = lstm_params(self.params, "lstm")
        grads: dict = {}
        dfeat = self._readout_backward(dlogits, feat, grads)
        B, T = s.shape[:2]
        dm = np.zeros((B, T, p["W_i"].shape[1]))
        dh_next = np.zeros((B, self.hidden_size))  # gradient reaching h~_t from step t+1
        dc = np.zeros_like(dh_next)
        if not self.use_quantum:
            dh_next = dfeat
        for t in range(T - 1, -1, -1):
            cell, h_raw, h, q_aux = steps[t]
            dh = dh_next
            if q_aux is not None:
                ta, z, j_theta, j_x = q_aux
                # hq_T = sum_t W_q q_t, so every step sees the same upstream dfeat
                dz = dfeat @ self.params["W_q"]
                _acc(grads, "W_q", dfeat.T @ z)
                _acc(grads, "circuit.theta", np.einsum("blqj,bj->lq", j_theta, dz))
                da = np.einsum("bqj,bj->bq", j_x, dz) * np.pi * (1.0 - ta ** 2)
                _acc(grads, "proj.W", da.T @ h)
                _acc(grads, "proj.b", da.sum(axis=0))
                dh = dh + da @ self.params["proj.W"]
            if self.use_chaos:
                dh = perturb_hidden_backward(h_raw, dh, self.chaos)
            dx, dh_next, dc, g = lstm_cell_backward(dh, dc, cell, p)
            _prefixed(g, "lstm", grads)
            dm[:, t] = dx
        du = dm * self.chaos.r * (1.0 - 2.0 * s) * s * (1.0 - s)
        for i in range(len(self.tcn_dilations) - 1, -1, -1):
            du, dW, db = tcn_layer_backward(du, tcn_caches[i])
            grads[f"tcn{i}.W"] = dW
            grads[f"tcn{i}.b"] = db
        return grads

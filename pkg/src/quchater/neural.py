"""Differentiable building blocks with hand-written backward passes.

Every forward function returns its output plus a cache; the matching
``*_backward`` takes the upstream gradient and that cache and returns input
gradients and a dict of parameter gradients. Arrays are batch-first.
"""

from __future__ import annotations

import json
import zlib
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ShapeMismatch

BCE_EPS = 1e-7


# -- activations -----------------------------------------------------------

def sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def tanh(z):
    return np.tanh(z)


def relu(z):
    return np.maximum(z, 0.0)


# -- parameter store -------------------------------------------------------

def param_rng(seed: int, name: str) -> np.random.Generator:
    """Generator keyed on (seed, parameter name), independent of creation order."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, zlib.crc32(name.encode())])


@dataclass
class ParamStore:
    """Named parameter arrays with matching gradient slots."""

    data: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)
    grad: dict = field(default_factory=dict)
    frozen: set = field(default_factory=set)

    def add(self, name: str, value: np.ndarray, trainable: bool = True) -> np.ndarray:
        self.data[name] = np.asarray(value, dtype=np.float64)
        self.grad[name] = np.zeros_like(self.data[name])
        if not trainable:
            self.frozen.add(name)
        return self.data[name]

    def uniform(self, name: str, shape: tuple, fan_in: int, seed: int,
                trainable: bool = True) -> np.ndarray:
        bound = 1.0 / np.sqrt(fan_in)
        return self.add(name, param_rng(seed, name).uniform(-bound, bound, size=shape), trainable)

    def zeros(self, name: str, shape: tuple, trainable: bool = True) -> np.ndarray:
        return self.add(name, np.zeros(shape), trainable)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name]

    def __contains__(self, name: str) -> bool:
        return name in self.data

    def trainable(self) -> list[str]:
        return [k for k in self.data if k not in self.frozen]

    def zero_grad(self) -> None:
        for k in self.grad:
            self.grad[k].fill(0.0)

    def accumulate(self, grads: dict) -> None:
        for k, g in grads.items():
            if k in self.frozen:
                continue
            if g.shape != self.data[k].shape:
                raise ShapeMismatch(f"gradient for {k} has shape {g.shape}, expected {self.data[k].shape}")
            self.grad[k] += g

    def count(self, trainable_only: bool = False) -> int:
        names = self.trainable() if trainable_only else list(self.data)
        return int(sum(self.data[k].size for k in names))

    def copy(self) -> "ParamStore":
        new = ParamStore(frozen=set(self.frozen))
        for k, v in self.data.items():
            new.add(k, v.copy(), k not in self.frozen)
        return new


# -- checkpoints -----------------------------------------------------------

def save_checkpoint(prefix: str | Path, params: ParamStore, meta: dict | None = None) -> None:
    """Write ``<prefix>.bin`` (little-endian float64) and ``<prefix>.json`` manifest."""
    prefix = Path(prefix)
    manifest = {"tensors": {}, "meta": meta or {}}
    offset = 0
    chunks = []
    for name, arr in params.data.items():
        manifest["tensors"][name] = {"shape": list(arr.shape), "offset": offset,
                                     "trainable": name not in params.frozen}
        chunks.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        offset += arr.size
    prefix.with_suffix(".bin").write_bytes(b"".join(chunks))
    prefix.with_suffix(".json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


def load_checkpoint(prefix: str | Path) -> tuple[ParamStore, dict]:
    prefix = Path(prefix)
    manifest = json.loads(prefix.with_suffix(".json").read_text())
    flat = np.frombuffer(prefix.with_suffix(".bin").read_bytes(), dtype="<f8")
    store = ParamStore()
    entries = sorted(manifest["tensors"].items(), key=lambda kv: kv[1]["offset"])
    for name, info in entries:
        size = int(np.prod(info["shape"], dtype=np.int64))
        arr = flat[info["offset"]:info["offset"] + size].reshape(info["shape"]).astype(np.float64)
        store.add(name, arr, info.get("trainable", True))
    return store, manifest.get("meta", {})


# -- dense -----------------------------------------------------------------

def linear(x, W, b=None):
    if x.shape[-1] != W.shape[1]:
        raise ShapeMismatch(f"input width {x.shape[-1]} does not match weight {W.shape}")
    y = x @ W.T
    if b is not None:
        y = y + b
    return y, x


def linear_backward(dy, x, W, with_bias: bool = True):
    dx = dy @ W
    x2 = x.reshape(-1, x.shape[-1])
    dy2 = dy.reshape(-1, dy.shape[-1])
    dW = dy2.T @ x2
    db = dy2.sum(axis=0) if with_bias else None
    return dx, dW, db


# -- recurrent cells ---------------------------------------------------------

LSTM_GATES = ("i", "f", "o", "c")


def init_lstm(store: ParamStore, prefix: str, n_in: int, m: int, seed: int) -> None:
    for g in LSTM_GATES:
        store.uniform(f"{prefix}.W_{g}", (m, n_in), n_in, seed)
        store.uniform(f"{prefix}.U_{g}", (m, m), m, seed)
        store.zeros(f"{prefix}.b_{g}", (m,))


def lstm_params(store: ParamStore, prefix: str) -> dict:
    return {k: store[f"{prefix}.{k}"] for g in LSTM_GATES for k in (f"W_{g}", f"U_{g}", f"b_{g}")}


def _check_state(x, h, W, U):
    if x.shape[-1] != W.shape[1] or h.shape[-1] != U.shape[0]:
        raise ShapeMismatch(f"cell input {x.shape}/{h.shape} does not match weights {W.shape}/{U.shape}")


def lstm_cell_step(x, h_prev, c_prev, p: dict):
    """One LSTM update; ``p`` maps ``W_i, U_i, b_i, ...`` to arrays."""
    _check_state(x, h_prev, p["W_i"], p["U_i"])
    pre = {g: x @ p[f"W_{g}"].T + h_prev @ p[f"U_{g}"].T + p[f"b_{g}"] for g in LSTM_GATES}
    i, f, o = sigmoid(pre["i"]), sigmoid(pre["f"]), sigmoid(pre["o"])
    g = np.tanh(pre["c"])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (x, h_prev, c_prev, i, f, o, g, tc)


def lstm_cell_backward(dh, dc, cache, p: dict):
    x, h_prev, c_prev, i, f, o, g, tc = cache
    do = dh * tc
    dc = dc + dh * o * (1.0 - tc ** 2)
    df = dc * c_prev
    di = dc * g
    dg = dc * i
    dc_prev = dc * f
    dpre = {"i": di * i * (1 - i), "f": df * f * (1 - f), "o": do * o * (1 - o),
            "c": dg * (1 - g ** 2)}
    grads = {}
    dx = np.zeros_like(x)
    dh_prev = np.zeros_like(h_prev)
    for k in LSTM_GATES:
        d = dpre[k]
        dx += d @ p[f"W_{k}"]
        dh_prev += d @ p[f"U_{k}"]
        grads[f"W_{k}"] = np.atleast_2d(d).T @ np.atleast_2d(x)
        grads[f"U_{k}"] = np.atleast_2d(d).T @ np.atleast_2d(h_prev)
        grads[f"b_{k}"] = np.atleast_2d(d).sum(axis=0)
    return dx, dh_prev, dc_prev, grads


GRU_GATES = ("z", "r", "n")


def init_gru(store: ParamStore, prefix: str, n_in: int, m: int, seed: int) -> None:
    for g in GRU_GATES:
        store.uniform(f"{prefix}.W_{g}", (m, n_in), n_in, seed)
        store.uniform(f"{prefix}.U_{g}", (m, m), m, seed)
        store.zeros(f"{prefix}.b_{g}", (m,))


def gru_params(store: ParamStore, prefix: str) -> dict:
    return {k: store[f"{prefix}.{k}"] for g in GRU_GATES for k in (f"W_{g}", f"U_{g}", f"b_{g}")}


def gru_cell_step(x, h_prev, p: dict):
    """Gated recurrent unit: ``h = z*h_prev + (1-z)*tanh(W_n x + U_n (r*h_prev) + b_n)``."""
    _check_state(x, h_prev, p["W_z"], p["U_z"])
    z = sigmoid(x @ p["W_z"].T + h_prev @ p["U_z"].T + p["b_z"])
    r = sigmoid(x @ p["W_r"].T + h_prev @ p["U_r"].T + p["b_r"])
    rh = r * h_prev
    n = np.tanh(x @ p["W_n"].T + rh @ p["U_n"].T + p["b_n"])
    h = z * h_prev + (1.0 - z) * n
    return h, (x, h_prev, z, r, rh, n)


def gru_cell_backward(dh, cache, p: dict):
    x, h_prev, z, r, rh, n = cache
    dn = dh * (1.0 - z) * (1.0 - n ** 2)
    dz = dh * (h_prev - n) * z * (1.0 - z)
    drh = dn @ p["U_n"]
    dr = drh * h_prev * r * (1.0 - r)
    dh_prev = dh * z + drh * r + dz @ p["U_z"] + dr @ p["U_r"]
    dx = dz @ p["W_z"] + dr @ p["W_r"] + dn @ p["W_n"]
    X, H, RH = np.atleast_2d(x), np.atleast_2d(h_prev), np.atleast_2d(rh)
    grads = {}
    for k, d, hin in (("z", dz, H), ("r", dr, H), ("n", dn, RH)):
        d2 = np.atleast_2d(d)
        grads[f"W_{k}"] = d2.T @ X
        grads[f"U_{k}"] = d2.T @ hin
        grads[f"b_{k}"] = d2.sum(axis=0)
    return dx, dh_prev, grads


def init_rnn(store: ParamStore, prefix: str, n_in: int, m: int, seed: int) -> None:
    store.uniform(f"{prefix}.W", (m, n_in), n_in, seed)
    store.uniform(f"{prefix}.U", (m, m), m, seed)
    store.zeros(f"{prefix}.b", (m,))


def rnn_params(store: ParamStore, prefix: str) -> dict:
    return {k: store[f"{prefix}.{k}"] for k in ("W", "U", "b")}


def rnn_cell_step(x, h_prev, p: dict):
    _check_state(x, h_prev, p["W"], p["U"])
    h = np.tanh(x @ p["W"].T + h_prev @ p["U"].T + p["b"])
    return h, (x, h_prev, h)


def rnn_cell_backward(dh, cache, p: dict):
    x, h_prev, h = cache
    d = dh * (1.0 - h ** 2)
    d2 = np.atleast_2d(d)
    grads = {"W": d2.T @ np.atleast_2d(x), "U": d2.T @ np.atleast_2d(h_prev), "b": d2.sum(axis=0)}
    return d @ p["W"], d @ p["U"], grads


# -- convolution -----------------------------------------------------------

def tcn_layer(seq, W, b, kernel_size: int, dilation: int, activation: str = "relu"):
    """Dilated causal convolution over ``seq (B, T, C_in)`` with ``W (k, C_out, C_in)``.

    ``out[t] = act(sum_i W[i] @ seq[t - dilation * i] + b)``, with zeros for
    negative time indices.
    """
    seq = np.asarray(seq, dtype=np.float64)
    squeeze = seq.ndim == 2
    if squeeze:
        seq = seq[None]
    if W.shape[0] != kernel_size or W.shape[2] != seq.shape[2] or b.shape != (W.shape[1],):
        raise ShapeMismatch(f"kernel {W.shape} / bias {b.shape} vs input channels {seq.shape[2]}")
    if kernel_size < 1 or dilation < 1:
        raise ValueError("kernel_size and dilation must be >= 1")
    T = seq.shape[1]
    pre = np.broadcast_to(b, (seq.shape[0], T, W.shape[1])).copy()
    for i in range(kernel_size):
        lag = dilation * i
        if lag >= T:
            break
        pre[:, lag:] += seq[:, :T - lag] @ W[i].T
    out = relu(pre) if activation == "relu" else pre
    cache = (seq, W, kernel_size, dilation, activation, pre, squeeze)
    return (out[0] if squeeze else out), cache


def tcn_layer_backward(dout, cache):
    seq, W, k, d, activation, pre, squeeze = cache
    dout = dout[None] if squeeze else dout
    dpre = dout * (pre > 0) if activation == "relu" else dout
    T = seq.shape[1]
    dseq = np.zeros_like(seq)
    dW = np.zeros_like(W)
    for i in range(k):
        lag = d * i
        if lag >= T:
            break
        g = dpre[:, lag:].reshape(-1, W.shape[1])
        s = seq[:, :T - lag].reshape(-1, W.shape[2])
        dW[i] = g.T @ s
        dseq[:, :T - lag] += dpre[:, lag:] @ W[i]
    db = dpre.sum(axis=(0, 1))
    return (dseq[0] if squeeze else dseq), dW, db


def maxpool1d(x, size: int = 2):
    """Non-overlapping max pool over time of ``x (B, T, C)``; a ragged tail is dropped."""
    B, T, C = x.shape
    To = T // size
    win = x[:, :To * size].reshape(B, To, size, C)
    arg = win.argmax(axis=2)
    out = np.take_along_axis(win, arg[:, :, None, :], axis=2)[:, :, 0, :]
    return out, (x.shape, arg, size)


def maxpool1d_backward(dout, cache):
    shape, arg, size = cache
    B, T, C = shape
    To = dout.shape[1]
    dwin = np.zeros((B, To, size, C))
    np.put_along_axis(dwin, arg[:, :, None, :], dout[:, :, None, :], axis=2)
    dx = np.zeros(shape)
    dx[:, :To * size] = dwin.reshape(B, To * size, C)
    return dx


# -- loss ------------------------------------------------------------------

def bce_loss(pred, target):
    """Mean binary cross-entropy with predictions clamped to ``[eps, 1 - eps]``.

    Returns ``(loss, dloss/dpred)``; the gradient is zero where the clamp is
    active.
    """
    p = np.asarray(pred, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    if p.shape != y.shape:
        raise ShapeMismatch(f"prediction shape {p.shape} vs target shape {y.shape}")
    pc = np.clip(p, BCE_EPS, 1.0 - BCE_EPS)
    n = p.size
    loss = float(-np.mean(y * np.log(pc) + (1 - y) * np.log(1 - pc)))
    grad = (pc - y) / (pc * (1 - pc)) / n
    grad = np.where((p > BCE_EPS) & (p < 1 - BCE_EPS), grad, 0.0)
    return loss, grad


def bce_with_logits(logits, target):
    """BCE on ``sigmoid(logits)``; gradient with respect to the logits.

    Mathematically the clamped BCE composed with a sigmoid, but computed in
    the log domain so saturated logits keep a useful gradient.
    """
    s = np.asarray(logits, dtype=np.float64)
    y = np.asarray(target, dtype=np.float64)
    if s.shape != y.shape:
        raise ShapeMismatch(f"logit shape {s.shape} vs target shape {y.shape}")
    p = sigmoid(s)
    pc = np.clip(p, BCE_EPS, 1 - BCE_EPS)
    loss = float(-np.mean(y * np.log(pc) + (1 - y) * np.log(1 - pc)))
    return loss, (p - y) / s.size


# -- optimiser -------------------------------------------------------------

@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)


def adam_update(params: dict, grads: dict, state: AdamState) -> None:
    """Bias-corrected Adam step applied in place to ``params``."""
    state.step_count += 1
    t = state.step_count
    for name, g in grads.items():
        w = params[name]
        if g.shape != w.shape:
            raise ShapeMismatch(f"gradient for {name} has shape {g.shape}, expected {w.shape}")
        m = state.first_moment.setdefault(name, np.zeros_like(w))
        v = state.second_moment.setdefault(name, np.zeros_like(w))
        m *= state.beta1
        m += (1 - state.beta1) * g
        v *= state.beta2
        v += (1 - state.beta2) * g * g
        m_hat = m / (1 - state.beta1 ** t)
        v_hat = v / (1 - state.beta2 ** t)
        w -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)

"""Shared numeric oracles for the test suite."""

import numpy as np


def rel_err(a, b) -> float:
    """Norm-wise relative error ``|a - b| / max(|a|, |b|, 1e-8)``."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a), np.linalg.norm(b), 1e-8))


def central_diff(f, x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences of scalar ``f()`` w.r.t. array ``x`` (perturbed in place)."""
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        old = x[i]
        x[i] = old + eps
        fp = f()
        x[i] = old - eps
        fm = f()
        x[i] = old
        g[i] = (fp - fm) / (2 * eps)
    return g


def model_grad_errors(model, X, y, eps: float = 1e-6) -> dict:
    """Relative error of every trainable gradient of mean BCE against central differences."""
    from quchater.neural import bce_with_logits

    yf = np.asarray(y, dtype=np.float64)

    def loss():
        logits, _ = model.forward(X)
        return bce_with_logits(logits, yf)[0]

    logits, cache = model.forward(X)
    _, dlogits = bce_with_logits(logits, yf)
    grads = model.backward(cache, dlogits)
    out = {}
    for name in model.params.trainable():
        num = central_diff(loss, model.params.data[name], eps)
        out[name] = rel_err(grads[name], num)
    return out

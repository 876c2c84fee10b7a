from __future__ import annotations

from ..neural import maxpool1d, maxpool1d_backward, tcn_layer, tcn_layer_backward
from .base import SequenceClassifier


class CNN1DClassifier(SequenceClassifier):
    """Two (conv -> ReLU -> max-pool) blocks, global average pool, linear readout."""

    kind = "cnn1d"

    def __init__(self, n_features: int, channels=(16, 32), kernel_size: int = 3,
                 pool: int = 2, seed: int = 0, lr: float = 0.001):
        super().__init__(n_features, seed, lr)
        self.channels = tuple(int(c) for c in channels)
        self.kernel_size = kernel_size
        self.pool = pool
        c_in = n_features
        for i, c_out in enumerate(self.channels):
            self.params.uniform(f"conv{i}.W", (kernel_size, c_out, c_in), kernel_size * c_in, seed)
            self.params.zeros(f"conv{i}.b", (c_out,))
            c_in = c_out
        self._init_readout(c_in)

    def hyperparams(self) -> dict:
        return {**super().hyperparams(), "channels": list(self.channels),
                "kernel_size": self.kernel_size, "pool": self.pool}

    def forward(self, X):
        x = self._check_input(X)
        caches = []
        for i in range(len(self.channels)):
            x, cc = tcn_layer(x, self.params[f"conv{i}.W"], self.params[f"conv{i}.b"],
                              self.kernel_size, 1)
            pooled, pc = maxpool1d(x, self.pool) if x.shape[1] >= self.pool else (x, None)
            caches.append((cc, pc))
            x = pooled
        feat = x.mean(axis=1)
        return self._readout(feat), (caches, x.shape, feat)

    def backward(self, cache, dlogits) -> dict:
        caches, shape, feat = cache
        grads: dict = {}
        dfeat = self._readout_backward(dlogits, feat, grads)
        dx = (dfeat[:, None, :] / shape[1]).repeat(shape[1], axis=1)
        for i in range(len(self.channels) - 1, -1, -1):
            cc, pc = caches[i]
            if pc is not None:
                dx = maxpool1d_backward(dx, pc)
            dx, dW, db = tcn_layer_backward(dx, cc)
            grads[f"conv{i}.W"] = dW
            grads[f"conv{i}.b"] = db
        return grads

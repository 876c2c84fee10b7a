"""SMOTE oversampling for the binary case."""

from __future__ import annotations

import numpy as np

from ..errors import TooFewMinoritySamples


def nearest_neighbors(X: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` nearest other rows of ``X`` (Euclidean), closest first."""
    sq = (X ** 2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * X @ X.T
    np.fill_diagonal(d2, np.inf)
    # stable sort keeps ties in index order, which keeps the output reproducible
    return np.argsort(d2, axis=1, kind="stable")[:, :k]


def smote_oversample(X, y, k_neighbors: int = 5, seed: int = 0):
    """Upsample the minority class until both classes have the same count.

    Returns ``(X_out, y_out)``: the original rows in their original order
    followed by the synthetic minority rows. Each synthetic row is
    ``base + lam * (neighbor - base)`` with ``lam ~ U[0, 1]`` and ``neighbor``
    one of the ``k_neighbors`` closest minority rows to ``base``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    counts = {c: int((y == c).sum()) for c in (0, 1)}
    if counts[0] == counts[1]:
        return X.copy(), y.copy()
    minority = 0 if counts[0] < counts[1] else 1
    n_new = abs(counts[0] - counts[1])
    Xm = X[y == minority]
    if len(Xm) < k_neighbors + 1:
        raise TooFewMinoritySamples(
            f"{len(Xm)} minority samples cannot supply {k_neighbors} neighbours each")
    nn = nearest_neighbors(Xm, k_neighbors)
    rng = np.random.default_rng(seed)
    base = rng.integers(0, len(Xm), size=n_new)
    pick = rng.integers(0, k_neighbors, size=n_new)
    lam = rng.random(n_new)
    nbr = nn[base, pick]
    synth = Xm[base] + lam[:, None] * (Xm[nbr] - Xm[base])
    X_out = np.concatenate([X, synth])
    y_out = np.concatenate([y, np.full(n_new, minority, dtype=np.int64)])
    return X_out, y_out

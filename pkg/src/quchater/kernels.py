"""Backend selection for the batched circuit kernel.

The compiled extension is used when it imports; otherwise, or when
``QUCHATER_KERNELS=python`` is set, the numpy implementation takes over.
Both expose ``circuit_states`` and ``circuit_expz`` with identical results
up to floating-point rounding.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

SHIFT = np.pi / 2


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _ckernels is not None else [])


def _default_backend() -> str:
    want = os.environ.get("QUCHATER_KERNELS", "").lower()
    if want == "python" or _ckernels is None:
        return "python"
    return "cython"


BACKEND = _default_backend()


def circuit_states(ry, rz, backend: str | None = None) -> np.ndarray:
    backend = backend or BACKEND
    if backend == "cython":
        perm = _pykernels._tables(np.shape(ry)[2])[2]
        return _ckernels.circuit_states(ry, rz, perm)
    return _pykernels.circuit_states(ry, rz)


def circuit_expz(ry, rz, backend: str | None = None) -> np.ndarray:
    backend = backend or BACKEND
    if backend == "cython":
        perm = _pykernels._tables(np.shape(ry)[2])[2]
        return _ckernels.circuit_expz(ry, rz, perm)
    return _pykernels.circuit_expz(ry, rz)


def embedding_batch(x, theta, backend: str | None = None) -> np.ndarray:
    """``<Z>`` readout ``(B, Q)`` for data angles ``x (B, Q)`` and shared ``theta (L, Q)``."""
    x = np.asarray(x, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    b = x.shape[0]
    layers = theta.shape[0]
    ry = np.broadcast_to(theta, (b,) + theta.shape)
    rz = np.broadcast_to(x[:, None, :], (b, layers, x.shape[1]))
    return circuit_expz(ry, rz, backend)


def circuit_jacobians(x, theta, backend: str | None = None):
    """Readout and its parameter-shift Jacobians for a batch.

    Returns ``(z, j_theta, j_x)`` with shapes ``(B, Q)``, ``(B, L, Q, Q)`` and
    ``(B, Q, Q)``; the last axis indexes the measured qubit. All ``1 + 4 L Q``
    circuit variants per sample run as a single kernel call.
    """
    x = np.asarray(x, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    b, q = x.shape
    layers = theta.shape[0]
    p = layers * q
    n_var = 1 + 4 * p
    ry = np.empty((b, n_var, layers, q))
    rz = np.empty((b, n_var, layers, q))
    ry[:] = theta
    rz[:] = x[:, None, None, :]
    eye = np.eye(p).reshape(p, layers, q) * SHIFT
    ry[:, 1:1 + p] += eye
    ry[:, 1 + p:1 + 2 * p] -= eye
    rz[:, 1 + 2 * p:1 + 3 * p] += eye
    rz[:, 1 + 3 * p:] -= eye
    z = circuit_expz(ry.reshape(-1, layers, q), rz.reshape(-1, layers, q), backend)
    z = z.reshape(b, n_var, q)
    j_theta = 0.5 * (z[:, 1:1 + p] - z[:, 1 + p:1 + 2 * p])
    j_rz = 0.5 * (z[:, 1 + 2 * p:1 + 3 * p] - z[:, 1 + 3 * p:])
    # x_q feeds one RZ per layer; sum the per-occurrence derivatives
    j_x = j_rz.reshape(b, layers, q, q).sum(axis=1)
    return z[:, 0], j_theta.reshape(b, layers, q, q), j_x

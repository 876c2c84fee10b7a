import numpy as np
import pytest

from quchater import kernels
from quchater.qsim import CircuitParams, embedding_forward, input_shift_grad, parameter_shift_grad

BACKENDS = kernels.available_backends()


def test_python_backend_always_available():
    assert "python" in BACKENDS


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("q, layers", [(1, 1), (2, 2), (4, 3), (6, 2)])
def test_batch_matches_reference_simulator(backend, q, layers):
    rng = np.random.default_rng(q * 10 + layers)
    theta = rng.uniform(-np.pi, np.pi, (layers, q))
    x = rng.uniform(-np.pi, np.pi, (5, q))
    z = kernels.embedding_batch(x, theta, backend)
    params = CircuitParams(theta)
    want = np.stack([embedding_forward(xi, params) for xi in x])
    np.testing.assert_allclose(z, want, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_jacobians_match_shift_rule(backend):
    rng = np.random.default_rng(4)
    q, layers = 3, 2
    theta = rng.uniform(-np.pi, np.pi, (layers, q))
    x = rng.uniform(-np.pi, np.pi, (4, q))
    z, jt, jx = kernels.circuit_jacobians(x, theta, backend)
    params = CircuitParams(theta)
    for b in range(4):
        for j in range(q):
            up = np.eye(q)[j]
            np.testing.assert_allclose(jt[b, :, :, j], parameter_shift_grad(x[b], params, up), atol=1e-12)
            np.testing.assert_allclose(jx[b, :, j], input_shift_grad(x[b], params, up), atol=1e-12)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled extension not built")
    rng = np.random.default_rng(0)
    theta = rng.uniform(-np.pi, np.pi, (2, 6))
    x = rng.uniform(-np.pi, np.pi, (16, 6))
    a = kernels.circuit_jacobians(x, theta, "python")
    b = kernels.circuit_jacobians(x, theta, "cython")
    for u, v in zip(a, b):
        np.testing.assert_allclose(u, v, atol=1e-13)


def test_states_normalised():
    rng = np.random.default_rng(1)
    for backend in BACKENDS:
        ry = rng.uniform(-3, 3, (7, 2, 5))
        rz = rng.uniform(-3, 3, (7, 2, 5))
        psi = kernels.circuit_states(ry, rz, backend)
        np.testing.assert_allclose(np.linalg.norm(psi, axis=1), 1.0, atol=1e-12)

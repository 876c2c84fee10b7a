"""Exact statevector simulation of the variational embedding circuit.

Qubit 0 is the most significant bit of the basis index, so ``RY(pi)`` on
qubit 0 maps ``|00..0>`` to ``|10..0>``. Each layer applies, in time order,
an RY column with the trainable angles, an RZ column with the data angles
and the CNOT ring ``q -> (q + 1) mod Q`` in ascending ``q`` (skipped when
``Q == 1``).

The functions here work one state at a time and apply gates individually;
the batched training path lives in :mod:`quchater.kernels`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import ControlEqualsTarget, IndexOutOfRange, LengthMismatch

SHIFT = np.pi / 2


@dataclass
class StateVector:
    amplitudes: np.ndarray
    qubit_count: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (2 ** self.qubit_count,):
            raise LengthMismatch(
                f"{self.qubit_count} qubits need {2 ** self.qubit_count} amplitudes")

    @classmethod
    def zero(cls, qubits: int) -> "StateVector":
        amp = np.zeros(2 ** qubits, dtype=np.complex128)
        amp[0] = 1.0
        return cls(amp, qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_json(self) -> str:
        return json.dumps({
            "qubits": self.qubit_count,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        })


class Gate(NamedTuple):
    kind: str  # "RY", "RZ" or "CNOT"
    qubit: int  # target qubit (control for CNOT)
    angle: float = 0.0
    target: int = -1


def RY(theta: float, q: int) -> Gate:
    return Gate("RY", q, float(theta))


def RZ(phi: float, q: int) -> Gate:
    return Gate("RZ", q, float(phi))


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", control, 0.0, target)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz_matrix(phi: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


def _check_qubit(q: int, n: int) -> None:
    if not 0 <= q < n:
        raise IndexOutOfRange(f"qubit {q} outside register of {n}")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Return a new state with ``gate`` applied; the input is left untouched."""
    n = state.qubit_count
    psi = state.amplitudes.reshape((2,) * n).copy()
    if gate.kind == "CNOT":
        c, t = gate.qubit, gate.target
        _check_qubit(c, n)
        _check_qubit(t, n)
        if c == t:
            raise ControlEqualsTarget(f"CNOT control and target are both {c}")
        sel = [slice(None)] * n
        sel[c] = 1
        sub_t = t if t < c else t - 1  # target axis inside the control=1 slice
        psi[tuple(sel)] = np.flip(psi[tuple(sel)], axis=sub_t)
    else:
        _check_qubit(gate.qubit, n)
        if gate.kind == "RY":
            u = ry_matrix(gate.angle)
        elif gate.kind == "RZ":
            u = rz_matrix(gate.angle)
        else:
            raise ValueError(f"unknown gate {gate.kind!r}")
        psi = np.moveaxis(np.tensordot(u, psi, axes=([1], [gate.qubit])), 0, gate.qubit)
    return StateVector(psi.reshape(-1), n)


@dataclass
class CircuitParams:
    theta: np.ndarray  # (layers, qubits)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.ndim != 2 or min(self.theta.shape) < 1:
            raise LengthMismatch("theta must have shape (layers, qubits)")
        if not np.all(np.isfinite(self.theta)):
            raise ValueError("circuit angles must be finite")

    @property
    def layers(self) -> int:
        return self.theta.shape[0]

    @property
    def qubits(self) -> int:
        return self.theta.shape[1]

    @classmethod
    def init(cls, layers: int, qubits: int, rng: np.random.Generator) -> "CircuitParams":
        return cls(rng.uniform(-np.pi, np.pi, size=(layers, qubits)))


def ring_pairs(qubits: int) -> list[tuple[int, int]]:
    if qubits == 1:
        return []
    return [(q, (q + 1) % qubits) for q in range(qubits)]


def circuit_gates(x, params: CircuitParams, rz_angles=None) -> list[Gate]:
    """Gate list in application order.

    ``rz_angles`` may supply per-layer data angles ``(layers, qubits)``;
    by default every layer uses ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.qubits,):
        raise LengthMismatch(f"expected {params.qubits} data angles, got shape {x.shape}")
    rz = np.broadcast_to(x, params.theta.shape) if rz_angles is None else np.asarray(rz_angles)
    gates: list[Gate] = []
    for layer in range(params.layers):
        gates += [RY(params.theta[layer, q], q) for q in range(params.qubits)]
        gates += [RZ(rz[layer, q], q) for q in range(params.qubits)]
        gates += [CNOT(c, t) for c, t in ring_pairs(params.qubits)]
    return gates


def run_embedding(x, params: CircuitParams, rz_angles=None) -> StateVector:
    state = StateVector.zero(params.qubits)
    for g in circuit_gates(x, params, rz_angles):
        state = apply_gate(state, g)
    return state


def expect_z(state: StateVector, qubit: int) -> float:
    _check_qubit(qubit, state.qubit_count)
    probs = np.abs(state.amplitudes.reshape((2,) * state.qubit_count)) ** 2
    marg = probs.sum(axis=tuple(i for i in range(state.qubit_count) if i != qubit))
    return float(marg[0] - marg[1])


def expect_z_all(state: StateVector) -> np.ndarray:
    return np.array([expect_z(state, q) for q in range(state.qubit_count)])


def embedding_forward(x, params: CircuitParams, rz_angles=None) -> np.ndarray:
    return expect_z_all(run_embedding(x, params, rz_angles))


def parameter_shift_grad(x, params: CircuitParams, upstream) -> np.ndarray:
    """Chain-rule contraction ``sum_j upstream_j * d<Z_j>/d theta`` via the shift rule."""
    upstream = np.asarray(upstream, dtype=np.float64)
    grad = np.zeros_like(params.theta)
    for layer in range(params.layers):
        for q in range(params.qubits):
            plus = params.theta.copy()
            minus = params.theta.copy()
            plus[layer, q] += SHIFT
            minus[layer, q] -= SHIFT
            d = 0.5 * (embedding_forward(x, CircuitParams(plus))
                       - embedding_forward(x, CircuitParams(minus)))
            grad[layer, q] = upstream @ d
    return grad


def input_shift_grad(x, params: CircuitParams, upstream) -> np.ndarray:
    """Gradient with respect to the data angles.

    ``x_q`` drives one RZ gate per layer, so the shift rule is applied to each
    occurrence separately and the contributions are summed.
    """
    x = np.asarray(x, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    base = np.broadcast_to(x, params.theta.shape)
    grad = np.zeros(params.qubits)
    for layer in range(params.layers):
        for q in range(params.qubits):
            plus, minus = base.copy(), base.copy()
            plus[layer, q] += SHIFT
            minus[layer, q] -= SHIFT
            d = 0.5 * (embedding_forward(x, params, plus) - embedding_forward(x, params, minus))
            grad[q] += upstream @ d
    return grad


def dump_state(path: str | Path, state: StateVector) -> None:
    Path(path).write_text(state.to_json())

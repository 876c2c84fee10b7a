# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batched circuit kernel.

Same contract as ``_pykernels``: rows of (layers, qubits) RY/RZ angles in,
statevectors or Pauli-Z expectations out. Rows are simulated one at a time in
split real/imaginary scratch buffers.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef void _simulate(const double[:, :] ry, const double[:, :] rz, int qubits,
                    double* re, double* im, const cnp.int64_t* perm,
                    double* tre, double* tim, double* phase) noexcept nogil:
    cdef int layers = ry.shape[0]
    cdef long dim = 1 << qubits
    cdef long i, j, stride, blk
    cdef int layer, q
    cdef double c, s, a0r, a0i, a1r, a1i, ph, cp, sp, xr, xi
    for i in range(dim):
        re[i] = 0.0
        im[i] = 0.0
    re[0] = 1.0
    for layer in range(layers):
        for q in range(qubits):
            c = cos(0.5 * ry[layer, q])
            s = sin(0.5 * ry[layer, q])
            stride = 1 << (qubits - 1 - q)
            blk = 0
            while blk < dim:
                for i in range(blk, blk + stride):
                    j = i + stride
                    a0r = re[i]; a0i = im[i]
                    a1r = re[j]; a1i = im[j]
                    re[i] = c * a0r - s * a1r
                    im[i] = c * a0i - s * a1i
                    re[j] = s * a0r + c * a1r
                    im[j] = s * a0i + c * a1i
                blk += 2 * stride
        # diagonal RZ column: accumulated phase per basis state
        for i in range(dim):
            phase[i] = 0.0
        for q in range(qubits):
            stride = 1 << (qubits - 1 - q)
            for i in range(dim):
                if i & stride:
                    phase[i] += 0.5 * rz[layer, q]
                else:
                    phase[i] -= 0.5 * rz[layer, q]
        for i in range(dim):
            ph = phase[i]
            cp = cos(ph)
            sp = sin(ph)
            xr = re[i]; xi = im[i]
            tre[i] = xr * cp - xi * sp
            tim[i] = xr * sp + xi * cp
        # CNOT ring as one gather
        for i in range(dim):
            re[i] = tre[perm[i]]
            im[i] = tim[perm[i]]


def circuit_states(ry, rz, perm):
    cdef const double[:, :, :] RY = np.ascontiguousarray(ry, dtype=np.float64)
    cdef const double[:, :, :] RZ = np.ascontiguousarray(rz, dtype=np.float64)
    cdef cnp.int64_t[:] P = np.ascontiguousarray(perm, dtype=np.int64)
    cdef Py_ssize_t n = RY.shape[0], r
    cdef int qubits = RY.shape[2]
    cdef long dim = 1 << qubits, i
    out = np.empty((n, dim), dtype=np.complex128)
    cdef double[:, :] O = out.view(np.float64)
    cdef double* buf = <double*> malloc(5 * dim * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(n):
                _simulate(RY[r], RZ[r], qubits, buf, buf + dim, &P[0],
                          buf + 2 * dim, buf + 3 * dim, buf + 4 * dim)
                for i in range(dim):
                    O[r, 2 * i] = buf[i]
                    O[r, 2 * i + 1] = buf[dim + i]
    finally:
        free(buf)
    return out


def circuit_expz(ry, rz, perm):
    cdef const double[:, :, :] RY = np.ascontiguousarray(ry, dtype=np.float64)
    cdef const double[:, :, :] RZ = np.ascontiguousarray(rz, dtype=np.float64)
    cdef cnp.int64_t[:] P = np.ascontiguousarray(perm, dtype=np.int64)
    cdef Py_ssize_t n = RY.shape[0], r
    cdef int qubits = RY.shape[2], q
    cdef long dim = 1 << qubits, i, stride
    out = np.zeros((n, qubits), dtype=np.float64)
    cdef double[:, :] O = out
    cdef double p
    cdef double* buf = <double*> malloc(5 * dim * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(n):
                _simulate(RY[r], RZ[r], qubits, buf, buf + dim, &P[0],
                          buf + 2 * dim, buf + 3 * dim, buf + 4 * dim)
                for i in range(dim):
                    p = buf[i] * buf[i] + buf[dim + i] * buf[dim + i]
                    for q in range(qubits):
                        stride = 1 << (qubits - 1 - q)
                        if i & stride:
                            O[r, q] -= p
                        else:
                            O[r, q] += p
    finally:
        free(buf)
    return out

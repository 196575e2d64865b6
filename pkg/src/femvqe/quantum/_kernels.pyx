# cython: language_level=3
"""Compiled statevector kernels.

Signature-compatible with _kernels_py; selected at import by backend.py.
Amplitude arrays are C-contiguous complex128 of length 2^n, qubit q is bit
q of the index.  Gate kernels mutate in place.
"""

import numpy as np

from libc.math cimport cos, sin


def apply_ry(double complex[::1] amps, int n, int q, double theta):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t step = 1 << q
    cdef Py_ssize_t base, off, i
    cdef double c = cos(theta / 2), s = sin(theta / 2)
    cdef double complex a0, a1
    for base in range(0, dim, step << 1):
        for off in range(step):
            i = base + off
            a0 = amps[i]
            a1 = amps[i + step]
            amps[i] = c * a0 - s * a1
            amps[i + step] = s * a0 + c * a1


def apply_rz(double complex[::1] amps, int n, int q, double theta):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t step = 1 << q
    cdef Py_ssize_t base, off, i
    cdef double complex lo, hi
    lo = cos(theta / 2) - 1j * sin(theta / 2)
    hi = cos(theta / 2) + 1j * sin(theta / 2)
    for base in range(0, dim, step << 1):
        for off in range(step):
            i = base + off
            amps[i] = lo * amps[i]
            amps[i + step] = hi * amps[i + step]


def apply_cx(double complex[::1] amps, int n, int control, int target):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t i, j
    cdef double complex tmp
    for i in range(dim):
        if ((i >> control) & 1) == 1 and ((i >> target) & 1) == 0:
            j = i | (1 << target)
            tmp = amps[i]
            amps[i] = amps[j]
            amps[j] = tmp


def apply_cz(double complex[::1] amps, int n, int control, int target):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t i
    for i in range(dim):
        if ((i >> control) & 1) == 1 and ((i >> target) & 1) == 1:
            amps[i] = -amps[i]


def apply_crx(double complex[::1] amps, int n, int control, int target, double theta):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t i, j
    cdef double c = cos(theta / 2), s = sin(theta / 2)
    cdef double complex a0, a1
    for i in range(dim):
        if ((i >> control) & 1) == 1 and ((i >> target) & 1) == 0:
            j = i | (1 << target)
            a0 = amps[i]
            a1 = amps[j]
            amps[i] = c * a0 - 1j * s * a1
            amps[j] = -1j * s * a0 + c * a1


def pauli_expectation(double complex[::1] amps, int n, unsigned long long flip,
                      unsigned long long phase_mask, int n_y):
    """<psi|P|psi> in O(2^n); see the pure-python twin for the mask algebra."""
    cdef Py_ssize_t dim = 1 << n
    cdef unsigned long long j, m
    cdef int par, k
    cdef double complex acc = 0
    cdef double complex term
    for j in range(dim):
        m = j & phase_mask
        par = 0
        while m:
            m &= m - 1
            par ^= 1
        term = amps[j ^ flip].conjugate() * amps[j]
        if par:
            acc = acc - term
        else:
            acc = acc + term
    cdef double complex phase = 1
    for k in range(n_y & 3):
        phase = phase * 1j
    return complex(phase * acc)


def probabilities(double complex[::1] amps, int n):
    cdef Py_ssize_t dim = 1 << n
    cdef Py_ssize_t i
    out = np.empty(dim, dtype=np.float64)
    cdef double[::1] view = out
    for i in range(dim):
        view[i] = amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
    return out

"""Pure-numpy statevector kernels.

Fallback implementation with the same signatures as the compiled extension
in _kernels.pyx.  All gate kernels mutate the amplitude array in place;
`amps` is a C-contiguous complex128 vector of length 2^n and qubit q is bit
q of the amplitude index (little-endian).
"""

import numpy as np


def apply_ry(amps, n, q, theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    view = amps.reshape(-1, 2, 1 << q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = c * a0 - s * a1
    view[:, 1, :] = s * a0 + c * a1


def apply_rz(amps, n, q, theta):
    view = amps.reshape(-1, 2, 1 << q)
    view[:, 0, :] *= np.exp(-0.5j * theta)
    view[:, 1, :] *= np.exp(0.5j * theta)


def _control_on_target_off(n, control, target):
    idx = np.arange(1 << n)
    return idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 0)]


def apply_cx(amps, n, control, target):
    i0 = _control_on_target_off(n, control, target)
    i1 = i0 | (1 << target)
    tmp = amps[i0].copy()
    amps[i0] = amps[i1]
    amps[i1] = tmp


def apply_cz(amps, n, control, target):
    idx = np.arange(1 << n)
    both = idx[((idx >> control) & 1 == 1) & ((idx >> target) & 1 == 1)]
    amps[both] *= -1.0


def apply_crx(amps, n, control, target, theta):
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    i0 = _control_on_target_off(n, control, target)
    i1 = i0 | (1 << target)
    a0 = amps[i0].copy()
    a1 = amps[i1].copy()
    amps[i0] = c * a0 - 1j * s * a1
    amps[i1] = -1j * s * a0 + c * a1


def pauli_expectation(amps, n, flip, phase_mask, n_y):
    """<psi|P|psi> for the string with the given masks, in O(2^n).

    P's only nonzero per column j sits at row j^flip with value
    i^{n_y} * (-1)^{popcount(j & phase_mask)}.
    """
    idx = np.arange(1 << n, dtype=np.uint64)
    signs = 1.0 - 2.0 * (np.bitwise_count(idx & np.uint64(phase_mask)) & 1)
    acc = np.sum(np.conj(amps[idx ^ np.uint64(flip)]) * signs * amps)
    return complex((1j**(n_y & 3)) * acc)


def probabilities(amps, n):
    return np.abs(amps) ** 2

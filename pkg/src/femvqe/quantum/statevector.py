"""Statevector container and gate application.

Layout convention: qubit j is bit j of the amplitude index, so for N=2 the
amplitude order is |00>, |01>, |10>, |11> with the RIGHTMOST ket character
being qubit 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidQubit, MissingAngle, QubitCountOutOfRange
from . import backend

MAX_QUBITS = 12

GATES = ("Ry", "Rz", "CX", "CZ", "CRX")
PARAMETERIZED = ("Ry", "Rz", "CRX")


@dataclass
class Statevector:
    amplitudes: np.ndarray
    n_qubits: int

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "Statevector":
        return Statevector(self.amplitudes.copy(), self.n_qubits)


def init_state(n_qubits: int) -> Statevector:
    """|0...0>: amplitude 0 is 1, the rest 0."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise QubitCountOutOfRange(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(amps, n_qubits)


def _check_qubits(state: Statevector, qubits) -> None:
    for q in qubits:
        if not 0 <= q < state.n_qubits:
            raise InvalidQubit(f"qubit {q} out of range for {state.n_qubits}-qubit state")
    if len(set(qubits)) != len(qubits):
        raise InvalidQubit(f"qubit indices must be distinct, got {qubits}")


def apply_gate(state: Statevector, gate: str, qubits, angle=None) -> Statevector:
    """Apply one gate in place and return the (mutated) state.

    qubits is a single index for Ry/Rz, a (control, target) pair for
    CX/CZ/CRX.  angle is required exactly for the parameterized gates.
    """
    if isinstance(qubits, int):
        qubits = (qubits,)
    else:
        qubits = tuple(qubits)
    if gate not in GATES:
        raise ValueError(f"unknown gate {gate!r}; expected one of {GATES}")
    if gate in PARAMETERIZED:
        if angle is None:
            raise MissingAngle(f"{gate} requires an angle")
    elif angle is not None:
        raise ValueError(f"{gate} takes no angle")
    want = 1 if gate in ("Ry", "Rz") else 2
    if len(qubits) != want:
        raise InvalidQubit(f"{gate} expects {want} qubit index(es), got {qubits}")
    _check_qubits(state, qubits)

    amps, n = state.amplitudes, state.n_qubits
    if gate == "Ry":
        backend.apply_ry(amps, n, qubits[0], float(angle))
    elif gate == "Rz":
        backend.apply_rz(amps, n, qubits[0], float(angle))
    elif gate == "CX":
        backend.apply_cx(amps, n, qubits[0], qubits[1])
    elif gate == "CZ":
        backend.apply_cz(amps, n, qubits[0], qubits[1])
    else:
        backend.apply_crx(amps, n, qubits[0], qubits[1], float(angle))
    return state
